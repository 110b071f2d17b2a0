import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import direct_energy, specs
from qubonet.constraint_spec import ConstraintSpec
from qubonet.errors import CoverageError, LabelClashError
from qubonet.network import (
    Role,
    SubConstraint,
    VarRef,
    build_clique_network,
    build_divide_and_conquer,
    build_one_hot_chain,
    s,
    x,
    y,
)
from qubonet.qubo import (
    assemble,
    energies,
    energy,
    expand_sub_constraint,
    merge,
    model_stats,
    negate,
)


def sympy_expand(net, lam=1):
    """Reference expansion of the summed penalties with b**2 -> b."""
    symbols = {ref: sympy.Symbol(ref.label) for ref in net.variables()}
    total = 0
    for sub in net.subs:
        lhs = sum(symbols[op] for op in sub.lhs)
        rhs = sum(symbols[op] if isinstance(op, VarRef) else op for op in sub.rhs)
        total += lam * (lhs - rhs) ** 2
    poly = sympy.Poly(sympy.expand(total), *symbols.values())
    linear, quadratic, offset = {}, {}, 0
    names = list(symbols.values())
    for powers, coef in poly.terms():
        present = [names[i].name for i, p in enumerate(powers) if p]
        if not present:
            offset += coef
        elif len(present) == 1:
            linear[present[0]] = linear.get(present[0], 0) + coef
        else:
            key = tuple(sorted(present))
            quadratic[key] = quadratic.get(key, 0) + coef
    return (
        {k: float(v) for k, v in linear.items() if v},
        {k: float(v) for k, v in quadratic.items() if v},
        float(offset),
    )


def labelled(model):
    labels = model.labels()
    lin = {labels[i]: c for i, c in model.linear.items()}
    quad = {tuple(sorted((labels[i], labels[j]))): c for (i, j), c in model.quadratic.items()}
    return lin, quad, model.offset


def test_expand_switch_with_aux():
    lin, quad, off = expand_sub_constraint(SubConstraint((x(0), x(1)), (0, y(0))))
    assert lin == {x(0): 1, x(1): 1, y(0): 1}
    assert quad == {(x(0), x(1)): 2, (x(0), y(0)): -2, (x(1), y(0)): -2}
    assert off == 0


def test_expand_switch_with_constants():
    lin, quad, off = expand_sub_constraint(SubConstraint((x(0), x(1)), (0, 1)))
    assert lin == {x(0): -1, x(1): -1}
    assert quad == {(x(0), x(1)): 2}
    assert off == 1


def test_expand_identity():
    a = y(3)
    lin, quad, off = expand_sub_constraint(SubConstraint((a,), (s(0),)))
    assert lin == {a: 1, s(0): 1}
    assert quad == {(s(0), a): -2}
    assert off == 0


def test_assemble_clique_equality():
    model = assemble(build_clique_network(ConstraintSpec.equality(4, 2)))
    assert model.linear == {i: -3 for i in range(4)}
    assert model.quadratic == {(i, j): 2 for i in range(4) for j in range(i + 1, 4)}
    assert model.offset == 4


def test_assemble_one_hot_chain_and_single_variable():
    model = assemble(build_one_hot_chain(ConstraintSpec.one_hot(4)))
    assert model.num_variables == 6 and model.num_edges == 7
    single = assemble(build_divide_and_conquer(ConstraintSpec.equality(1, 1)))
    assert single.linear == {0: -1}
    assert single.quadratic == {}
    assert single.offset == 1


@settings(max_examples=60, deadline=None)
@given(specs(max_n=9), st.sampled_from([None, 0, 1, 2]), st.sampled_from([1.0, 2.5]))
def test_assemble_matches_symbolic_expansion(spec, depth, lam):
    net = build_divide_and_conquer(spec, depth)
    lin, quad, off = labelled(assemble(net, lam))
    ref_lin, ref_quad, ref_off = sympy_expand(net, sympy.nsimplify(lam))
    assert lin == pytest.approx(ref_lin)
    assert quad == pytest.approx(ref_quad)
    assert off == pytest.approx(ref_off)


@settings(max_examples=40, deadline=None)
@given(specs(max_n=7), st.sampled_from([None, 1]), st.data())
def test_energy_equals_sum_of_squared_residuals(spec, depth, data):
    net = build_divide_and_conquer(spec, depth)
    model = assemble(net, 1.0)
    refs = net.variables()
    bits = data.draw(st.lists(st.integers(0, 1), min_size=len(refs), max_size=len(refs)))
    values = dict(zip(refs, bits))
    e = energy(model, bits)
    assert e == direct_energy(net, values)
    assert e >= 0
    assert float(e).is_integer()


def test_energy_examples():
    chain = assemble(build_one_hot_chain(ConstraintSpec.one_hot(3)))
    # x = (1, 0, 0), y0 = 1 carries the one down the chain
    assert energy(chain, [1, 0, 0, 1]) == 0
    clique = assemble(build_clique_network(ConstraintSpec.equality(4, 2)))
    assert energy(clique, {i: 0 for i in range(4)}) == 4
    with pytest.raises(CoverageError):
        energy(clique, {0: 1, 1: 0})
    with pytest.raises(CoverageError):
        energy(clique, [0, 1])


def test_vectorized_energies_agree():
    model = assemble(build_divide_and_conquer(ConstraintSpec.range(6, 2, 4)))
    rng = np.random.default_rng(7)
    states = rng.integers(0, 2, (200, model.num_variables))
    assert list(energies(model, states)) == [energy(model, row) for row in states]


def test_assemble_is_linear_in_lambda():
    net = build_divide_and_conquer(ConstraintSpec.at_least(9, 4))
    one, two = assemble(net, 1.0), assemble(net, 2.0)
    assert two.linear == {k: 2 * c for k, c in one.linear.items()}
    assert two.quadratic == {k: 2 * c for k, c in one.quadratic.items()}
    assert two.offset == 2 * one.offset


@settings(max_examples=100, deadline=None)
@given(specs(max_n=24))
def test_integral_coefficients_and_canonical_keys(spec):
    model = assemble(build_divide_and_conquer(spec))
    for (i, j), c in model.quadratic.items():
        assert i < j and c != 0 and float(c).is_integer()
    for c in model.linear.values():
        assert c != 0 and float(c).is_integer()
    assert float(model.offset).is_integer()


@pytest.mark.parametrize("n", range(2, 20))
def test_clique_edge_counts(n):
    assert assemble(build_clique_network(ConstraintSpec.equality(n, n // 2))).num_edges == n * (n - 1) // 2
    spec = ConstraintSpec.at_most(n, n // 3)
    assert assemble(build_clique_network(spec)).num_edges == (n + n // 3) * (n + n // 3 - 1) // 2
    spec = ConstraintSpec.range(n, 1, n - 1)
    assert assemble(build_clique_network(spec)).num_edges == (2 * n - 2) * (2 * n - 3) // 2


def test_model_stats_examples():
    chain = build_one_hot_chain(ConstraintSpec.one_hot(16))
    stats = model_stats(chain, assemble(chain))
    assert (stats.n_variables, stats.n_edges) == (30, 43)
    assert (stats.n_original, stats.n_auxiliary, stats.n_slack) == (16, 14, 0)
    clique = build_clique_network(ConstraintSpec.one_hot(16))
    stats = model_stats(clique, assemble(clique))
    assert (stats.n_variables, stats.n_edges, stats.max_degree) == (16, 120, 15)
    assert stats.degree_histogram == {15: 16}
    full = build_divide_and_conquer(ConstraintSpec.equality(8, 4))
    stats = model_stats(full, assemble(full))
    assert (stats.n_variables, stats.n_edges) == (24, 52)
    assert sum(stats.degree_histogram.values()) == 24
    assert sum(d * c for d, c in stats.degree_histogram.items()) == 2 * 52


def test_merge_identity_and_cancellation():
    model = assemble(build_divide_and_conquer(ConstraintSpec.range(7, 2, 5)))
    assert merge([model]) == model
    zero = merge([model, negate(model)])
    assert zero.linear == {} and zero.quadratic == {} and zero.offset == 0


def test_merge_disjoint_union():
    a = assemble(build_one_hot_chain(ConstraintSpec.one_hot(5))).relabeled(lambda l: "a." + l)
    b = assemble(build_one_hot_chain(ConstraintSpec.one_hot(7))).relabeled(lambda l: "b." + l)
    merged = merge([a, b])
    assert merged.num_edges == a.num_edges + b.num_edges
    assert merged.num_variables == a.num_variables + b.num_variables


def test_merge_shared_labels_add_up():
    model = assemble(build_clique_network(ConstraintSpec.one_hot(3)))
    doubled = merge([model, model])
    assert doubled.quadratic == {k: 2 * c for k, c in model.quadratic.items()}


def test_merge_label_clash():
    a = assemble(build_one_hot_chain(ConstraintSpec.one_hot(4)))
    b = assemble(build_one_hot_chain(ConstraintSpec.one_hot(4))).relabeled(
        lambda l: l.replace("y", "x") if l.startswith("y") else "z" + l
    )
    with pytest.raises(LabelClashError):
        merge([a, b])


def test_registry_layout():
    net = build_divide_and_conquer(ConstraintSpec.range(6, 1, 4))
    model = assemble(net)
    roles = [v.role for v in model.variables]
    n_slack = net.slack_count
    assert roles == [Role.ORIGINAL] * 6 + [Role.SLACK] * n_slack + [Role.AUXILIARY] * net.aux_count
    assert model.labels()[:6] == [f"x{i}" for i in range(6)]
