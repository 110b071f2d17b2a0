import numpy as np
import pytest

from qubonet.constraint_spec import ConstraintSpec
from qubonet.errors import CoverageError
from qubonet.network import Role, build_clique_network, build_divide_and_conquer, build_one_hot_chain
from qubonet.qubo import QuboModel, Variable, assemble, energy
from qubonet.solve import AnnealParams, SampleSet, decode, feasible_rate, simulated_anneal, summarize

FAST = AnnealParams(num_reads=50, sweeps=200, seed=3)


def single(coef):
    return QuboModel((Variable(0, "x0", Role.ORIGINAL),), {0: coef}, {})


def test_single_variable_goes_to_minimum():
    samples = simulated_anneal(single(1.0), FAST)
    assert set(samples.states[:, 0]) == {0}
    assert samples.min_energy == 0
    samples = simulated_anneal(single(-2.0), FAST)
    assert set(samples.states[:, 0]) == {1}
    assert samples.min_energy == -2


def test_params_validation():
    for bad in [dict(num_reads=0), dict(sweeps=0), dict(beta_start=0), dict(beta_start=5, beta_end=1)]:
        with pytest.raises(ValueError):
            AnnealParams(**bad)
    betas = AnnealParams(sweeps=5, beta_start=0.5, beta_end=8).betas()
    assert betas[0] == pytest.approx(0.5) and betas[-1] == pytest.approx(8)
    assert np.all(np.diff(betas) > 0)
    assert list(AnnealParams(sweeps=1).betas()) == [0.1]


def test_seed_determinism_and_worker_invariance():
    model = assemble(build_divide_and_conquer(ConstraintSpec.range(9, 2, 5)), 2.0)
    a = simulated_anneal(model, FAST)
    b = simulated_anneal(model, FAST)
    c = simulated_anneal(model, FAST, workers=4)
    assert a.same_as(b) and a.same_as(c)
    d = simulated_anneal(model, AnnealParams(num_reads=50, sweeps=200, seed=4))
    assert not a.same_as(d)


def test_reads_do_not_depend_on_read_count():
    model = assemble(build_one_hot_chain(ConstraintSpec.one_hot(6)))
    few = simulated_anneal(model, AnnealParams(num_reads=5, sweeps=100, seed=9))
    many = simulated_anneal(model, AnnealParams(num_reads=20, sweeps=100, seed=9))
    assert np.array_equal(few.states, many.states[:5])


def test_reported_energies_match_model():
    model = assemble(build_divide_and_conquer(ConstraintSpec.at_least(8, 3)), 1.5)
    samples = simulated_anneal(model, AnnealParams(num_reads=30, sweeps=20, seed=1))
    for sample in samples:
        assert sample.energy == energy(model, sample.assignment)
        assert sample.energy >= 0


def test_zero_energy_samples_are_feasible():
    spec = ConstraintSpec.equality(10, 4)
    net = build_divide_and_conquer(spec)
    samples = simulated_anneal(assemble(net), AnnealParams(num_reads=100, sweeps=300, seed=11))
    zero = [s for s in samples if s.energy == 0]
    assert zero
    for sample in zero:
        assert spec.is_satisfied(decode(sample.assignment, net))


def test_one_hot_anneal_finds_ground_state():
    net = build_one_hot_chain(ConstraintSpec.one_hot(8))
    samples = simulated_anneal(assemble(net), AnnealParams(num_reads=100, seed=42))
    assert samples.min_energy == 0
    assert feasible_rate(samples, ConstraintSpec.one_hot(8)) >= 0.9


def test_feasible_rate_examples():
    model = assemble(build_clique_network(ConstraintSpec.one_hot(2)))
    states = np.array([[1, 0], [0, 1], [1, 0], [1, 1]], dtype=np.int8)
    samples = SampleSet(model, states, np.zeros(4), FAST)
    assert feasible_rate(samples, ConstraintSpec.one_hot(2)) == 0.75
    states = np.array([[1, 1], [0, 0]], dtype=np.int8)
    samples = SampleSet(model, states, np.zeros(2), FAST)
    assert feasible_rate(samples, ConstraintSpec.one_hot(2)) == 0.0


def test_decode():
    net = build_one_hot_chain(ConstraintSpec.one_hot(4))
    assert decode([0, 1, 0, 0, 1, 1], net) == (0, 1, 0, 0)
    assert decode({0: 1, 1: 0, 2: 0, 3: 0, 4: 0}, net) == (1, 0, 0, 0)
    assert decode([0, 1, 0, 0, 1, 1], assemble(net)) == (0, 1, 0, 0)
    with pytest.raises(CoverageError):
        decode({0: 1, 1: 0}, net)
    with pytest.raises(CoverageError):
        decode([1, 0], net)


def test_summarize():
    spec = ConstraintSpec.one_hot(3)
    samples = simulated_anneal(assemble(build_one_hot_chain(spec)), FAST)
    out = summarize(samples, spec)
    assert out["reads"] == 50
    assert sum(out["energy_histogram"].values()) == 50
    assert out["params"]["seed"] == 3
    assert 0 <= out["feasible_rate"] <= 1


def test_empty_model_rejected():
    with pytest.raises(ValueError):
        simulated_anneal(QuboModel((), {}, {}), FAST)


def test_feasible_rate_ignores_auxiliary_labels():
    spec = ConstraintSpec.at_most(7, 3)
    model = assemble(build_divide_and_conquer(spec))
    samples = simulated_anneal(model, FAST)
    renamed = model.relabeled(lambda l: l if l.startswith("x") else "aux_" + l[::-1])
    other = SampleSet(renamed, samples.states, samples.energies, FAST)
    assert feasible_rate(other, spec) == feasible_rate(samples, spec)
