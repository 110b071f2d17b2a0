"""Shared test helpers."""

import itertools

from hypothesis import strategies as st

from qubonet.constraint_spec import ConstraintSpec, Kind

ACCEPTANCE_LINES = []


def all_specs(n):
    """Every valid spec on n variables, one-hot included."""
    out = [ConstraintSpec.one_hot(n)]
    for k in range(n + 1):
        out += [ConstraintSpec.equality(n, k), ConstraintSpec.at_most(n, k), ConstraintSpec.at_least(n, k)]
        out += [ConstraintSpec.range(n, k, k2) for k2 in range(k, n + 1)]
    return out


def bit_vectors(n):
    return itertools.product((0, 1), repeat=n)


@st.composite
def specs(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    kind = draw(st.sampled_from(list(Kind)))
    if kind is Kind.ONE_HOT:
        return ConstraintSpec.one_hot(n)
    if kind is Kind.RANGE:
        k1 = draw(st.integers(0, n))
        k2 = draw(st.integers(k1, n))
        return ConstraintSpec.range(n, k1, k2)
    k = draw(st.integers(0, n))
    return {
        Kind.EQUALITY: ConstraintSpec.equality,
        Kind.AT_MOST: ConstraintSpec.at_most,
        Kind.AT_LEAST: ConstraintSpec.at_least,
    }[kind](n, k)


def brute_routings(network, x):
    """Every {VarRef: bit} completion of inputs ``x`` satisfying all sub-constraints.

    Plain enumeration; shares no code with the router or the QUBO assembler.
    """
    import numpy as np

    from qubonet.network import Role, VarRef

    free = [v for v in network.variables() if v.role is not Role.ORIGINAL]
    col = {v: j for j, v in enumerate(free)}
    codes = np.arange(1 << len(free), dtype=np.int64)
    table = ((codes[:, None] >> np.arange(len(free))) & 1).astype(np.int64)
    ok = np.ones(len(codes), dtype=bool)
    for sub in network.subs:
        diff = np.zeros(len(codes), dtype=np.int64)
        for sign, ops in ((1, sub.lhs), (-1, sub.rhs)):
            for op in ops:
                if not isinstance(op, VarRef):
                    diff += sign * op
                elif op.role is Role.ORIGINAL:
                    diff += sign * x[op.index]
                else:
                    diff += sign * table[:, col[op]]
        ok &= diff == 0
    return [dict(zip(free, map(int, table[r]))) for r in np.flatnonzero(ok)]


def direct_energy(network, values, lam=1.0):
    """Sum of squared sub-constraint residuals for a {VarRef: bit} valuation."""
    from qubonet.network import VarRef

    total = 0.0
    for sub in network.subs:
        diff = sum(values[op] for op in sub.lhs) - sum(
            values[op] if isinstance(op, VarRef) else op for op in sub.rhs
        )
        total += lam * diff * diff
    return total


def random_model(rng, max_vars=30):
    """A random QuboModel mixing integral and fractional coefficients."""
    from qubonet.network import Role
    from qubonet.qubo import QuboModel, Variable

    nv = int(rng.integers(1, max_vars + 1))
    roles = list(Role)
    variables = tuple(
        Variable(i, f"v{i}_{rng.integers(1000)}", roles[int(rng.integers(3))]) for i in range(nv)
    )

    def coef():
        c = float(rng.normal(0, 10)) if rng.random() < 0.5 else float(rng.integers(-9, 10))
        return c or 1.0

    linear = {i: coef() for i in range(nv) if rng.random() < 0.7}
    pairs = [(i, j) for i in range(nv) for j in range(i + 1, nv) if rng.random() < 0.2]
    spec = ConstraintSpec.range(nv, 0, int(rng.integers(0, nv + 1))) if rng.random() < 0.5 else None
    return QuboModel(variables, linear, {p: coef() for p in pairs}, coef(), float(rng.choice([1, 2.5])), spec)
