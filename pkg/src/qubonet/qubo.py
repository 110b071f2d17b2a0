"""Assemble networks into QUBO models and evaluate them."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .constraint_spec import ConstraintSpec
from .errors import CoverageError, LabelClashError
from .network import Network, Role, SubConstraint, VarRef


@dataclass(frozen=True)
class Variable:
    id: int
    label: str
    role: Role


@dataclass(frozen=True)
class QuboModel:
    """offset + sum(linear[i] b_i) + sum(quadratic[i, j] b_i b_j), keys i < j.

    Coefficients equal to zero are never stored.
    """

    variables: tuple
    linear: dict
    quadratic: dict
    offset: float = 0.0
    lam: float = 1.0
    spec: Optional[ConstraintSpec] = field(default=None, compare=False)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_edges(self) -> int:
        return len(self.quadratic)

    def labels(self) -> list[str]:
        return [v.label for v in self.variables]

    def index_of(self, label: str) -> int:
        for v in self.variables:
            if v.label == label:
                return v.id
        raise KeyError(label)

    def ids_with_role(self, role: Role) -> list[int]:
        return [v.id for v in self.variables if v.role is role]

    def adjacency(self) -> dict[int, dict[int, float]]:
        adj: dict[int, dict[int, float]] = {v.id: {} for v in self.variables}
        for (i, j), c in self.quadratic.items():
            adj[i][j] = c
            adj[j][i] = c
        return adj

    def to_arrays(self):
        """Dense ``(h, Q, offset)``; Q is upper triangular."""
        nv = self.num_variables
        h = np.zeros(nv)
        q = np.zeros((nv, nv))
        for i, c in self.linear.items():
            h[i] = c
        for (i, j), c in self.quadratic.items():
            q[i, j] = c
        return h, q, self.offset

    def scaled(self, factor: float) -> "QuboModel":
        return QuboModel(
            self.variables,
            _prune({k: c * factor for k, c in self.linear.items()}),
            _prune({k: c * factor for k, c in self.quadratic.items()}),
            self.offset * factor,
            self.lam * factor,
            self.spec,
        )

    def relabeled(self, rename: Callable[[str], str]) -> "QuboModel":
        variables = tuple(Variable(v.id, rename(v.label), v.role) for v in self.variables)
        return QuboModel(variables, dict(self.linear), dict(self.quadratic), self.offset, self.lam, self.spec)


def negate(model: QuboModel) -> QuboModel:
    negated = model.scaled(-1.0)
    return QuboModel(negated.variables, negated.linear, negated.quadratic, negated.offset, model.lam, model.spec)


def _prune(coeffs: dict) -> dict:
    return {k: c for k, c in coeffs.items() if c != 0}


def _pair(u: VarRef, v: VarRef):
    return (u, v) if u.sort_key() <= v.sort_key() else (v, u)


def expand_sub_constraint(sub: SubConstraint, lam: float = 1.0):
    """Expand ``lam * (sum(lhs) - sum(rhs))**2`` using ``b*b == b``.

    Returns ``(linear, quadratic, offset)`` keyed by VarRef; quadratic keys are
    ordered pairs in canonical variable order.
    """
    sign: dict[VarRef, int] = defaultdict(int)
    const = 0
    for op in sub.lhs:
        sign[op] += 1
    for op in sub.rhs:
        if isinstance(op, VarRef):
            sign[op] -= 1
        else:
            const += op
    # expression: sum(a_v v) - const
    terms = [(v, a) for v, a in sign.items() if a != 0]
    linear = {v: lam * (a * a - 2 * const * a) for v, a in terms}
    quadratic = {}
    for p in range(len(terms)):
        u, a = terms[p]
        for q in range(p + 1, len(terms)):
            v, b = terms[q]
            quadratic[_pair(u, v)] = lam * 2 * a * b
    return _prune(linear), _prune(quadratic), lam * const * const


def assemble(network: Network, lam: float = 1.0) -> QuboModel:
    """Sum of the squared penalties of every sub-constraint in ``network``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    refs = network.variables()
    ids = {ref: i for i, ref in enumerate(refs)}
    linear: dict[int, float] = defaultdict(float)
    quadratic: dict[tuple[int, int], float] = defaultdict(float)
    offset = 0.0
    # same expansion as expand_sub_constraint, on integer ids for speed
    for sub in network.subs:
        sign: dict[int, int] = defaultdict(int)
        const = 0
        for op in sub.lhs:
            sign[ids[op]] += 1
        for op in sub.rhs:
            if isinstance(op, VarRef):
                sign[ids[op]] -= 1
            else:
                const += op
        terms = sorted((i, a) for i, a in sign.items() if a != 0)
        for p, (i, a) in enumerate(terms):
            linear[i] += lam * (a * a - 2 * const * a)
            for j, b in terms[p + 1:]:
                quadratic[(i, j)] += lam * 2 * a * b
        offset += lam * const * const
    variables = tuple(Variable(i, ref.label, ref.role) for i, ref in enumerate(refs))
    return QuboModel(
        variables,
        dict(sorted(_prune(linear).items())),
        dict(sorted(_prune(quadratic).items())),
        offset,
        lam,
        network.spec,
    )


def _as_vector(model: QuboModel, assignment) -> np.ndarray:
    nv = model.num_variables
    if isinstance(assignment, Mapping):
        missing = [v.label for v in model.variables if v.id not in assignment]
        if missing:
            raise CoverageError(f"assignment misses variables {missing[:5]}")
        return np.array([assignment[i] for i in range(nv)], dtype=np.int64)
    vec = np.asarray(assignment, dtype=np.int64)
    if vec.shape != (nv,):
        raise CoverageError(f"assignment has {vec.shape} entries, model has {nv} variables")
    return vec


def energy(model: QuboModel, assignment) -> float:
    """Energy of one assignment, given as ``{id: bit}`` or a bit sequence indexed by id."""
    bits = _as_vector(model, assignment)
    total = model.offset
    for i, c in model.linear.items():
        if bits[i]:
            total += c
    for (i, j), c in model.quadratic.items():
        if bits[i] and bits[j]:
            total += c
    return total


def energies(model: QuboModel, states: np.ndarray) -> np.ndarray:
    """Vectorized energies for a (reads, variables) 0/1 array."""
    states = np.asarray(states, dtype=np.float64)
    out = np.full(states.shape[0], model.offset, dtype=np.float64)
    if model.linear:
        idx = np.fromiter(model.linear.keys(), dtype=np.int64)
        coef = np.fromiter(model.linear.values(), dtype=np.float64)
        out += states[:, idx] @ coef
    if model.quadratic:
        pairs = np.array(list(model.quadratic.keys()), dtype=np.int64)
        coef = np.fromiter(model.quadratic.values(), dtype=np.float64)
        out += (states[:, pairs[:, 0]] * states[:, pairs[:, 1]]) @ coef
    return out


@dataclass(frozen=True)
class FormulationStats:
    n_original: int
    n_auxiliary: int
    n_slack: int
    n_variables: int
    n_edges: int
    max_degree: int
    degree_histogram: dict

    def as_dict(self) -> dict:
        return {
            "n_original": self.n_original,
            "n_auxiliary": self.n_auxiliary,
            "n_slack": self.n_slack,
            "n_variables": self.n_variables,
            "n_edges": self.n_edges,
            "max_degree": self.max_degree,
            "degree_histogram": {str(d): c for d, c in sorted(self.degree_histogram.items())},
        }


def model_stats(network: Optional[Network], model: QuboModel) -> FormulationStats:
    roles = Counter(v.role for v in model.variables)
    degree = Counter()
    for i, j in model.quadratic:
        degree[i] += 1
        degree[j] += 1
    degrees = [degree[v.id] for v in model.variables]
    stats = FormulationStats(
        n_original=roles[Role.ORIGINAL],
        n_auxiliary=roles[Role.AUXILIARY],
        n_slack=roles[Role.SLACK],
        n_variables=model.num_variables,
        n_edges=model.num_edges,
        max_degree=max(degrees, default=0),
        degree_histogram=dict(sorted(Counter(degrees).items())),
    )
    if network is not None and stats.n_variables != network.n_variables:
        raise ValueError("model was not assembled from this network")
    return stats


def merge(models: Sequence[QuboModel]) -> QuboModel:
    """Coefficient-wise sum, unifying variables by label.

    Ids follow the order in which labels are first seen, so ``merge([m])``
    reproduces ``m``.
    """
    if not models:
        raise ValueError("nothing to merge")
    by_label: dict[str, Variable] = {}
    for m in models:
        for v in m.variables:
            seen = by_label.get(v.label)
            if seen is None:
                by_label[v.label] = Variable(len(by_label), v.label, v.role)
            elif seen.role is not v.role:
                raise LabelClashError(
                    f"label {v.label!r} is {seen.role.name} in one model and {v.role.name} in another"
                )
    linear: dict[int, float] = defaultdict(float)
    quadratic: dict[tuple[int, int], float] = defaultdict(float)
    offset = 0.0
    for m in models:
        remap = {v.id: by_label[v.label].id for v in m.variables}
        for i, c in m.linear.items():
            linear[remap[i]] += c
        for (i, j), c in m.quadratic.items():
            a, b = remap[i], remap[j]
            quadratic[(a, b) if a < b else (b, a)] += c
        offset += m.offset
    lams = {m.lam for m in models}
    specs = {m.spec for m in models}
    return QuboModel(
        tuple(by_label.values()),
        dict(sorted(_prune(linear).items())),
        dict(sorted(_prune(quadratic).items())),
        offset,
        lams.pop() if len(lams) == 1 else models[0].lam,
        specs.pop() if len(specs) == 1 else None,
    )


def assignment_from(network: Network, values: Mapping[VarRef, int]) -> dict[int, int]:
    """Translate a ``{VarRef: bit}`` valuation into model ids for ``assemble(network)``."""
    ids = {ref: i for i, ref in enumerate(network.variables())}
    return {ids[ref]: int(bit) for ref, bit in values.items()}
