"""Exactness checks for decomposition networks.

Routing is solved as an integral flow problem: every sub-constraint is a
node that conserves the number of ones passing through it, every auxiliary
wire is a unit-capacity arc from its producer to its consumer, inputs are
supplies and target ones are demands. Each auxiliary shows up in exactly two
sub-constraints with opposite signs, so the constraint matrix is a network
matrix and max-flow finds an integral routing whenever one exists.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .constraint_spec import ConstraintSpec, Tag, validate_spec
from .errors import BoundsError
from .network import Network, Role, VarRef, operand_for, x as xref
from .qubo import QuboModel

MAX_EXHAUSTIVE_N = 20
MAX_FREE_VARIABLES = 24


def check_wiring(network: Network) -> Optional[str]:
    """Return None if producer/consumer multiplicities hold, else the first violation."""
    lhs_count: Counter = Counter()
    rhs_count: Counter = Counter()
    rhs_consts: Counter = Counter()
    for sub in network.subs:
        for op in sub.lhs:
            if not isinstance(op, VarRef):
                return f"constant {op} on lhs"
            lhs_count[op] += 1
        for op in sub.rhs:
            if isinstance(op, VarRef):
                rhs_count[op] += 1
            elif op in (0, 1):
                rhs_consts[op] += 1
            else:
                return f"non-binary constant {op!r} on rhs"

    limits = {
        Role.ORIGINAL: network.n,
        Role.AUXILIARY: network.aux_count,
        Role.SLACK: network.slack_count,
    }
    for ref in sorted(set(lhs_count) | set(rhs_count), key=VarRef.sort_key):
        if not 0 <= ref.index < limits[ref.role]:
            return f"{ref.role.name.title()} {ref.index} out of range"

    for i in range(network.n):
        ref = xref(i)
        if lhs_count[ref] != 1:
            return f"Original {i} on lhs ×{lhs_count[ref]}"
        if rhs_count[ref]:
            return f"Original {i} on rhs ×{rhs_count[ref]}"
    for i in range(network.aux_count):
        ref = VarRef(Role.AUXILIARY, i)
        if rhs_count[ref] != 1:
            return f"Auxiliary {i} on rhs ×{rhs_count[ref]}"
        if lhs_count[ref] != 1:
            return f"Auxiliary {i} on lhs ×{lhs_count[ref]}"
    for i in range(network.slack_count):
        ref = VarRef(Role.SLACK, i)
        if lhs_count[ref]:
            return f"Slack {i} on lhs ×{lhs_count[ref]}"
        if rhs_count[ref] != 1:
            return f"Slack {i} on rhs ×{rhs_count[ref]}"
    wanted = Counter(operand_for(t) for t in network.targets if t.tag is not Tag.SLACK)
    for bit in (0, 1):
        if rhs_consts[bit] != wanted[bit]:
            return f"constant {bit} on rhs ×{rhs_consts[bit]}, targets hold {wanted[bit]}"
    if _topological_order(network) is None:
        return "auxiliary wiring has a cycle"
    return None


def _topological_order(network: Network) -> Optional[list[int]]:
    producer = {}
    for k, sub in enumerate(network.subs):
        for op in sub.rhs:
            if isinstance(op, VarRef) and op.role is Role.AUXILIARY:
                producer[op] = k
    indegree = [0] * len(network.subs)
    children: list[list[int]] = [[] for _ in network.subs]
    for k, sub in enumerate(network.subs):
        for op in sub.lhs:
            if op in producer:
                indegree[k] += 1
                children[producer[op]].append(k)
    queue = deque(k for k, d in enumerate(indegree) if d == 0)
    order = []
    while queue:
        k = queue.popleft()
        order.append(k)
        for c in children[k]:
            indegree[c] -= 1
            if indegree[c] == 0:
                queue.append(c)
    return order if len(order) == len(network.subs) else None


def telescoping_residual(network: Network) -> tuple[dict, int]:
    """``sum_k (sum(lhs_k) - sum(rhs_k))`` as ``({VarRef: coef}, constant)``."""
    coeffs: Counter = Counter()
    const = 0
    for sub in network.subs:
        for op in sub.lhs:
            coeffs[op] += 1
        for op in sub.rhs:
            if isinstance(op, VarRef):
                coeffs[op] -= 1
            else:
                const -= op
    return {ref: c for ref, c in coeffs.items() if c}, const


def check_telescoping(network: Network) -> Optional[dict]:
    """None if auxiliaries cancel to ``sum(x) - sum(c)``, else the residual.

    The residual is returned as ``{label: coef}`` with the constant under ``"1"``.
    """
    coeffs, const = telescoping_residual(network)
    expected = {xref(i): 1 for i in range(network.n)}
    expected.update({VarRef(Role.SLACK, i): -1 for i in range(network.slack_count)})
    expected_const = -sum(1 for t in network.targets if t.tag is Tag.ONE)
    if coeffs == expected and const == expected_const:
        return None
    residual = {ref.label: c for ref, c in sorted(coeffs.items(), key=lambda kv: kv[0].sort_key())}
    residual["1"] = const
    return residual


class Router:
    """Reusable max-flow router for one network."""

    def __init__(self, network: Network):
        self.network = network
        subs = network.subs
        n_subs = len(subs)
        self.source, self.sink, self.slack_hub = n_subs, n_subs + 1, n_subs + 2
        self.n_nodes = n_subs + 3
        self._head: list[int] = []
        self._cap0: list[int] = []
        self._adj: list[list[int]] = [[] for _ in range(self.n_nodes)]

        producer = {}
        for k, sub in enumerate(subs):
            for op in sub.rhs:
                if isinstance(op, VarRef) and op.role is Role.AUXILIARY:
                    producer[op] = k
        self.input_site = [0] * network.n
        self.var_edges: list[tuple[VarRef, int]] = []
        demand = [0] * n_subs
        for k, sub in enumerate(subs):
            for op in sub.lhs:
                if op.role is Role.ORIGINAL:
                    self.input_site[op.index] = k
                elif op.role is Role.AUXILIARY:
                    self.var_edges.append((op, self._add(producer[op], k, 1)))
            for op in sub.rhs:
                if isinstance(op, VarRef):
                    if op.role is Role.SLACK:
                        self.var_edges.append((op, self._add(k, self.slack_hub, 1)))
                else:
                    demand[k] += op
        self.demand_total = sum(demand)
        for k, d in enumerate(demand):
            if d:
                self._add(k, self.sink, d)
        self.supply_edge = [self._add(self.source, k, 0) for k in range(n_subs)]
        self.slack_edge = self._add(self.slack_hub, self.sink, 0)

    def _add(self, u: int, v: int, cap: int) -> int:
        e = len(self._head)
        self._head += [v, u]
        self._cap0 += [cap, 0]
        self._adj[u].append(e)
        self._adj[v].append(e + 1)
        return e

    def route(self, bits: Sequence[int]) -> Optional[dict]:
        """Auxiliary and slack values giving zero penalty for inputs ``bits``, or None."""
        n = self.network.n
        if len(bits) != n:
            raise ValueError(f"expected {n} input bits, got {len(bits)}")
        total = int(sum(bits))
        excess = total - self.demand_total
        if excess < 0 or excess > self.network.slack_count:
            return None
        cap = list(self._cap0)
        for i, b in enumerate(bits):
            if b:
                cap[self.supply_edge[self.input_site[i]]] += 1
        cap[self.slack_edge] = excess
        if self._max_flow(cap) != total:
            return None
        return {ref: cap[e ^ 1] for ref, e in self.var_edges}

    def _max_flow(self, cap: list[int]) -> int:
        head, adj = self._head, self._adj
        s, t = self.source, self.sink
        flow = 0
        while True:
            parent = [-1] * self.n_nodes
            parent[s] = -2
            queue = deque([s])
            while queue and parent[t] == -1:
                u = queue.popleft()
                for e in adj[u]:
                    v = head[e]
                    if cap[e] > 0 and parent[v] == -1:
                        parent[v] = e
                        queue.append(v)
            if parent[t] == -1:
                return flow
            # bottleneck is 1 on every unit arc; push 1 and repeat
            v = t
            while v != s:
                e = parent[v]
                cap[e] -= 1
                cap[e ^ 1] += 1
                v = head[e ^ 1]
            flow += 1


def find_routing(network: Network, bits: Sequence[int]) -> Optional[dict]:
    """Zero-penalty auxiliary/slack valuation ``{VarRef: bit}`` for inputs ``bits``, or None."""
    return Router(network).route(bits)


@dataclass
class ExactnessReport:
    n_inputs_checked: int = 0
    n_feasible: int = 0
    n_routed: int = 0
    counterexamples: list = field(default_factory=list)
    gap_verified: bool = False

    @property
    def exact(self) -> bool:
        return self.n_routed == self.n_feasible and not self.counterexamples

    def merge(self, other: "ExactnessReport") -> "ExactnessReport":
        return ExactnessReport(
            self.n_inputs_checked + other.n_inputs_checked,
            self.n_feasible + other.n_feasible,
            self.n_routed + other.n_routed,
            self.counterexamples + other.counterexamples,
            self.gap_verified and other.gap_verified,
        )

    def as_dict(self) -> dict:
        return {
            "inputs_checked": self.n_inputs_checked,
            "feasible": self.n_feasible,
            "routed": self.n_routed,
            "counterexamples": [list(c) for c in self.counterexamples],
            "gap_verified": self.gap_verified,
            "exact": self.exact,
        }


def _sweep_chunk(network: Network, start: int, stop: int) -> ExactnessReport:
    spec = network.spec
    n = network.n
    lo, hi = spec.bounds()
    router = Router(network)
    report = ExactnessReport()
    for code in range(start, stop):
        bits = [(code >> i) & 1 for i in range(n)]
        feasible = lo <= sum(bits) <= hi
        routed = router.route(bits) is not None
        report.n_inputs_checked += 1
        report.n_feasible += feasible
        report.n_routed += routed
        if feasible != routed:
            report.counterexamples.append(tuple(bits))
    return report


def gap_holds(network: Network, lam: float = 1.0) -> bool:
    """Every violated assignment costs at least ``lam``.

    Holds when all penalties are ``lam`` times squared integers, which is
    the case whenever every operand is a binary variable or a 0/1 constant.
    """
    return lam > 0 and all(
        isinstance(op, VarRef) or op in (0, 1) for sub in network.subs for op in sub.lhs + sub.rhs
    )


def exhaustive_exactness(spec: ConstraintSpec, network: Network, workers: int = 1) -> ExactnessReport:
    """Check every input in {0,1}^n: feasible inputs must route, infeasible ones must not."""
    spec = validate_spec(spec)
    if spec.n > MAX_EXHAUSTIVE_N:
        raise BoundsError(f"exhaustive check limited to n <= {MAX_EXHAUSTIVE_N}, got {spec.n}")
    if network.spec != spec:
        raise ValueError("network was built for a different spec")
    problem = check_wiring(network)
    if problem:
        raise ValueError(f"network wiring is broken: {problem}")
    residual = check_telescoping(network)
    if residual is not None:
        raise ValueError(f"network does not telescope: {residual}")

    total = 1 << spec.n
    if workers <= 1 or total < 4096:
        report = _sweep_chunk(network, 0, total)
    else:
        bounds = np.linspace(0, total, workers * 4 + 1, dtype=np.int64)
        report = ExactnessReport()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_sweep_chunk, network, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            for fut in futures:
                report = report.merge(fut.result())
    report.gap_verified = gap_holds(network)
    return report


def _hypercube_linear(coeffs: np.ndarray) -> np.ndarray:
    """``coeffs @ b`` for every b, indexed by ``sum(b_j << j)``."""
    out = np.zeros(1)
    for c in coeffs:
        out = np.concatenate([out, out + c])
    return out


def _free_table(h: np.ndarray, q: np.ndarray, free: Sequence[int]) -> np.ndarray:
    """Energy of the ``free`` variables alone (others at 0), indexed by ``sum(b_j << j)``.

    ``q`` is the symmetric coupling matrix.
    """
    fh = h[list(free)]
    fq = q[np.ix_(free, free)]
    table = np.zeros(1)
    for j in range(len(fh)):
        table = np.concatenate([table, table + fh[j] + _hypercube_linear(fq[:j, j])])
    return table


class ConditionalMinimizer:
    """Exact minimum over a set of free variables, the rest fixed per query.

    The free-only part of the energy is tabulated once over all 2^F states.
    Only the free variables coupled to a fixed one (the touched set T) see
    the query, so the table is reduced once to its minimum over the others
    for each of the 2^|T| states of T, and each query costs O(2^|T|).
    """

    def __init__(self, model: QuboModel, free: Sequence[int]):
        free = list(free)
        if len(free) > MAX_FREE_VARIABLES:
            raise BoundsError(f"{len(free)} free variables, enumeration limited to {MAX_FREE_VARIABLES}")
        self.model = model
        self.free = free
        free_set = set(free)
        self.fixed = [v.id for v in model.variables if v.id not in free_set]
        h, q, offset = model.to_arrays()
        q = q + q.T
        self._offset = offset
        self._h = h
        self._q = q
        table = _free_table(h, q, free)
        cross = q[np.ix_(self.fixed, free)]
        touched = [j for j in range(len(free)) if np.any(cross[:, j])]
        rest = [j for j in range(len(free)) if not cross[:, j].any()]
        nf = len(free)
        # C-order axis a of the reshaped table holds bit nf-1-a
        axes = [nf - 1 - j for j in reversed(touched)] + [nf - 1 - j for j in reversed(rest)]
        grid = table.reshape((2,) * nf).transpose(axes).reshape(1 << len(touched), -1)
        self._touched = touched
        self._rest = rest
        self._cross = cross[:, touched]
        self._best_rest = np.argmin(grid, axis=1)
        self._reduced = grid[np.arange(grid.shape[0]), self._best_rest]

    def minimize(self, fixed_values: Mapping[int, int]):
        vals = np.array([fixed_values[i] for i in self.fixed], dtype=np.float64)
        base = self._offset + vals @ self._h[self.fixed]
        if len(self.fixed):
            qf = self._q[np.ix_(self.fixed, self.fixed)]
            base += 0.5 * vals @ qf @ vals
        field_ = vals @ self._cross if len(self.fixed) else np.zeros(len(self._touched))
        totals = self._reduced + _hypercube_linear(field_)
        r = int(np.argmin(totals))
        c = int(self._best_rest[r])
        argmin = dict(fixed_values)
        for k, j in enumerate(self._touched):
            argmin[self.free[j]] = (r >> k) & 1
        for k, j in enumerate(self._rest):
            argmin[self.free[j]] = (c >> k) & 1
        return float(base + totals[r]), argmin


def brute_force_min(model: QuboModel, fixed: Optional[Mapping[int, int]] = None):
    """Exact ``(min energy, argmin)`` by enumerating every free variable."""
    fixed = dict(fixed or {})
    free = [v.id for v in model.variables if v.id not in fixed]
    return ConditionalMinimizer(model, free).minimize(fixed)


def zero_energy_assignments(model: QuboModel, tol: float = 1e-9):
    """Every assignment with energy 0, found by full enumeration (small models only)."""
    nv = model.num_variables
    if nv > MAX_FREE_VARIABLES:
        raise BoundsError(f"{nv} variables, enumeration limited to {MAX_FREE_VARIABLES}")
    h, q, offset = model.to_arrays()
    table = _free_table(h, q + q.T, list(range(nv))) + offset
    for code in np.flatnonzero(np.abs(table) <= tol):
        yield [(int(code) >> j) & 1 for j in range(nv)]


def default_workers() -> int:
    value = os.environ.get("QUBONET_THREADS", "0")
    try:
        n = int(value)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)
