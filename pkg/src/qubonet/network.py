"""Decomposition networks: sub-constraints over inputs, auxiliaries and targets.

A network carries the n input wires (the original variables) to the n target
entries through a series of switches. Each switch is a sub-constraint
``sum(lhs) == sum(rhs)``; every intermediate wire segment is a fresh auxiliary
variable produced by one switch and consumed by exactly one other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .constraint_spec import (
    ConstraintSpec,
    Tag,
    TargetEntry,
    build_target_sequence,
    validate_spec,
)
from .errors import BaseCaseError


class Role(enum.Enum):
    ORIGINAL = "x"
    AUXILIARY = "y"
    SLACK = "s"


_ROLE_ORDER = {Role.ORIGINAL: 0, Role.SLACK: 1, Role.AUXILIARY: 2}


@dataclass(frozen=True)
class VarRef:
    role: Role
    index: int

    @property
    def label(self) -> str:
        return f"{self.role.value}{self.index}"

    def sort_key(self):
        return _ROLE_ORDER[self.role], self.index

    def __str__(self):
        return self.label

    def __repr__(self):
        return self.label


def x(i: int) -> VarRef:
    return VarRef(Role.ORIGINAL, i)


def y(i: int) -> VarRef:
    return VarRef(Role.AUXILIARY, i)


def s(i: int) -> VarRef:
    return VarRef(Role.SLACK, i)


# A constant bit (0 or 1) or a variable reference.
Operand = Union[VarRef, int]


def operand_for(entry: TargetEntry) -> Operand:
    if entry.tag is Tag.ZERO:
        return 0
    if entry.tag is Tag.ONE:
        return 1
    return s(entry.slack_id)


def render_operand(op: Operand) -> str:
    return op.label if isinstance(op, VarRef) else str(op)


@dataclass(frozen=True)
class SubConstraint:
    lhs: tuple
    rhs: tuple

    def __post_init__(self):
        if not self.lhs or not self.rhs:
            raise ValueError("sub-constraint sides must be non-empty")
        if any(not isinstance(op, VarRef) for op in self.lhs):
            raise ValueError("constants may only appear on the rhs")

    def variables(self):
        return [op for op in self.lhs + self.rhs if isinstance(op, VarRef)]

    def render(self) -> str:
        left = " + ".join(render_operand(op) for op in self.lhs)
        right = " + ".join(render_operand(op) for op in self.rhs)
        return f"{left} = {right}"

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class Network:
    spec: ConstraintSpec
    targets: tuple
    subs: tuple
    aux_count: int
    depth_label: str = "full"

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def slack_count(self) -> int:
        return sum(1 for t in self.targets if t.tag is Tag.SLACK)

    @property
    def n_variables(self) -> int:
        return self.n + self.slack_count + self.aux_count

    def variables(self) -> list[VarRef]:
        """All variables in canonical id order: originals, slacks, auxiliaries."""
        return (
            [x(i) for i in range(self.n)]
            + [s(i) for i in range(self.slack_count)]
            + [y(i) for i in range(self.aux_count)]
        )

    def same_structure(self, other: "Network") -> bool:
        return self.subs == other.subs and self.aux_count == other.aux_count

    def dump(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "depth": self.depth_label,
            "aux_count": self.aux_count,
            "targets": [str(t) for t in self.targets],
            "subs": [
                {
                    "lhs": [render_operand(op) for op in sub.lhs],
                    "rhs": [render_operand(op) for op in sub.rhs],
                }
                for sub in self.subs
            ],
        }


def build_clique_network(spec: ConstraintSpec) -> Network:
    spec = validate_spec(spec)
    targets = build_target_sequence(spec)
    sub = SubConstraint(
        tuple(x(i) for i in range(spec.n)), tuple(operand_for(t) for t in targets)
    )
    return Network(spec, targets, (sub,), 0, "clique")


def _is_one_hot(targets) -> bool:
    tags = [t.tag for t in targets]
    return tags.count(Tag.ONE) == 1 and tags.count(Tag.ZERO) == len(tags) - 1


def _is_one_cold(targets) -> bool:
    tags = [t.tag for t in targets]
    return tags.count(Tag.ZERO) == 1 and tags.count(Tag.ONE) == len(tags) - 1


def build_chain(wires: Sequence[VarRef], targets: Sequence[TargetEntry], first_aux: int = 0):
    """Chain of ``len(wires) - 1`` switches for a one-hot or one-cold target set.

    Switch j takes the running wire and input j+1 and emits one target constant
    plus a fresh auxiliary; the last switch emits the final two constants,
    with the odd one out (the lone 1, or the lone 0) last.
    Returns ``(subs, new_aux_count)``.
    """
    m = len(wires)
    if m != len(targets) or m < 2:
        raise BaseCaseError(f"chain needs >= 2 wires matching targets, got {m} wires, {len(targets)} targets")
    if _is_one_hot(targets):
        majority, minority = 0, 1
    elif _is_one_cold(targets):
        majority, minority = 1, 0
    else:
        raise BaseCaseError(
            "chain targets must be one-hot or one-cold, got " + ",".join(str(t) for t in targets)
        )
    consts = [majority] * (m - 1) + [minority]
    subs = []
    prev: VarRef = wires[0]
    next_aux = first_aux
    for j in range(1, m - 1):
        out = y(next_aux)
        next_aux += 1
        subs.append(SubConstraint((prev, wires[j]), (consts[j - 1], out)))
        prev = out
    subs.append(SubConstraint((prev, wires[m - 1]), (consts[m - 2], consts[m - 1])))
    return subs, next_aux - first_aux


def split_targets(targets: Sequence[TargetEntry], size1: int):
    """Partition targets into a first group of ``size1`` entries and the rest.

    If the targets admit sums in ``[lo, hi]``, the first group admits
    ``[ceil(lo/2), ceil(hi/2)]`` and the second ``[floor(lo/2), floor(hi/2)]``.
    A layer of cross switches can always deliver ``ceil(T/2)`` of T incoming
    ones to the first group, so every feasible total stays routable.
    """
    zeros = [t for t in targets if t.tag is Tag.ZERO]
    slacks = [t for t in targets if t.tag is Tag.SLACK]
    ones = [t for t in targets if t.tag is Tag.ONE]
    lo, hi = len(ones), len(ones) + len(slacks)
    ones1 = (lo + 1) // 2
    slacks1 = (hi + 1) // 2 - ones1
    zeros1 = size1 - ones1 - slacks1
    first = zeros[:zeros1] + slacks[:slacks1] + ones[:ones1]
    second = zeros[zeros1:] + slacks[slacks1:] + ones[ones1:]
    return first, second


class _Builder:
    def __init__(self, depth_limit: Optional[int]):
        self.depth_limit = depth_limit
        self.subs: list[SubConstraint] = []
        self.aux = 0

    def fresh(self) -> VarRef:
        ref = y(self.aux)
        self.aux += 1
        return ref

    def build(self, wires: list, targets: list, depth: int):
        if self.depth_limit is not None and depth >= self.depth_limit:
            self.subs.append(SubConstraint(tuple(wires), tuple(operand_for(t) for t in targets)))
            return
        if len({t.tag for t in targets}) == 1:
            for w, t in zip(wires, targets):
                self.subs.append(SubConstraint((w,), (operand_for(t),)))
            return
        if _is_one_hot(targets) or _is_one_cold(targets):
            subs, used = build_chain(wires, targets, self.aux)
            self.subs.extend(subs)
            self.aux += used
            return
        m = len(wires)
        size1, size2 = (m + 1) // 2, m // 2
        first, second = split_targets(targets, size1)
        group1 = list(wires[:size1])
        group2 = list(wires[size1:])
        for i in range(size2):
            a, b = self.fresh(), self.fresh()
            self.subs.append(SubConstraint((group1[i], group2[i]), (a, b)))
            group1[i], group2[i] = a, b
        self.build(group1, first, depth + 1)
        self.build(group2, second, depth + 1)


def build_divide_and_conquer(spec: ConstraintSpec, depth_limit: Optional[int] = None) -> Network:
    """Recursive halving network; ``depth_limit=None`` divides fully.

    Recursion stops early at ``depth_limit`` with one dense sub-constraint per
    remaining group, so ``depth_limit=0`` is the clique formulation.
    """
    spec = validate_spec(spec)
    if depth_limit is not None and depth_limit < 0:
        raise ValueError("depth_limit must be >= 0")
    targets = build_target_sequence(spec)
    builder = _Builder(depth_limit)
    builder.build([x(i) for i in range(spec.n)], list(targets), 0)
    label = "full" if depth_limit is None else f"depth={depth_limit}"
    return Network(spec, targets, tuple(builder.subs), builder.aux, label)


def build_one_hot_chain(spec: ConstraintSpec) -> Network:
    """Chain network over all n inputs; spec must be one-hot or one-cold."""
    spec = validate_spec(spec)
    targets = build_target_sequence(spec)
    subs, aux = build_chain([x(i) for i in range(spec.n)], targets)
    return Network(spec, targets, tuple(subs), aux, "chain")


def enumerate_depths(spec: ConstraintSpec) -> list[tuple[int, Network]]:
    """Networks for depth limits 0, 1, ... up to the first one equal to full division."""
    full = build_divide_and_conquer(spec)
    out = []
    depth = 0
    while True:
        net = build_divide_and_conquer(spec, depth)
        out.append((depth, net))
        if net.same_structure(full):
            return out
        depth += 1


@dataclass(frozen=True)
class Cost:
    """Linear formulation cost ``alpha * variables + beta * edges``."""

    alpha: float
    beta: float

    def __call__(self, n_variables: int, n_edges: int) -> float:
        return self.alpha * n_variables + self.beta * n_edges

    @classmethod
    def parse(cls, text: str) -> "Cost":
        text = text.strip().lower()
        if text == "edges":
            return EDGES
        if text == "variables":
            return VARIABLES
        if text.startswith("weighted"):
            # weighted:alpha,beta
            _, _, args = text.partition(":")
            alpha, beta = (float(v) for v in args.split(","))
            return cls(alpha, beta)
        raise ValueError(f"unknown cost {text!r}")


EDGES = Cost(0.0, 1.0)
VARIABLES = Cost(1.0, 0.0)


def select_network(spec: ConstraintSpec, cost: Union[Cost, Callable[[int, int], float]] = EDGES) -> Network:
    """Division depth minimizing ``cost(variables, edges)``; ties go deeper."""
    from .qubo import assemble

    best = None
    best_value = None
    for _, net in enumerate_depths(spec):
        model = assemble(net)
        value = cost(model.num_variables, model.num_edges)
        if best_value is None or value <= best_value:
            best, best_value = net, value
    return best
