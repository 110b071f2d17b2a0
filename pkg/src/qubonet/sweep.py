"""Formulation-size sweeps over N and over the target K, written as CSV."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .constraint_spec import ConstraintSpec, Kind, validate_spec
from .network import EDGES, Cost, Network, build_clique_network, build_divide_and_conquer, select_network
from .qubo import assemble, model_stats

CSV_HEADER = ["method", "kind", "n", "k", "variables", "edges", "max_degree"]


@dataclass(frozen=True)
class SweepRow:
    method: str
    kind: str
    n: int
    k: int
    n_variables: int
    n_edges: int
    max_degree: int

    def as_list(self) -> list:
        return [self.method, self.kind, self.n, self.k, self.n_variables, self.n_edges, self.max_degree]


def parse_method(text: str) -> tuple[str, Optional[int]]:
    """``clique``/``conventional``, ``full``, ``depth=d`` or ``optimized``."""
    text = text.strip().lower()
    if text in ("clique", "conventional"):
        return "conventional", None
    if text in ("full", "proposed-full"):
        return "proposed-full", None
    if text in ("optimized", "proposed-optimized"):
        return "proposed-optimized", None
    for prefix in ("depth=", "proposed-depth="):
        if text.startswith(prefix):
            depth = int(text[len(prefix):])
            if depth < 0:
                raise ValueError("depth must be >= 0")
            return f"proposed-depth({depth})", depth
    raise ValueError(f"unknown method {text!r}")


def build_network(spec: ConstraintSpec, method: str, cost: Cost = EDGES) -> Network:
    name, depth = parse_method(method)
    if name == "conventional":
        return build_clique_network(spec)
    if name == "proposed-full":
        return build_divide_and_conquer(spec)
    if name == "proposed-optimized":
        return select_network(spec, cost)
    return build_divide_and_conquer(spec, depth)


def spec_for(kind: Kind, n: int, k: Optional[int]) -> ConstraintSpec:
    if kind is Kind.ONE_HOT:
        return ConstraintSpec.one_hot(n)
    if kind is Kind.RANGE:
        raise ValueError("sweeps take a single bound; range constraints are not swept")
    return validate_spec(ConstraintSpec(kind, n, k))


def make_row(method: str, kind: Kind, n: int, k: Optional[int]) -> SweepRow:
    spec = spec_for(kind, n, k)
    net = build_network(spec, method)
    stats = model_stats(net, assemble(net))
    return SweepRow(
        parse_method(method)[0], kind.value, n, spec.k,
        stats.n_variables, stats.n_edges, stats.max_degree,
    )


def _make_row(args):
    return make_row(*args)


def run_rows(jobs: Sequence[tuple], workers: int = 1) -> list[SweepRow]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_make_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [make_row(*job) for job in jobs]


def size_jobs(kind: Kind, ns: Iterable[int], methods: Sequence[str]) -> list[tuple]:
    """Equality-type kinds use K = floor(N/2), the worst case for division."""
    ns = list(ns)
    return [(m, kind, n, None if kind is Kind.ONE_HOT else n // 2) for m in methods for n in ns]


def target_jobs(n: int, methods: Sequence[str], kind: Kind = Kind.EQUALITY) -> list[tuple]:
    return [(m, kind, n, k) for m in methods for k in range(1, n)]


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_list())
    return buf.getvalue()


def parse_range(text: str) -> range:
    """``start:end[:step]`` with inclusive end."""
    parts = [int(p) for p in text.split(":")]
    if len(parts) == 2:
        parts.append(1)
    if len(parts) != 3 or parts[2] < 1:
        raise ValueError(f"bad range {text!r}; expected start:end[:step]")
    start, end, step = parts
    return range(start, end + 1, step)
