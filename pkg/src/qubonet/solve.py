"""Single-flip Metropolis simulated annealing for QUBO models."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Union

import numpy as np

from .constraint_spec import ConstraintSpec
from .errors import CoverageError
from .network import Network, Role
from .qubo import QuboModel, energies

# caps per-chunk random draws at reads * sweeps * variables floats
_DRAW_BUDGET = 1 << 22


@dataclass(frozen=True)
class AnnealParams:
    num_reads: int = 1000
    sweeps: int = 2000
    beta_start: float = 0.1
    beta_end: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not 0 < self.beta_start <= self.beta_end:
            raise ValueError("need 0 < beta_start <= beta_end")

    def betas(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.beta_start])
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)


@dataclass(frozen=True)
class Sample:
    assignment: dict
    energy: float
    read: int


class SampleSet:
    def __init__(self, model: QuboModel, states: np.ndarray, energies_: np.ndarray, params: AnnealParams):
        self.model = model
        self.states = states
        self.energies = energies_
        self.params = params

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        for r in range(len(self)):
            yield self[r]

    def __getitem__(self, r: int) -> Sample:
        return Sample(
            {i: int(b) for i, b in enumerate(self.states[r])}, float(self.energies[r]), r
        )

    @property
    def min_energy(self) -> float:
        return float(self.energies.min())

    def histogram(self) -> dict:
        return dict(sorted(Counter(self.energies.tolist()).items()))

    def same_as(self, other: "SampleSet") -> bool:
        return np.array_equal(self.states, other.states) and np.array_equal(self.energies, other.energies)


def _read_rng(seed: int, read: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, read])


def _anneal_chunk(h, neighbors, weights, betas, seed, reads):
    nv = len(h)
    rngs = [_read_rng(seed, r) for r in reads]
    states = np.stack([rng.integers(0, 2, nv) for rng in rngs]).astype(np.float64)
    block = max(1, min(len(betas), _DRAW_BUDGET // max(1, len(reads) * nv)))
    for start in range(0, len(betas), block):
        stop = min(start + block, len(betas))
        uniforms = np.stack([rng.random((stop - start, nv)) for rng in rngs])
        for t in range(start, stop):
            beta = betas[t]
            u = uniforms[:, t - start, :]
            for i in range(nv):
                local = h[i]
                if len(neighbors[i]):
                    local = local + states[:, neighbors[i]] @ weights[i]
                delta = (1.0 - 2.0 * states[:, i]) * local
                accept = (delta <= 0) | (u[:, i] < np.exp(-beta * np.maximum(delta, 0.0)))
                states[accept, i] = 1.0 - states[accept, i]
    return states.astype(np.int8)


def simulated_anneal(model: QuboModel, params: AnnealParams = AnnealParams(), workers: int = 1) -> SampleSet:
    """Anneal ``params.num_reads`` independent chains and return their final states.

    Read r draws every random number from a generator seeded by
    ``(params.seed, r)``, so results do not depend on ``workers``.
    """
    nv = model.num_variables
    if nv < 1:
        raise ValueError("model has no variables")
    h = np.zeros(nv)
    for i, c in model.linear.items():
        h[i] = c
    adj = model.adjacency()
    neighbors = [np.array(sorted(adj[i]), dtype=np.int64) for i in range(nv)]
    weights = [np.array([adj[i][j] for j in sorted(adj[i])], dtype=np.float64) for i in range(nv)]
    betas = params.betas()

    reads = np.arange(params.num_reads)
    chunk = max(1, -(-params.num_reads // max(1, workers)))
    parts = [reads[i:i + chunk] for i in range(0, len(reads), chunk)]
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda rs: _anneal_chunk(h, neighbors, weights, betas, params.seed, rs), parts))
    else:
        results = [_anneal_chunk(h, neighbors, weights, betas, params.seed, rs) for rs in parts]
    states = np.concatenate(results)
    return SampleSet(model, states, energies(model, states), params)


def _original_ids(source: Union[Network, QuboModel]) -> list[int]:
    if isinstance(source, Network):
        # canonical layout of assemble(): originals take ids 0..n-1
        return list(range(source.n))
    return source.ids_with_role(Role.ORIGINAL)


def decode(assignment, source: Union[Network, QuboModel]) -> tuple:
    """Project an assignment onto the original variables, in index order."""
    ids = _original_ids(source)
    if isinstance(assignment, Mapping):
        missing = [i for i in ids if i not in assignment]
        if missing:
            raise CoverageError(f"assignment misses original variable ids {missing}")
        return tuple(int(assignment[i]) for i in ids)
    bits = np.asarray(assignment)
    if bits.ndim != 1 or (ids and bits.shape[0] <= max(ids)):
        raise CoverageError("assignment does not cover the original variables")
    return tuple(int(bits[i]) for i in ids)


def feasible_rate(samples: SampleSet, spec: ConstraintSpec) -> float:
    ids = _original_ids(samples.model)
    if not len(samples):
        return 0.0
    totals = samples.states[:, ids].sum(axis=1)
    lo, hi = spec.bounds()
    return float(np.mean((totals >= lo) & (totals <= hi)))


def summarize(samples: SampleSet, spec: Optional[ConstraintSpec] = None) -> dict:
    out = {
        "reads": len(samples),
        "min_energy": samples.min_energy,
        "energy_histogram": {_num_key(e): c for e, c in samples.histogram().items()},
        "params": asdict(samples.params),
    }
    if spec is not None:
        out["feasible_rate"] = feasible_rate(samples, spec)
    return out


def _num_key(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(value)
