"""Sparse QUBO formulations of cardinality constraints via decomposition networks."""

from .constraint_spec import (
    ConstraintSpec,
    Kind,
    Tag,
    TargetEntry,
    build_target_sequence,
    feasible_count,
    validate_spec,
)
from .network import (
    EDGES,
    VARIABLES,
    Cost,
    Network,
    Role,
    SubConstraint,
    VarRef,
    build_chain,
    build_clique_network,
    build_divide_and_conquer,
    enumerate_depths,
    select_network,
)
from .qubo import FormulationStats, QuboModel, assemble, energy, expand_sub_constraint, merge, model_stats
from .solve import AnnealParams, SampleSet, decode, feasible_rate, simulated_anneal
from .verify import (
    ExactnessReport,
    brute_force_min,
    check_telescoping,
    check_wiring,
    exhaustive_exactness,
    find_routing,
)

__version__ = "0.1.0"
