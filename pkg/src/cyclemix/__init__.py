"""Mixing times and conductance of Markov chains on cycles with random long-range edges."""
from .chain import (
    ChainParams,
    TransitionMatrix,
    build_homogeneous,
    is_doubly_stochastic,
    is_feasible,
    is_lazy,
    is_reversible,
    reversibilize,
)
from .conductance import (
    ConductanceEstimate,
    CutResult,
    conductance_arc_upper,
    conductance_connected,
    conductance_exact,
    flow,
    phi_of_set,
)
from .lab import SweepConfig, SweepRecord, fit_exponent, run_sweep, summarize, trim_percentiles
from .mixing import (
    MixingResult,
    bound_lower_phi,
    bound_upper_cheeger,
    distance_profile,
    evolve,
    mixing_time,
    rev_vs_nonrev_gap,
    tv_distance,
)
from .topology import (
    Arc,
    LongRangeGraph,
    ReducedGraph,
    WoundGraph,
    degree_cap,
    empty_arcs,
    generate,
    generate_m1,
    generate_m2,
    generate_m3,
    max_long_range_degree,
    reduce_m1,
    reduce_with_splitting,
    wind_up,
)

__version__ = "0.1.0"
