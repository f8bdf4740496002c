"""Dynamic string-averaging projection methods for convex feasibility problems."""

from .convex_sets import Ball, Box, ConvexSet, Halfspace, Hyperplane, contains, distance, project
from .dsap import (
    CertificateError,
    Custom,
    FixedSAP,
    IterationTrace,
    PartitionCyclic,
    Problem,
    RandomPartition,
    Sequential,
    Simultaneous,
    SolverConfig,
    Status,
    StrategyError,
    check_bounded_regularity,
    drop_index,
    gamma_for_delta,
    k0_bound,
    make_strategy,
    solve,
)
from .perturbation import (
    DistanceToAnchor,
    FixedVector,
    Geometric,
    Linear,
    PerturbationSchedule,
    PowerLaw,
    SeededRandomUnit,
    SquaredNorm,
    SubgradientObjective,
    Zero,
    perturbed_solve,
    resilience_experiment,
    superiorize,
)
from .problems_io import generate_random, load_problem, read_trace, save_problem, write_trace
from .strings import Amalgamator, StarConstraints, apply_amalgamator, apply_string, phi, validate_star

__version__ = "0.1.0"
