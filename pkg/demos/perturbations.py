"""
Bounded perturbations do not spoil convergence
==============================================

Before each averaging step the iterate is moved by ``beta_k * v_k`` with
``sum beta_k`` finite and ``||v_k||`` bounded. The runs below use random unit
directions and still end feasible, at limits that differ from the
unperturbed one.
"""

import numpy as np

from stringavg import (
    Geometric,
    PerturbationSchedule,
    PowerLaw,
    SeededRandomUnit,
    Simultaneous,
    SolverConfig,
    Zero,
    generate_random,
    resilience_experiment,
)

problem = generate_random("mixed", n=5, m=10, seed=3)
schedules = [
    PerturbationSchedule(Zero(), SeededRandomUnit(0)),
    PerturbationSchedule(Geometric(1.0, 0.5), SeededRandomUnit(1)),
    PerturbationSchedule(PowerLaw(1.0, 2.0), SeededRandomUnit(2)),
    PerturbationSchedule(Geometric(20.0, 0.9), SeededRandomUnit(3)),
]
report = resilience_experiment(problem, Simultaneous(10), SolverConfig(), np.full(5, 8.0), schedules)
print(report.summary())

# pairwise distances between limits: the zero schedule reproduces the baseline exactly
print(np.round(report.distances, 4))
