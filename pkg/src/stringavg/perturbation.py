"""Bounded perturbations and superiorization on top of DSAP.

The perturbed iteration is

    x^{k+1} = P_{Omega_k, w_k}(x^k + beta_k v^k)

with summable ``beta_k >= 0`` and bounded ``v^k``. Superiorization takes
``v^k`` to be a normalized negative gradient of an objective, so the
feasibility-seeking iteration drifts toward lower objective values without
losing convergence to the feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .convex_sets import as_point
from .dsap import Problem, SolveResult, SolverConfig, Status, Strategy, _run

__all__ = [
    "partial_sums",
    "Geometric",
    "PowerLaw",
    "Zero",
    "FixedVector",
    "SeededRandomUnit",
    "SubgradientObjective",
    "PerturbationSchedule",
    "SquaredNorm",
    "Linear",
    "DistanceToAnchor",
    "perturbed_solve",
    "superiorize",
    "VariantOutcome",
    "ResilienceReport",
    "resilience_experiment",
]

DIRECTION_SLACK = 1e-12


# ---------------------------------------------------------------- step sizes


@dataclass(frozen=True)
class Geometric:
    """``beta_k = beta0 * ratio**k`` with ``0 < ratio < 1``."""

    beta0: float
    ratio: float

    def __post_init__(self):
        if not (np.isfinite(self.beta0) and self.beta0 >= 0):
            raise ValueError("beta0 must be finite and >= 0")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")

    def __call__(self, k: int) -> float:
        return self.beta0 * self.ratio**k

    @property
    def total(self) -> float:
        return self.beta0 / (1.0 - self.ratio)


@dataclass(frozen=True)
class PowerLaw:
    """``beta_k = beta0 / (k + 1)**exponent``; summable only for ``exponent > 1``."""

    beta0: float
    exponent: float

    def __post_init__(self):
        if not (np.isfinite(self.beta0) and self.beta0 >= 0):
            raise ValueError("beta0 must be finite and >= 0")
        if not self.exponent > 1.0:
            raise ValueError(f"exponent must be > 1 for a summable series, got {self.exponent}")

    def __call__(self, k: int) -> float:
        return self.beta0 / (k + 1) ** self.exponent

    @property
    def total(self) -> float:
        return self.beta0 * float(zeta(self.exponent, 1))


@dataclass(frozen=True)
class Zero:
    def __call__(self, k: int) -> float:
        return 0.0

    total = 0.0


def partial_sums(rule, count: int) -> np.ndarray:
    return np.cumsum([rule(k) for k in range(count)])


# ---------------------------------------------------------------- objectives


@dataclass(frozen=True)
class SquaredNorm:
    """``||x||^2``."""

    def value(self, x):
        return float(x @ x)

    def gradient(self, x):
        return 2.0 * x

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True, eq=False)
class Linear:
    """``<c, x>``."""

    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", as_point(self.c, name="c"))

    def value(self, x):
        return float(self.c @ x)

    def gradient(self, x):
        return self.c.copy()

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True, eq=False)
class DistanceToAnchor:
    """``||x - anchor||^2``."""

    anchor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "anchor", as_point(self.anchor, name="anchor"))

    def value(self, x):
        d = x - self.anchor
        return float(d @ d)

    def gradient(self, x):
        return 2.0 * (x - self.anchor)

    def __call__(self, x):
        return self.value(x)


# ---------------------------------------------------------------- directions


@dataclass(frozen=True, eq=False)
class FixedVector:
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", as_point(self.v, name="v"))

    @property
    def bound(self) -> float:
        return float(np.linalg.norm(self.v))

    def __call__(self, k, x):
        return self.v


@dataclass(frozen=True)
class SeededRandomUnit:
    """Uniform random unit vectors; the draw for step ``k`` uses PCG64 seeded with ``[seed, k]``."""

    seed: int = 0
    bound = 1.0

    def __call__(self, k, x):
        rng = np.random.Generator(np.random.PCG64([self.seed, k]))
        g = rng.standard_normal(x.size)
        nrm = np.linalg.norm(g)
        while nrm == 0.0:
            g = rng.standard_normal(x.size)
            nrm = np.linalg.norm(g)
        return g / nrm


@dataclass(frozen=True)
class SubgradientObjective:
    """``v = -g / max(1, ||g||)`` with ``g`` a (sub)gradient of the objective at ``x``."""

    objective: object
    bound = 1.0

    def __call__(self, k, x):
        g = np.asarray(self.objective.gradient(x), dtype=np.float64)
        if g.shape != x.shape or not np.all(np.isfinite(g)):
            raise ValueError(f"iteration {k + 1}: objective gradient undefined at the current iterate")
        return -g / max(1.0, float(np.linalg.norm(g)))


@dataclass(frozen=True)
class PerturbationSchedule:
    """A summable step rule paired with a bounded direction source."""

    beta: object = field(default_factory=Zero)
    directions: object = field(default_factory=SeededRandomUnit)

    def __post_init__(self):
        if not isinstance(self.beta, (Geometric, PowerLaw, Zero)):
            raise TypeError("beta must be Geometric, PowerLaw or Zero")

    @property
    def v_bound(self) -> float:
        return float(self.directions.bound)

    def _stepper(self):
        bound = self.v_bound + DIRECTION_SLACK

        def step(k, x):
            v = self.directions(k, x)
            if float(np.linalg.norm(v)) > bound:
                raise ValueError(f"iteration {k + 1}: direction norm exceeds bound {self.v_bound:g}")
            return self.beta(k), v

        return step


# ---------------------------------------------------------------- drivers


def _defaults(problem, config, x0):
    config = SolverConfig() if config is None else config
    if x0 is None:
        x0 = np.zeros(problem.dimension)
    return config, x0


def perturbed_solve(
    problem: Problem,
    strategy: Strategy,
    config: SolverConfig | None = None,
    x0=None,
    schedule: PerturbationSchedule | None = None,
    objective=None,
) -> SolveResult:
    """DSAP with the perturbation ``beta_k v^k`` added before each amalgamator step.

    The trace also carries ``beta_k``, ``||v^k||`` and the running sum of
    ``beta``. With the ``Zero`` rule the iterates are bitwise those of
    :func:`~stringavg.dsap.solve`. Fejér margins are measured from the
    perturbed point ``x^k + beta_k v^k``, to which the amalgamator is applied.
    """
    config, x0 = _defaults(problem, config, x0)
    schedule = PerturbationSchedule() if schedule is None else schedule
    return _run(problem, strategy, config, x0, perturb=schedule._stepper(), objective=objective)


def superiorize(
    problem: Problem,
    strategy: Strategy,
    config: SolverConfig | None = None,
    x0=None,
    objective=None,
    beta_rule=None,
) -> SolveResult:
    """Perturbed DSAP steered by normalized negative gradients of ``objective``.

    The trace records the objective at every iterate (``initial_objective``
    for the start). No descent is guaranteed, only feasibility of the limit.
    """
    objective = SquaredNorm() if objective is None else objective
    beta_rule = Geometric(1.0, 0.5) if beta_rule is None else beta_rule
    schedule = PerturbationSchedule(beta_rule, SubgradientObjective(objective))
    return perturbed_solve(problem, strategy, config, x0, schedule, objective=objective)


@dataclass
class VariantOutcome:
    label: str
    status: Status
    iterations: int
    final_proximity: float
    beta_total: float
    resilient: bool
    limit: np.ndarray = field(repr=False)


@dataclass
class ResilienceReport:
    """Unperturbed baseline plus one outcome per perturbation schedule.

    ``distances[i, j]`` is the distance between the limits of outcomes
    ``i`` and ``j`` (index 0 is the baseline). Different limits are
    expected and not a failure.
    """

    baseline: VariantOutcome
    variants: list
    distances: np.ndarray
    proximity_tol: float
    note: str = (
        "feasibility of each perturbed limit is witnessed for this x0 only; "
        "convergence of the unperturbed iteration from every start is assumed, not verified"
    )

    @property
    def all_resilient(self) -> bool:
        return all(v.resilient for v in self.variants)

    def summary(self) -> str:
        lines = [f"{'variant':<32} {'status':<15} {'iters':>6} {'proximity':>12} {'sum beta':>10}"]
        for v in [self.baseline, *self.variants]:
            flag = "" if v.resilient else "  FAILED"
            lines.append(
                f"{v.label:<32} {v.status.value:<15} {v.iterations:>6} "
                f"{v.final_proximity:>12.3e} {v.beta_total:>10.4g}{flag}"
            )
        lines.append(f"note: {self.note}")
        return "\n".join(lines)


def _outcome(label, res, tol, beta_total):
    prox = res.trace.final_proximity
    return VariantOutcome(label, res.status, len(res.trace), prox, beta_total, prox <= tol, res.result)


def resilience_experiment(problem, strategy, config=None, x0=None, schedules=()) -> ResilienceReport:
    """Compare an unperturbed run with perturbed runs under each schedule.

    A variant counts as resilient when its final proximity is within
    ``config.proximity_tol``.
    """
    config, x0 = _defaults(problem, config, x0)
    tol = config.proximity_tol
    base = _outcome("unperturbed", _run(problem, strategy, config, x0), tol, 0.0)
    variants = []
    for i, sched in enumerate(schedules):
        res = perturbed_solve(problem, strategy, config, x0, sched)
        total = res.trace.records[-1].beta_sum if res.trace.records else 0.0
        label = f"{i}: {type(sched.beta).__name__}/{type(sched.directions).__name__}"
        variants.append(_outcome(label, res, tol, total))
    limits = [base.limit] + [v.limit for v in variants]
    dist = np.array([[float(np.linalg.norm(a - b)) for b in limits] for a in limits])
    return ResilienceReport(base, variants, dist, tol)
