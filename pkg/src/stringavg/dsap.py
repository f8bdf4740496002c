"""Dynamic string-averaging projection (DSAP) iteration.

Each iteration picks an amalgamator ``(Omega_k, w_k)`` from a
:class:`Strategy` and maps ``x^k`` to the weighted average of the string
end-points. The admissible class is fixed by a :class:`StarConstraints`
(string lengths at most ``qbar``, weights at least ``delta``) and every
emitted amalgamator is checked against it.

When the problem carries a known feasible point ``z`` the solver records a
Fejér certificate per iteration,

    ||z - x^{k-1}||^2 - ||z - x^k||^2 - delta * phi_sum_k  >=  0,

which is the quantity the convergence argument rests on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .convex_sets import DEFAULT_ABS_TOL, ConvexSet, as_point
from .strings import (
    Amalgamator,
    StarConstraints,
    StarReport,
    _apply_amalgamator,
    validate_star,
)

__all__ = [
    "Problem",
    "Strategy",
    "Sequential",
    "Simultaneous",
    "PartitionCyclic",
    "RandomPartition",
    "FixedSAP",
    "Custom",
    "make_strategy",
    "STRATEGY_NAMES",
    "SolverConfig",
    "Status",
    "IterationRecord",
    "IterationTrace",
    "SolveResult",
    "StrategyError",
    "CertificateError",
    "solve",
    "proximity",
    "k0_bound",
    "gamma_for_delta",
    "drop_index",
    "distance_to_intersection",
    "RegularityReport",
    "check_bounded_regularity",
]

DELTA_SLACK = 1e-9
CERTIFICATE_SLACK = 1e-9


class StrategyError(ValueError):
    """A strategy emitted an amalgamator outside the admissible class."""

    def __init__(self, k: int, report: StarReport):
        self.k = k
        self.report = report
        super().__init__(f"iteration {k}: inadmissible amalgamator: {report}")


class CertificateError(RuntimeError):
    """A Fejér certificate failed beyond floating-point slack."""


@dataclass(frozen=True, eq=False)
class Problem:
    """A consistent convex feasibility problem ``find x in C_1 ∩ ... ∩ C_m``."""

    sets: tuple
    known_feasible_point: np.ndarray | None = None

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets:
            raise ValueError("a problem needs at least one set")
        for i, s in enumerate(sets):
            if not isinstance(s, ConvexSet):
                raise TypeError(f"set {i} is not a ConvexSet")
        n = sets[0].dim
        for i, s in enumerate(sets):
            if s.dim != n:
                raise ValueError(f"set {i} has dimension {s.dim}, expected {n}")
        object.__setattr__(self, "sets", sets)
        z = self.known_feasible_point
        if z is not None:
            z = as_point(z, dim=n, name="known_feasible_point")
            for i, s in enumerate(sets):
                d = float(np.linalg.norm(z - s._project(z)))
                if d > DEFAULT_ABS_TOL:
                    raise ValueError(f"known_feasible_point is at distance {d:g} from set {i}")
            z.setflags(write=False)
            object.__setattr__(self, "known_feasible_point", z)

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def dimension(self) -> int:
        return self.sets[0].dim


def proximity(sets: Sequence[ConvexSet], x: np.ndarray) -> float:
    """``max_i d(x, C_i)``."""
    worst = 0.0
    for s in sets:
        d = x - s._project(x)
        worst = max(worst, float(d @ d))
    return math.sqrt(worst)


# ---------------------------------------------------------------- strategies


class Strategy:
    """Source of the amalgamator sequence.

    Subclasses implement ``_emit(k)`` for the 0-based iteration index ``k``
    and report ``max_strings``/``max_length`` over everything they can emit.
    Without an explicit ``star`` the strategy uses the largest admissible
    ``delta``, ``min(1/max_strings, 1/m) - 1e-9``, and ``qbar = max(m, max_length)``.
    """

    name = "strategy"

    def __init__(self, m: int, star: StarConstraints | None = None):
        if int(m) != m or m < 1:
            raise ValueError(f"m must be a positive integer, got {m}")
        self.m = int(m)
        if star is None:
            star = self.default_star()
        elif star.m != self.m:
            raise ValueError(f"star constraints are for m={star.m}, strategy has m={self.m}")
        elif star.delta > self.max_delta:
            raise ValueError(
                f"Δ={star.delta:g} exceeds the smallest weight this strategy emits "
                f"(admissible Δ <= {self.max_delta:g})"
            )
        self.star = star

    @property
    def max_strings(self) -> int:
        raise NotImplementedError

    @property
    def max_length(self) -> int:
        raise NotImplementedError

    @property
    def min_weight(self) -> float:
        return 1.0 / self.max_strings

    @property
    def max_delta(self) -> float:
        return min(self.min_weight, 1.0 / self.m) - DELTA_SLACK

    def default_star(self) -> StarConstraints:
        return StarConstraints(self.m, self.max_delta, max(self.m, self.max_length))

    def amalgamator(self, k: int) -> Amalgamator:
        return self._emit(k)

    def _emit(self, k: int) -> Amalgamator:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, star={self.star})"


def _blocks(order, count):
    return [tuple(int(i) for i in b) for b in np.array_split(np.asarray(order), count)]


class Sequential(Strategy):
    """One string ``(1, 2, ..., m)`` with weight 1 (cyclic projections)."""

    name = "sequential"

    def __init__(self, m, star=None):
        self._amalg = Amalgamator((tuple(range(1, int(m) + 1)),), np.ones(1))
        super().__init__(m, star)

    max_strings = property(lambda self: 1)
    max_length = property(lambda self: self.m)

    def _emit(self, k):
        return self._amalg


class Simultaneous(Strategy):
    """``m`` singleton strings with equal weights ``1/m``."""

    name = "simultaneous"

    def __init__(self, m, star=None):
        self._amalg = Amalgamator.uniform([(i,) for i in range(1, int(m) + 1)])
        super().__init__(m, star)

    max_strings = property(lambda self: self.m)
    max_length = property(lambda self: 1)

    def _emit(self, k):
        return self._amalg


class PartitionCyclic(Strategy):
    """Contiguous blocks of a rotating ordering of ``1..m``.

    At iteration ``k`` the ordering ``1..m`` is rotated left by ``k mod m``
    and cut into ``blocks`` near-equal strings with equal weights.
    """

    name = "partition-cyclic"

    def __init__(self, m, blocks=2, star=None):
        blocks = int(blocks)
        if not 1 <= blocks <= m:
            raise ValueError(f"blocks must lie in [1, m={m}], got {blocks}")
        self.blocks = blocks
        super().__init__(m, star)

    max_strings = property(lambda self: self.blocks)
    max_length = property(lambda self: -(-self.m // self.blocks))

    def _emit(self, k):
        order = np.roll(np.arange(1, self.m + 1), -(k % self.m))
        return Amalgamator.uniform(_blocks(order, self.blocks))


class RandomPartition(Strategy):
    """Seeded random shuffle of ``1..m`` cut into equal-weight strings.

    The generator for iteration ``k`` is PCG64 seeded with ``[seed, k]``, so
    emission depends only on ``(seed, k)``. With ``blocks=None`` the number
    of strings is itself drawn uniformly from ``1..m`` each iteration.
    """

    name = "random-partition"

    def __init__(self, m, seed=0, blocks=None, star=None):
        if blocks is not None and not 1 <= int(blocks) <= m:
            raise ValueError(f"blocks must lie in [1, m={m}], got {blocks}")
        self.seed = int(seed)
        self.blocks = None if blocks is None else int(blocks)
        super().__init__(m, star)

    max_strings = property(lambda self: self.m if self.blocks is None else self.blocks)
    max_length = property(lambda self: self.m if self.blocks is None else -(-self.m // self.blocks))

    def _emit(self, k):
        rng = np.random.Generator(np.random.PCG64([self.seed, k]))
        order = rng.permutation(np.arange(1, self.m + 1))
        count = self.blocks if self.blocks is not None else int(rng.integers(1, self.m + 1))
        return Amalgamator.uniform(_blocks(order, count))


class FixedSAP(Strategy):
    """The same amalgamator at every iteration (classic string averaging)."""

    name = "fixed"

    def __init__(self, m, amalgamator: Amalgamator, star=None):
        amalgamator.check(m)
        self._amalg = amalgamator
        super().__init__(m, star)

    max_strings = property(lambda self: len(self._amalg))
    max_length = property(lambda self: self._amalg.max_length)
    min_weight = property(lambda self: float(np.min(self._amalg.weights)))

    def _emit(self, k):
        return self._amalg


class Custom(Strategy):
    """A user-supplied amalgamator sequence, repeated cyclically."""

    name = "custom"

    def __init__(self, m, sequence: Sequence[Amalgamator], star=None):
        self._seq = tuple(sequence)
        if not self._seq:
            raise ValueError("custom strategy needs at least one amalgamator")
        super().__init__(m, star)

    max_strings = property(lambda self: max(len(a) for a in self._seq))
    max_length = property(lambda self: max(a.max_length for a in self._seq))
    min_weight = property(lambda self: min(float(np.min(a.weights)) for a in self._seq))

    def _emit(self, k):
        return self._seq[k % len(self._seq)]


STRATEGY_NAMES = ("sequential", "simultaneous", "partition-cyclic", "random-partition")


def make_strategy(name: str, m: int, *, blocks=None, seed=0, star=None) -> Strategy:
    """Build one of the generated strategies by name."""
    if name == "sequential":
        return Sequential(m, star)
    if name == "simultaneous":
        return Simultaneous(m, star)
    if name == "partition-cyclic":
        return PartitionCyclic(m, min(2, m) if blocks is None else blocks, star)
    if name == "random-partition":
        return RandomPartition(m, seed, blocks, star)
    raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGY_NAMES)}")


# ---------------------------------------------------------------- solver


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and diagnostics.

    ``gamma`` is the threshold for the drop index recorded in the trace (the
    first iteration whose phi sum is at most ``gamma``). Iterate snapshots
    are kept only while ``n * max_iterations <= snapshot_budget``.
    """

    proximity_tol: float = 1e-6
    max_iterations: int = 10000
    gamma: float = 1e-10
    certificate_checks: bool = True
    snapshot_budget: int = 10**6

    def __post_init__(self):
        if not self.proximity_tol > 0:
            raise ValueError("proximity_tol must be > 0")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be an integer >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")


@dataclass
class IterationRecord:
    k: int
    proximity: float
    phi_sum: float
    step_norm: float
    fejer_margin: float | None = None
    beta_k: float | None = None
    v_norm: float | None = None
    beta_sum: float | None = None
    objective_value: float | None = None


RECORD_FIELDS = tuple(IterationRecord.__dataclass_fields__)


@dataclass
class IterationTrace:
    """Per-iteration records for ``k = 1, 2, ...``.

    Values at the starting point live in ``initial_proximity`` and
    ``initial_objective``. ``iterates`` holds ``x^0, x^1, ...`` when the
    snapshot budget allows, else ``None``.
    """

    records: list = field(default_factory=list)
    initial_proximity: float | None = None
    initial_objective: float | None = None
    delta: float | None = None
    gamma: float | None = None
    drop_index: int | None = None
    iterates: list | None = None

    def __len__(self):
        return len(self.records)

    @property
    def final_proximity(self) -> float | None:
        return self.records[-1].proximity if self.records else self.initial_proximity

    def column(self, name: str) -> np.ndarray:
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records],
            dtype=np.float64,
        )

    def columns(self) -> list[str]:
        """Names of the columns that carry data in this trace."""
        base = ["k", "proximity", "phi_sum", "step_norm"]
        extra = [
            name
            for name in RECORD_FIELDS[4:]
            if self.records and getattr(self.records[0], name) is not None
        ]
        return base + extra


class SolveResult(NamedTuple):
    result: np.ndarray
    status: Status
    trace: IterationTrace


def _run(problem, strategy, config, x0, perturb=None, objective=None) -> SolveResult:
    sets = problem.sets
    x = as_point(x0, dim=problem.dimension, name="x0")
    if strategy.m != problem.m:
        raise ValueError(f"strategy is for m={strategy.m} sets, problem has {problem.m}")
    star = strategy.star
    z = problem.known_feasible_point
    tol = config.proximity_tol
    keep = problem.dimension * config.max_iterations <= config.snapshot_budget

    prox = proximity(sets, x)
    trace = IterationTrace(initial_proximity=prox, delta=star.delta, gamma=config.gamma)
    if objective is not None:
        trace.initial_objective = float(objective(x))
    if keep:
        trace.iterates = [x]
    if z is not None:
        d0 = z - x
        scale0 = float(d0 @ d0)

    beta_sum = 0.0
    status = Status.CONVERGED if prox <= tol else Status.MAX_ITERATIONS
    k = 0
    while status is not Status.CONVERGED and k < config.max_iterations:
        k += 1
        amalg = strategy.amalgamator(k - 1)
        report = validate_star(amalg, star)
        if not report.ok:
            raise StrategyError(k, report)

        y = x
        beta = v_norm = None
        if perturb is not None:
            beta, v = perturb(k - 1, x)
            v_norm = float(np.linalg.norm(v))
            beta_sum += beta
            if beta != 0.0:
                y = x + beta * v

        x_new, _, phi_sum = _apply_amalgamator(sets, amalg, y)
        dx = x_new - x
        step = math.sqrt(float(dx @ dx))

        margin = None
        if z is not None:
            dy = z - y
            dn = z - x_new
            before = float(dy @ dy)
            margin = before - float(dn @ dn) - star.delta * phi_sum
            bound = -CERTIFICATE_SLACK * (1.0 + max(scale0, before))
            if config.certificate_checks and margin < bound:
                raise CertificateError(
                    f"iteration {k}: Fejér margin {margin:.3e} below {bound:.3e}"
                )

        x = x_new
        prox = proximity(sets, x)
        if trace.drop_index is None and phi_sum <= config.gamma:
            trace.drop_index = k
        trace.records.append(
            IterationRecord(
                k=k,
                proximity=prox,
                phi_sum=phi_sum,
                step_norm=step,
                fejer_margin=margin,
                beta_k=None if perturb is None else float(beta),
                v_norm=v_norm,
                beta_sum=None if perturb is None else beta_sum,
                objective_value=None if objective is None else float(objective(x)),
            )
        )
        if keep:
            trace.iterates.append(x)
        if prox <= tol:
            status = Status.CONVERGED
    return SolveResult(x, status, trace)


def solve(problem: Problem, strategy: Strategy, config: SolverConfig | None = None, x0=None) -> SolveResult:
    """Run the DSAP iteration from ``x0`` until ``max_i d(x, C_i) <= proximity_tol``.

    Parameters
    ----------
    problem : Problem
    strategy : Strategy
        Supplies ``(Omega_k, w_k)``; each is validated before use and an
        inadmissible one raises :class:`StrategyError`.
    config : SolverConfig, optional
    x0 : array_like, optional
        Starting point, the origin by default.

    Returns
    -------
    SolveResult
        ``(result, status, trace)``. ``status`` is ``Status.CONVERGED`` only
        if the final proximity is within tolerance; an inconsistent problem
        ends in ``Status.MAX_ITERATIONS``.
    """
    config = SolverConfig() if config is None else config
    if x0 is None:
        x0 = np.zeros(problem.dimension)
    return _run(problem, strategy, config, x0)


# ---------------------------------------------------------------- bounds


def k0_bound(M: float, M0: float, delta_weights: float, gamma: float) -> int:
    """Smallest integer strictly greater than ``(M + M0)^2 / (gamma * delta)``.

    Within that many iterations some phi sum must drop to ``gamma`` or below.
    Arguments are read as their shortest decimal representation and the
    bound is evaluated in exact rational arithmetic, so ``0.01 * 0.1`` is
    exactly ``0.001`` here.
    """
    vals = []
    for name, val in (("M", M), ("M0", M0), ("delta_weights", delta_weights), ("gamma", gamma)):
        if not (np.isfinite(val) and val > 0):
            raise ValueError(f"{name} must be finite and > 0, got {val}")
        vals.append(Fraction(repr(float(val))))
    m, m0, dw, g = vals
    return math.floor((m + m0) ** 2 / (g * dw)) + 1


def gamma_for_delta(qbar: int, delta_reg: float) -> float:
    """Largest ``gamma`` with ``qbar * sqrt(gamma) <= delta_reg``."""
    if int(qbar) != qbar or qbar < 1:
        raise ValueError(f"qbar must be an integer >= 1, got {qbar}")
    if not (np.isfinite(delta_reg) and delta_reg > 0):
        raise ValueError(f"delta must be finite and > 0, got {delta_reg}")
    gamma = (delta_reg / qbar) ** 2
    # guard against rounding pushing qbar*sqrt(gamma) above delta
    while qbar * math.sqrt(gamma) > delta_reg:
        gamma = math.nextafter(gamma, 0.0)
    return gamma


def drop_index(problem: Problem, strategy: Strategy, x0, gamma: float, limit: int) -> int | None:
    """First ``k >= 1`` whose phi sum (at ``x^{k-1}``) is at most ``gamma``.

    Runs the unperturbed iteration with no proximity stopping, for at most
    ``limit`` iterations. Returns ``None`` if no such ``k`` was found.
    """
    sets = problem.sets
    x = as_point(x0, dim=problem.dimension, name="x0")
    for k in range(1, limit + 1):
        x, _, phi_sum = _apply_amalgamator(sets, strategy.amalgamator(k - 1), x)
        if phi_sum <= gamma:
            return k
    return None


# ---------------------------------------------------------------- bounded regularity


def distance_to_intersection(sets: Sequence[ConvexSet], x, tol: float = 1e-12, max_sweeps: int = 100000):
    """Projection of ``x`` onto ``∩ C_i`` by Dykstra's algorithm.

    Returns ``(distance, point)``.
    """
    x = as_point(x, dim=sets[0].dim)
    y = x
    increments = [np.zeros_like(x) for _ in sets]
    for _ in range(max_sweeps):
        y_old = y
        change = 0.0
        for i, s in enumerate(sets):
            u = y + increments[i]
            p = s._project(u)
            new_inc = u - p
            change += float(np.sum((new_inc - increments[i]) ** 2))
            increments[i] = new_inc
            y = p
        change += float(np.sum((y - y_old) ** 2))
        if change <= tol**2:
            break
    return float(np.linalg.norm(x - y)), y


@dataclass
class RegularityReport:
    """Outcome of a bounded-regularity falsification probe.

    This only searches for counterexamples; a clean report is not a proof.
    """

    radius: float
    delta: float
    epsilon: float
    candidates: int
    accepted: int
    max_distance: float | None
    exceeded: bool
    message: str


def check_bounded_regularity(
    problem: Problem,
    M: float,
    delta: float,
    epsilon: float,
    samples: int = 200,
    seed: int = 0,
    distance_to_C: Callable | None = None,
) -> RegularityReport:
    """Probe whether ``d(x, C_i) <= delta`` for all ``i`` forces ``d(x, C) <= epsilon`` on ``B(0, M)``.

    Candidates come from three sources: uniform points in the ball, the
    cyclic-projection trajectories started there (these approach every set
    at once, the interesting regime), and Gaussian jitter of scale ``delta``
    around the trajectory points. Those inside the ball that meet the
    premise are kept; ``d(x, C)`` is evaluated with ``distance_to_C`` or, by
    default, Dykstra's algorithm.
    """
    if int(samples) != samples or samples < 1:
        raise ValueError("samples must be an integer >= 1")
    sets = problem.sets
    n = problem.dimension
    if distance_to_C is None:
        distance_to_C = lambda x: distance_to_intersection(sets, x)[0]  # noqa: E731
    rng = np.random.Generator(np.random.PCG64(seed))

    def in_ball(size):
        g = rng.standard_normal((size, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = M * rng.random(size) ** (1.0 / n)
        return g * r[:, None]

    starts = in_ball(samples)
    candidates = list(starts)
    for x in starts:
        y = x
        for _ in range(20):
            for s in sets:
                y = s._project(y)
            candidates.append(y)
            candidates.append(y + delta * rng.standard_normal(n))

    accepted = []
    for x in candidates:
        if float(np.linalg.norm(x)) > M:
            continue
        if all(float(np.linalg.norm(x - s._project(x))) <= delta for s in sets):
            accepted.append(x)
        if len(accepted) >= samples:
            break

    if not accepted:
        return RegularityReport(M, delta, epsilon, len(candidates), 0, None, False, "premise never met")
    worst = max(float(distance_to_C(x)) for x in accepted)
    exceeded = worst > epsilon
    msg = (
        f"counterexample: d(x, C) = {worst:.3e} > ε = {epsilon:g}"
        if exceeded
        else f"no counterexample among {len(accepted)} points (max d(x, C) = {worst:.3e})"
    )
    return RegularityReport(M, delta, epsilon, len(candidates), len(accepted), worst, exceeded, msg)
