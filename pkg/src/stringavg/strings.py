"""Index vectors, string operators and amalgamators.

An index vector (a *string*) is a tuple ``t = (t_1, ..., t_p)`` of 1-based
set indices. Its string operator applies the projections onto
``C_{t_1}, ..., C_{t_p}`` in that order. An :class:`Amalgamator` is a fit
family of strings with positive weights summing to one; applying it returns
the weighted average of the string end-points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .convex_sets import ConvexSet, as_point

__all__ = [
    "IndexVector",
    "Amalgamator",
    "StarConstraints",
    "StarReport",
    "StringResult",
    "AmalgamatorResult",
    "check_index_vector",
    "format_string",
    "apply_string",
    "phi",
    "apply_amalgamator",
    "validate_star",
]

IndexVector = tuple  # tuple[int, ...] of 1-based set indices

WEIGHT_SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


def format_string(t) -> str:
    return "(" + ",".join(str(i) for i in t) + ")"


def check_index_vector(t, m: int | None = None) -> tuple:
    """Normalize ``t`` to a tuple of ints and check it against ``m`` sets."""
    try:
        t = tuple(int(i) for i in t)
    except TypeError:
        t = (int(t),)
    if len(t) == 0:
        raise ValueError("index vector must have length >= 1")
    if any(i < 1 for i in t):
        raise ValueError(f"index vector {format_string(t)} has an index below 1")
    if m is not None and any(i > m for i in t):
        raise ValueError(f"index vector {format_string(t)} has an index above m={m}")
    return t


@dataclass(frozen=True, eq=False)
class Amalgamator:
    """A weighted family of strings ``(Omega, w)``.

    ``strings`` keeps the order given; the convex combination is accumulated
    in that order. Weights within ``1e-9`` of summing to one are
    renormalized, anything further off is rejected.
    """

    strings: tuple
    weights: np.ndarray

    def __post_init__(self):
        strings = tuple(check_index_vector(t) for t in self.strings)
        if not strings:
            raise ValueError("an amalgamator needs at least one string")
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.size != len(strings):
            raise ValueError(f"{len(strings)} strings but {w.size} weights")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be finite and strictly positive")
        total = float(np.sum(w))
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "strings", strings)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, strings) -> "Amalgamator":
        strings = list(strings)
        return cls(strings, np.full(len(strings), 1.0 / len(strings)))

    def __len__(self):
        return len(self.strings)

    @property
    def max_length(self) -> int:
        return max(len(t) for t in self.strings)

    def missing_indices(self, m: int) -> list[int]:
        """Set indices in ``1..m`` that no string visits."""
        seen = set()
        for t in self.strings:
            seen.update(t)
        return [i for i in range(1, m + 1) if i not in seen]

    def is_fit(self, m: int) -> bool:
        return not self.missing_indices(m)

    def duplicates(self) -> list[tuple]:
        seen, dup = set(), []
        for t in self.strings:
            if t in seen and t not in dup:
                dup.append(t)
            seen.add(t)
        return dup

    def check(self, m: int) -> None:
        """Raise ``ValueError`` unless the family is fit for ``m`` sets."""
        for t in self.strings:
            if max(t) > m:
                raise ValueError(f"string {format_string(t)} has an index above m={m}")
        missing = self.missing_indices(m)
        if missing:
            raise ValueError(f"amalgamator is not fit: indices {missing} occur in no string")


@dataclass(frozen=True)
class StarConstraints:
    """Bounds defining the admissible class: string length <= qbar, weight >= delta."""

    m: int
    delta: float
    qbar: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not (0.0 < self.delta < 1.0 / self.m):
            raise ValueError(f"Δ must lie in (0, 1/m) = (0, {1.0 / self.m:g}), got {self.delta:g}")
        if int(self.qbar) != self.qbar or self.qbar < self.m:
            raise ValueError(f"q̄ must be an integer >= m={self.m}, got {self.qbar}")


@dataclass
class StarReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok" + "".join(f"; note: {n}" for n in self.notes)
        return "; ".join(self.violations)


class StringResult(NamedTuple):
    endpoint: np.ndarray
    stages: list


class AmalgamatorResult(NamedTuple):
    next: np.ndarray
    string_results: list
    phi_sum: float


def _apply_string(sets, t, x):
    stages = []
    y = x
    for i in t:
        y = sets[i - 1]._project(y)
        stages.append(y)
    return StringResult(y, stages)


def _phi(x, stages):
    d = x - stages[0]
    total = float(d @ d)
    for prev, cur in zip(stages, stages[1:]):
        d = cur - prev
        total += float(d @ d)
    return total


def apply_string(sets: Sequence[ConvexSet], t, x) -> StringResult:
    """Apply the string operator of ``t`` to ``x``.

    Returns the end-point and the list of intermediate points
    ``P_{t_1}x, P_{t_2}P_{t_1}x, ..., endpoint``.
    """
    t = check_index_vector(t, len(sets))
    x = as_point(x, dim=sets[0].dim)
    return _apply_string(sets, t, x)


def phi(t, x, stages) -> float:
    """Sum of squared consecutive displacements along a string.

    ``||x - s_1||^2 + sum_i ||s_{i+1} - s_i||^2`` where ``s_i`` are the
    stages returned by :func:`apply_string`. Each step uses the projection
    onto the *next* set of the string, ``P_{t_{i+1}}``.
    """
    t = check_index_vector(t)
    if len(stages) != len(t):
        raise ValueError(f"got {len(stages)} stages for a string of length {len(t)}")
    x = as_point(x)
    return _phi(x, [as_point(s, dim=x.size, name="stage") for s in stages])


def _apply_amalgamator(sets, amalg, x):
    results = []
    phi_sum = 0.0
    acc = np.zeros_like(x)
    for t, w in zip(amalg.strings, amalg.weights):
        res = _apply_string(sets, t, x)
        results.append(res)
        phi_sum += _phi(x, res.stages)
        acc = acc + w * res.endpoint
    return AmalgamatorResult(acc, results, phi_sum)


def apply_amalgamator(sets: Sequence[ConvexSet], amalg: Amalgamator, x) -> AmalgamatorResult:
    """Weighted average of the string end-points, plus the unweighted phi sum.

    The combination is accumulated sequentially in the listed order of the
    strings, so results are bit-reproducible.
    """
    amalg.check(len(sets))
    x = as_point(x, dim=sets[0].dim)
    return _apply_amalgamator(sets, amalg, x)


def validate_star(amalg: Amalgamator, sc: StarConstraints) -> StarReport:
    """Check ``amalg`` against the admissible class defined by ``sc``.

    Never raises; every violated clause is listed in the report. Duplicate
    strings are allowed but produce a warning and a note.
    """
    violations, notes = [], []
    for t in amalg.strings:
        if max(t) > sc.m:
            violations.append(f"string {format_string(t)} has an index above m={sc.m}")
    missing = amalg.missing_indices(sc.m)
    if missing:
        violations.append(f"not fit: indices {missing} occur in no string")
    total = float(np.sum(amalg.weights))
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        violations.append(f"weights sum to {total!r}, not 1")
    for t, w in zip(amalg.strings, amalg.weights):
        if len(t) > sc.qbar:
            violations.append(f"p({format_string(t)})={len(t)} > q̄={sc.qbar}")
        if w < sc.delta:
            violations.append(f"w({format_string(t)})={w:g} < Δ={sc.delta:g}")
    dup = amalg.duplicates()
    if dup:
        msg = "duplicate strings " + ", ".join(format_string(t) for t in dup)
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    return StarReport(not violations, violations, notes)
