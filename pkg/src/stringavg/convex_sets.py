"""Closed convex sets with exact metric projections.

Four shapes are supported, each with a closed-form projection:

* :class:`Hyperplane`  ``{y : <a, y> = b}``
* :class:`Halfspace`   ``{y : <a, y> <= b}``
* :class:`Ball`        ``{y : ||y - center|| <= radius}``
* :class:`Box`         ``{y : lower <= y <= upper}``

The module level functions :func:`project`, :func:`distance` and
:func:`contains` validate their input; the ``_project`` methods on the set
classes skip validation and are what the iteration engine calls in its
inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConvexSet",
    "Hyperplane",
    "Halfspace",
    "Ball",
    "Box",
    "as_point",
    "project",
    "distance",
    "contains",
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
]

DEFAULT_ABS_TOL = 1e-9
DEFAULT_REL_TOL = 1e-9


def as_point(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Convert ``x`` to a 1-D float64 array, checking finiteness and dimension."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: {name} has {arr.size} coordinates, expected {dim}")
    return arr


def _normal(a, name="a"):
    a = as_point(a, name=name)
    aa = float(a @ a)
    if not aa > 0.0:
        raise ValueError(f"{name} must be a nonzero vector")
    return a, aa


class ConvexSet:
    """Base class of the set catalog."""

    kind = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        return project(self, x)

    def distance(self, x) -> float:
        return distance(self, x)

    def contains(self, x, tol: float | None = None) -> bool:
        return contains(self, x, tol)


@dataclass(frozen=True, eq=False)
class Hyperplane(ConvexSet):
    a: np.ndarray
    b: float
    _aa: float = field(init=False, repr=False)

    kind = "hyperplane"

    def __post_init__(self):
        a, aa = _normal(self.a)
        b = float(self.b)
        if not np.isfinite(b):
            raise ValueError("b must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_aa", aa)

    @property
    def dim(self):
        return self.a.size

    def _project(self, x):
        return x - ((self.a @ x - self.b) / self._aa) * self.a


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    a: np.ndarray
    b: float
    _aa: float = field(init=False, repr=False)

    kind = "halfspace"

    def __post_init__(self):
        a, aa = _normal(self.a)
        b = float(self.b)
        if not np.isfinite(b):
            raise ValueError("b must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_aa", aa)

    @property
    def dim(self):
        return self.a.size

    def _project(self, x):
        excess = self.a @ x - self.b
        if excess <= 0.0:
            return x
        return x - (excess / self._aa) * self.a


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    kind = "ball"

    def __post_init__(self):
        c = as_point(self.center, name="center")
        r = float(self.radius)
        # radius 0 is the singleton {center}
        if not (np.isfinite(r) and r >= 0.0):
            raise ValueError(f"ball radius must be finite and >= 0, got {self.radius}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.size

    def _project(self, x):
        d = x - self.center
        nrm = np.sqrt(d @ d)
        if nrm <= self.radius:
            return x
        return self.center + (self.radius / nrm) * d


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    kind = "box"

    def __post_init__(self):
        lo = as_point(self.lower, name="lower")
        hi = as_point(self.upper, dim=lo.size, name="upper")
        if np.any(lo > hi):
            raise ValueError("box bounds inverted (lower > upper)")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def _project(self, x):
        return np.minimum(np.maximum(x, self.lower), self.upper)


def _check(s: ConvexSet, x) -> np.ndarray:
    if not isinstance(s, ConvexSet):
        raise TypeError(f"expected a ConvexSet, got {type(s).__name__}")
    return as_point(x, dim=s.dim)


def project(s: ConvexSet, x) -> np.ndarray:
    """Metric projection of ``x`` onto ``s``.

    Raises ``ValueError`` on a dimension mismatch or non-finite input.
    """
    x = _check(s, x)
    return np.array(s._project(x), copy=True)


def distance(s: ConvexSet, x) -> float:
    """Euclidean distance from ``x`` to ``s``, computed as ``||x - P(x)||``."""
    x = _check(s, x)
    return float(np.linalg.norm(x - s._project(x)))


def contains(s: ConvexSet, x, tol: float | None = None) -> bool:
    """True iff ``distance(s, x) <= tol``.

    With ``tol=None`` the default ``1e-9 + 1e-9 * ||x||`` is used.
    """
    x = _check(s, x)
    if tol is None:
        tol = DEFAULT_ABS_TOL + DEFAULT_REL_TOL * float(np.linalg.norm(x))
    elif not (np.isfinite(tol) and tol >= 0):
        raise ValueError(f"tol must be finite and >= 0, got {tol}")
    return float(np.linalg.norm(x - s._project(x))) <= tol
