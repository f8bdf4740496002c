"""Problem files, random consistent problems and trace CSVs.

Problem files (``.cfp.json``) are JSON, written one set per line::

    {
      "version": 1,
      "dimension": 2,
      "sets": [
        {"type": "halfspace", "a": [1.0, 0.0], "b": 0.0},
        {"type": "ball", "center": [0.0, 0.0], "radius": 1.0}
      ],
      "feasible_point": [0.0, 0.0],
      "metadata": {"name": "example"}
    }

Floats use Python's shortest round-trip representation, so
``dumps_problem(loads_problem(text))`` is byte-stable.

Random problems use numpy's PCG64 bit generator seeded with the integer
seed, never a platform default.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .convex_sets import Ball, Box, Halfspace, Hyperplane
from .dsap import RECORD_FIELDS, IterationRecord, IterationTrace, Problem

__all__ = [
    "FORMAT_VERSION",
    "ProblemFileError",
    "ProblemFormatError",
    "ProblemValidationError",
    "problem_to_dict",
    "problem_from_dict",
    "dumps_problem",
    "loads_problem",
    "load_problem",
    "save_problem",
    "generate_random",
    "write_trace",
    "read_trace",
]

FORMAT_VERSION = 1

_SET_FIELDS = {
    "hyperplane": ("a", "b"),
    "halfspace": ("a", "b"),
    "ball": ("center", "radius"),
    "box": ("lower", "upper"),
}


class ProblemFileError(Exception):
    """Base class for problem-file errors."""


class ProblemFormatError(ProblemFileError):
    """Malformed syntax or missing/mistyped field."""


class ProblemValidationError(ProblemFileError):
    """Well-formed file describing an invalid problem."""


def _set_to_dict(s) -> dict:
    if isinstance(s, (Hyperplane, Halfspace)):
        return {"type": s.kind, "a": s.a.tolist(), "b": s.b}
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Box):
        return {"type": "box", "lower": s.lower.tolist(), "upper": s.upper.tolist()}
    raise TypeError(f"cannot serialize {type(s).__name__}")


def problem_to_dict(problem: Problem, metadata: dict | None = None) -> dict:
    out = {
        "version": FORMAT_VERSION,
        "dimension": problem.dimension,
        "sets": [_set_to_dict(s) for s in problem.sets],
    }
    if problem.known_feasible_point is not None:
        out["feasible_point"] = problem.known_feasible_point.tolist()
    if metadata:
        out["metadata"] = metadata
    return out


def _vector(entry, key, n, where):
    v = entry.get(key)
    if not isinstance(v, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        raise ProblemFormatError(f"{where}: field {key!r} must be a list of numbers")
    if len(v) != n:
        raise ProblemValidationError(f"{where}: field {key!r} has {len(v)} entries, dimension is {n}")
    arr = np.array(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ProblemValidationError(f"{where}: field {key!r} has non-finite entries")
    return arr


def _scalar(entry, key, where):
    v = entry.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ProblemFormatError(f"{where}: field {key!r} must be a number")
    if not math.isfinite(v):
        raise ProblemValidationError(f"{where}: field {key!r} is not finite")
    return float(v)


def _set_from_dict(entry, n, i):
    where = f"set index {i}"
    if not isinstance(entry, dict):
        raise ProblemFormatError(f"{where}: expected an object")
    kind = entry.get("type")
    if kind not in _SET_FIELDS:
        raise ProblemFormatError(f"{where}: unknown set type {kind!r}")
    unknown = set(entry) - {"type", *_SET_FIELDS[kind]}
    if unknown:
        raise ProblemFormatError(f"{where}: unexpected fields {sorted(unknown)}")
    if kind in ("hyperplane", "halfspace"):
        a = _vector(entry, "a", n, where)
        if not np.any(a != 0):
            raise ProblemValidationError(f"{kind} normal is zero at {where}")
        cls = Hyperplane if kind == "hyperplane" else Halfspace
        return cls(a, _scalar(entry, "b", where))
    if kind == "ball":
        c = _vector(entry, "center", n, where)
        r = _scalar(entry, "radius", where)
        if r < 0:
            raise ProblemValidationError(f"ball radius negative at {where}")
        return Ball(c, r)
    lo = _vector(entry, "lower", n, where)
    hi = _vector(entry, "upper", n, where)
    if np.any(lo > hi):
        raise ProblemValidationError(f"box bounds inverted at {where}")
    return Box(lo, hi)


def problem_from_dict(data) -> tuple[Problem, dict]:
    """Validate a decoded problem document. Returns ``(problem, metadata)``."""
    if not isinstance(data, dict):
        raise ProblemFormatError("top level must be an object")
    unknown = set(data) - {"version", "dimension", "sets", "feasible_point", "metadata"}
    if unknown:
        raise ProblemFormatError(f"unexpected top-level fields {sorted(unknown)}")
    if data.get("version") != FORMAT_VERSION:
        raise ProblemFormatError(f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION}")
    n = data.get("dimension")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemFormatError("field 'dimension' must be an integer >= 1")
    sets = data.get("sets")
    if not isinstance(sets, list) or not sets:
        raise ProblemFormatError("field 'sets' must be a non-empty list")
    parsed = [_set_from_dict(e, n, i) for i, e in enumerate(sets)]
    z = None
    if "feasible_point" in data:
        z = _vector(data, "feasible_point", n, "feasible_point")
    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ProblemFormatError("field 'metadata' must be an object")
    try:
        problem = Problem(tuple(parsed), z)
    except ValueError as exc:
        raise ProblemValidationError(str(exc)) from exc
    return problem, metadata


def dumps_problem(problem: Problem, metadata: dict | None = None) -> str:
    """Canonical text form: fixed key order, one set per line."""
    d = problem_to_dict(problem, metadata)
    lines = ["{", f'  "version": {d["version"]},', f'  "dimension": {d["dimension"]},', '  "sets": [']
    body = [json.dumps(s, allow_nan=False) for s in d["sets"]]
    lines += [f"    {s}," for s in body[:-1]] + [f"    {body[-1]}"]
    tail = ["  ]"]
    if "feasible_point" in d:
        tail.append(f'  "feasible_point": {json.dumps(d["feasible_point"])}')
    if "metadata" in d:
        tail.append(f'  "metadata": {json.dumps(d["metadata"], sort_keys=True)}')
    lines.append(",\n".join(tail))
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_problem(text: str) -> tuple[Problem, dict]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return problem_from_dict(data)


def load_problem(path, with_metadata: bool = False):
    """Read and validate a ``.cfp.json`` file.

    Raises ``FileNotFoundError`` for a missing file, :class:`ProblemFormatError`
    for malformed content and :class:`ProblemValidationError` for an invalid
    problem. Messages name the path.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"problem file not found: {path}") from None
    try:
        problem, metadata = loads_problem(text)
    except ProblemFileError as exc:
        raise type(exc)(f"{path}: {exc}") from exc
    return (problem, metadata) if with_metadata else problem


def save_problem(problem: Problem, path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_problem(problem, metadata), encoding="utf-8")


# ---------------------------------------------------------------- generator


def _unit(rng, n):
    g = rng.standard_normal(n)
    return g / np.linalg.norm(g)


def generate_random(kind: str = "mixed", n: int = 2, m: int = 3, seed: int = 0, margin: float = 0.1,
                    anchor_box: float = 2.0) -> Problem:
    """A random consistent problem whose sets all contain ``B(x*, margin)``.

    ``x*`` is uniform in ``[-anchor_box, anchor_box]^n`` and becomes the
    problem's known feasible point. ``kind="halfspaces"`` gives only
    half-spaces; ``"mixed"`` draws half-spaces, balls and boxes with equal
    probability. Each half-space and ball has ``x*`` exactly ``margin``
    from its boundary; boxes extend ``margin`` plus a random slack in
    each coordinate.
    """
    if kind not in ("halfspaces", "mixed"):
        raise ValueError(f"kind must be 'halfspaces' or 'mixed', got {kind!r}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not margin > 0:
        raise ValueError("margin must be > 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    x_star = rng.uniform(-anchor_box, anchor_box, n)
    sets = []
    for _ in range(m):
        shape = "halfspace" if kind == "halfspaces" else ("halfspace", "ball", "box")[rng.integers(3)]
        if shape == "halfspace":
            a = _unit(rng, n)
            sets.append(Halfspace(a, float(a @ x_star) + margin))
        elif shape == "ball":
            offset = rng.uniform(0.0, 2.0)
            center = x_star + offset * _unit(rng, n)
            sets.append(Ball(center, offset + margin))
        else:
            sets.append(Box(x_star - margin - rng.uniform(0, 1, n), x_star + margin + rng.uniform(0, 1, n)))
    return Problem(tuple(sets), x_star)


# ---------------------------------------------------------------- traces


def _fmt(v) -> str:
    return format(v, ".17g")


def write_trace(trace: IterationTrace, path) -> None:
    """Write the recorded scalar columns as CSV with 17 significant digits.

    An empty trace produces a header-only file.
    """
    cols = trace.columns()
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in trace.records:
                w.writerow([str(r.k)] + [_fmt(getattr(r, c)) for c in cols[1:]])
    except OSError as exc:
        raise OSError(f"cannot write trace {os.fspath(path)}: {exc.strerror or exc}") from exc


def read_trace(path) -> IterationTrace:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read trace {os.fspath(path)}: {exc.strerror or exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty trace file (no header)")
    header = rows[0]
    bad = [c for c in header if c not in RECORD_FIELDS]
    if bad or header[:1] != ["k"]:
        raise ValueError(f"{path}: unexpected trace columns {header}")
    trace = IterationTrace()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}")
        values = {"k": int(row[0])}
        values.update({c: float(v) for c, v in zip(header[1:], row[1:])})
        trace.records.append(IterationRecord(**values))
    return trace
