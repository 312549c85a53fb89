"""Input validation helpers shared by the optimizers and the planner."""

from __future__ import annotations

import numbers

import numpy as np


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    ``None`` gives a fresh OS-seeded generator, an int seeds a new one, and an
    existing generator (or any object exposing ``random``/``integers``/``uniform``)
    is passed through so tests can inject scripted streams.
    """
    if seed is None or isinstance(seed, (numbers.Integral, np.integer)):
        return np.random.default_rng(None if seed is None else int(seed))
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if all(hasattr(seed, name) for name in ("random", "integers", "uniform")):
        return seed
    raise ValueError(f"{seed!r} cannot be used to seed a random generator")


def check_bounds(bounds):
    """Validate per-dimension ``(lower, upper)`` pairs, returning two float arrays."""
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError(f"bounds must be a non-empty sequence of (lower, upper) pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("bounds must be finite")
    lower, upper = arr[:, 0].copy(), arr[:, 1].copy()
    bad = np.flatnonzero(lower >= upper)
    if bad.size:
        raise ValueError(f"lower bound must be < upper bound (dimension {int(bad[0])})")
    return lower, upper


def check_objectives(u, v=None):
    """Return ``u`` (and ``v``) as 1-D float arrays of equal length."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"objective vector must be 1-D, got shape {u.shape}")
    if v is None:
        return u
    v = np.asarray(v, dtype=float)
    if v.shape != u.shape:
        raise ValueError(f"objective vectors differ in length: {u.shape[0] if u.ndim else 0} vs {v.shape[0] if v.ndim else 0}")
    return u, v


def check_positive_int(value, name):
    if not isinstance(value, (numbers.Integral, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_in_range(value, name, low, high, low_inclusive=True, high_inclusive=True):
    value = float(value)
    ok_low = value >= low if low_inclusive else value > low
    ok_high = value <= high if high_inclusive else value < high
    if not (ok_low and ok_high):
        lb = "[" if low_inclusive else "("
        rb = "]" if high_inclusive else ")"
        raise ValueError(f"{name} must be in {lb}{low}, {high}{rb}, got {value!r}")
    return value


def evaluate_rows(evaluator, X, n_objectives=None):
    """Objective matrix ``(n, k)`` for the rows of ``X``.

    Uses ``evaluator.batch(X)`` when the evaluator has one, otherwise calls it
    once per row.  Every row must yield the same number of objectives.
    """
    X = np.asarray(X, dtype=float)
    batch = getattr(evaluator, "batch", None)
    if batch is not None:
        F = np.asarray(batch(X), dtype=float)
        if F.ndim != 2 or F.shape[0] != X.shape[0]:
            raise ValueError(f"batch evaluator returned shape {F.shape} for {X.shape[0]} rows")
    else:
        rows = [np.asarray(evaluator(x), dtype=float).ravel() for x in X]
        if len({r.shape[0] for r in rows}) > 1:
            raise ValueError("evaluator returned objective vectors of different lengths")
        F = np.array(rows).reshape(X.shape[0], -1)
    if n_objectives is not None and F.shape[1] != n_objectives:
        raise ValueError(f"evaluator returned {F.shape[1]} objectives, expected {n_objectives}")
    return F
