"""Pareto dominance (minimization) and non-dominated filtering."""

from __future__ import annotations

import numpy as np

from ._validation import check_objectives


def dominates(u, v) -> bool:
    """True iff ``u`` is no worse than ``v`` everywhere and strictly better somewhere."""
    u, v = check_objectives(u, v)
    return bool(np.all(u <= v) and np.any(u < v))


def dominance_matrix(points) -> np.ndarray:
    """``D[i, j]`` is True when point ``i`` dominates point ``j``."""
    pts = np.asarray(points, dtype=float)
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    lt = np.any(pts[:, None, :] < pts[None, :, :], axis=2)
    return le & lt


def nondominated_filter(points) -> list[int]:
    """Indices of the points that no other point dominates.

    Duplicates of a non-dominated vector are all kept since equal vectors do
    not dominate each other.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("nondominated_filter needs a non-empty 2-D array of objective vectors")
    dominated = dominance_matrix(pts).any(axis=0)
    return np.flatnonzero(~dominated).tolist()
