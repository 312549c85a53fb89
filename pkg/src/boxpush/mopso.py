"""Archive-based multi-objective particle swarm optimizer.

The swarm keeps an external repository of non-dominated solutions.  Objective
space is split into hypercubes whose bounds follow the repository; leaders are
drawn by roulette over sparsely populated cubes, and overflow is evicted from
the most crowded one.  A mutation operator whose frequency and range decay with
the generation keeps early iterations exploratory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import (
    check_bounds,
    check_in_range,
    check_positive_int,
    check_random_state,
    evaluate_rows,
)

logger = logging.getLogger(__name__)

#: numerator of the hypercube fitness ``CUBE_FITNESS / occupancy``
CUBE_FITNESS = 10.0


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    objectives: np.ndarray
    pbest_position: np.ndarray
    pbest_objectives: np.ndarray

    @classmethod
    def spawn(cls, position, objectives):
        position = np.array(position, dtype=float)
        objectives = np.array(objectives, dtype=float)
        return cls(
            position=position,
            velocity=np.zeros_like(position),
            objectives=objectives,
            pbest_position=position.copy(),
            pbest_objectives=objectives.copy(),
        )


@dataclass
class Swarm:
    """Whole-swarm state as ``(n, d)`` / ``(n, k)`` arrays; row ``i`` is particle ``i``."""

    position: np.ndarray
    velocity: np.ndarray
    objectives: np.ndarray
    pbest_position: np.ndarray
    pbest_objectives: np.ndarray

    @classmethod
    def spawn(cls, positions, objectives):
        positions = np.array(positions, dtype=float)
        objectives = np.array(objectives, dtype=float)
        return cls(positions, np.zeros_like(positions), objectives, positions.copy(), objectives.copy())

    def __len__(self) -> int:
        return self.position.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i) -> Particle:
        return Particle(
            self.position[i], self.velocity[i], self.objectives[i], self.pbest_position[i], self.pbest_objectives[i]
        )


@dataclass
class Grid:
    """Hypercube partition of objective space fitted to an archive.

    ``cells`` maps a cube index tuple to the archive indices it holds, in
    archive order; ``indices[i]`` is the cube of archive member ``i``.
    """

    lower: np.ndarray
    upper: np.ndarray
    divisions: int
    indices: list[tuple[int, ...]]
    cells: dict[tuple[int, ...], list[int]]
    _roulette: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def occupancy(self) -> dict[tuple[int, ...], int]:
        return {cube: len(members) for cube, members in self.cells.items()}

    def cube_of(self, objectives) -> tuple[int, ...]:
        width = (self.upper - self.lower) / self.divisions
        idx = np.floor((np.asarray(objectives, dtype=float) - self.lower) / width).astype(int)
        idx = np.clip(idx, 0, self.divisions - 1)
        return tuple(int(i) for i in idx)

    def roulette_table(self):
        """Sorted cubes with the cumulative ``CUBE_FITNESS / count`` wheel."""
        if self._roulette is None:
            cubes = sorted(self.cells)
            fitness = np.array([CUBE_FITNESS / len(self.cells[c]) for c in cubes])
            self._roulette = (cubes, np.cumsum(fitness))
        return self._roulette


def _rows_all(cmp, a, v):
    """Row-wise ``all(cmp(a[i], v))``; column loops beat reductions on tiny arrays."""
    mask = cmp(a[:, 0], v[0])
    for j in range(1, v.shape[0]):
        mask &= cmp(a[:, j], v[j])
    return mask


def _cube_codes(objs, divisions):
    """Grid bounds and per-member integer cube coordinates for an ``(n, k)`` array."""
    lower = objs.min(axis=0)
    upper = objs.max(axis=0)
    flat = upper <= lower
    if flat.any():
        lower = lower - 0.5 * flat
        upper = upper + 0.5 * flat
    width = (upper - lower) / divisions
    raw = ((objs - lower) // width).astype(np.int64)
    np.minimum(raw, divisions - 1, out=raw)
    return lower, upper, raw


def build_grid(archive, divisions: int) -> Grid:
    """Fit a ``divisions``-per-objective grid to ``archive`` and locate its members.

    ``archive`` may be an :class:`Archive` or an ``(n, k)`` array of objectives.
    An objective with zero spread gets a unit-wide interval centred on its value.
    """
    divisions = check_positive_int(divisions, "divisions")
    objs = archive.objectives if isinstance(archive, Archive) else np.asarray(archive, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("cannot build a grid over an empty archive")
    lower, upper, raw = _cube_codes(objs, divisions)
    indices = [tuple(row) for row in raw.tolist()]
    cells: dict[tuple[int, ...], list[int]] = {}
    for i, cube in enumerate(indices):
        cells.setdefault(cube, []).append(i)
    return Grid(lower=lower, upper=upper, divisions=divisions, indices=indices, cells=cells)


class Archive:
    """Bounded repository of mutually non-dominated ``(position, objectives)`` pairs.

    ``grid`` always reflects the current members; it is rebuilt on first access
    after a change.
    """

    def __init__(self, capacity: int, divisions: int = 10):
        self.capacity = check_positive_int(capacity, "capacity")
        self.divisions = check_positive_int(divisions, "divisions")
        self.positions: list[np.ndarray] = []
        # objectives live in the first len(self) rows of a buffer sized capacity + 1
        self._objs = np.empty((0, 0))
        self._grid: Grid | None = None
        self._code_weights = None
        self.n_evaluations = 0
        self.n_nonfinite = 0

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def objectives(self) -> np.ndarray:
        return self._objs[: len(self.positions)]

    @property
    def members(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(p, o) for p, o in zip(self.positions, self.objectives)]

    @property
    def grid(self) -> Grid | None:
        if self._grid is None and len(self):
            self._grid = build_grid(self.objectives, self.divisions)
        return self._grid

    def insert(self, position, objectives, rng) -> bool:
        obj = np.asarray(objectives, dtype=float)
        if not np.isfinite(obj).all():
            return False
        n = len(self.positions)
        if n == 0:
            self._objs = np.empty((self.capacity + 1, obj.shape[0]))
        else:
            others = self._objs[:n]
            if np.count_nonzero(_rows_all(np.less_equal, others, obj)):
                # a member that is <= everywhere either dominates or equals the candidate
                return False
            # nobody equals the candidate now, so >= everywhere means dominated by it
            dominated = _rows_all(np.greater_equal, others, obj)
            if np.count_nonzero(dominated):
                keep = np.flatnonzero(~dominated)
                self.positions = [self.positions[i] for i in keep]
                n = keep.shape[0]
                self._objs[:n] = others[keep]
        self.positions.append(np.array(position, dtype=float))
        self._objs[n] = obj
        self._grid = None
        if n + 1 > self.capacity:
            self._evict_crowded(rng)
        return True

    def _evict_crowded(self, rng):
        # base-``divisions`` codes sort like index tuples, so argmax picks the
        # lexicographically first of equally crowded cubes
        n = len(self.positions)
        _, _, raw = _cube_codes(self._objs[:n], self.divisions)
        if self._code_weights is None:
            self._code_weights = self.divisions ** np.arange(raw.shape[1] - 1, -1, -1)
        codes = raw @ self._code_weights
        members = np.flatnonzero(codes == np.bincount(codes).argmax())
        victim = int(members[int(rng.integers(members.shape[0]))])
        del self.positions[victim]
        self._objs[victim : n - 1] = self._objs[victim + 1 : n]
        self._grid = None


def insert_archive(candidate, archive: Archive, rng) -> tuple[Archive, bool]:
    position, objectives = candidate
    accepted = archive.insert(position, objectives, rng)
    return archive, accepted


def select_leader(archive: Archive, grid: Grid, rng) -> np.ndarray:
    """Roulette over occupied cubes (fitness 10/count), then a uniform member of the cube."""
    if len(archive) == 0:
        raise ValueError("cannot select a leader from an empty archive")
    cubes, cumulative = grid.roulette_table()
    spin = rng.random() * cumulative[-1]
    pick = min(int(np.searchsorted(cumulative, spin, side="right")), len(cubes) - 1)
    members = grid.cells[cubes[pick]]
    return archive.positions[members[int(rng.integers(len(members)))]]


def select_leaders(archive: Archive, grid: Grid, n: int, rng) -> np.ndarray:
    """``n`` independent :func:`select_leader` draws as an ``(n, d)`` array."""
    cubes, cumulative = grid.roulette_table()
    picks = np.minimum(np.searchsorted(cumulative, rng.random(n) * cumulative[-1], side="right"), len(cubes) - 1)
    sizes = np.array([len(grid.cells[cubes[c]]) for c in picks])
    offsets = rng.integers(sizes)
    return np.array([archive.positions[grid.cells[cubes[c]][o]] for c, o in zip(picks, offsets)])


def _velocity(v, x, pbest, gbest, w, r1, r2):
    return w * v + r1 * (pbest - x) + r2 * (gbest - x)


def update_velocity(p: Particle, gbest, w: float, rng) -> np.ndarray:
    r1 = rng.random()
    r2 = rng.random()
    return _velocity(p.velocity, p.position, p.pbest_position, np.asarray(gbest), w, r1, r2)


def _clamp_reflect(pos, vel, lower, upper):
    below = pos < lower
    above = pos > upper
    out = below | above
    if out.any():
        pos = np.where(below, lower, np.where(above, upper, pos))
        vel = np.where(out, -vel, vel)
    return pos, vel


def advance_position(p: Particle, lower, upper) -> Particle:
    """Move by the velocity; escaped coordinates are clamped and their velocity reversed."""
    p.position, p.velocity = _clamp_reflect(p.position + p.velocity, p.velocity, lower, upper)
    return p


def _pbest_replace(cur, best, coin):
    """Which rows take the current position as personal best; ``coin`` breaks incomparable pairs."""
    cur_ok = np.all(np.isfinite(cur), axis=-1)
    best_ok = np.all(np.isfinite(best), axis=-1)
    le, ge = cur <= best, cur >= best
    cur_dom = np.all(le, axis=-1) & ~np.all(ge, axis=-1)
    best_dom = np.all(ge, axis=-1) & ~np.all(le, axis=-1)
    incomparable = ~cur_dom & ~best_dom
    return cur_ok & (~best_ok | cur_dom | (incomparable & (coin < 0.5)))


def update_pbest(p: Particle, rng) -> Particle:
    cur, best = p.objectives, p.pbest_objectives
    if not np.isfinite(cur).all():
        return p
    # the coin is only thrown for two finite, mutually non-dominating vectors
    tie = np.isfinite(best).all() and not (cur <= best).all() and not (best <= cur).all()
    if _pbest_replace(cur, best, rng.random() if tie else 1.0):
        p.pbest_position = p.position.copy()
        p.pbest_objectives = cur.copy()
    return p


def mutation_probability(current_gen: int, tot_gen: int, mut_rate: float) -> float:
    """Firing probability ``(1 - current_gen/tot_gen) ** (5/mut_rate)``; also the range fraction."""
    if not 0 <= current_gen <= tot_gen:
        raise ValueError(f"current_gen must lie in [0, {tot_gen}], got {current_gen}")
    check_in_range(mut_rate, "mut_rate", 0.0, 1.0, low_inclusive=False)
    return (1.0 - current_gen / tot_gen) ** (5.0 / mut_rate)


def mutate(p: Particle, current_gen: int, tot_gen: int, mut_rate: float, lower, upper, rng) -> Particle:
    """Re-draw one random coordinate within a window that shrinks with the generation."""
    prob = mutation_probability(current_gen, tot_gen, mut_rate)
    if not rng.random() < prob:
        return p
    dim = int(rng.integers(p.position.shape[0]))
    lo, hi = _mutation_window(p.position[dim], prob, lower[dim], upper[dim])
    pos = p.position.copy()
    pos[dim] = rng.uniform(lo, hi)
    p.position = pos
    return p


def _mutation_window(value, prob, lower, upper):
    mutrange = (upper - lower) * prob
    return np.maximum(value - mutrange, lower), np.minimum(value + mutrange, upper)


def mutate_swarm(positions, current_gen: int, tot_gen: int, mut_rate: float, lower, upper, rng) -> np.ndarray:
    """:func:`mutate` applied to every row of ``positions`` (modified in place and returned)."""
    prob = mutation_probability(current_gen, tot_gen, mut_rate)
    rows = np.flatnonzero(rng.random(positions.shape[0]) < prob)
    if rows.size:
        dims = rng.integers(positions.shape[1], size=rows.size)
        lo, hi = _mutation_window(positions[rows, dims], prob, lower[dims], upper[dims])
        positions[rows, dims] = rng.uniform(lo, hi)
    return positions


@dataclass
class MopsoConfig:
    bounds: Sequence[tuple[float, float]]
    population: int = 50
    iterations: int = 100
    inertia: float = 0.4
    archive_size: int = 100
    grid_divisions: int = 10
    mutation_rate: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        check_bounds(self.bounds)
        check_positive_int(self.population, "population")
        check_positive_int(self.iterations, "iterations")
        check_positive_int(self.archive_size, "archive_size")
        check_positive_int(self.grid_divisions, "grid_divisions")
        check_in_range(self.mutation_rate, "mutation_rate", 0.0, 1.0, low_inclusive=False)
        if not self.inertia >= 0:
            raise ValueError(f"inertia must be >= 0, got {self.inertia!r}")


def run_mopso(
    evaluator: Callable[[np.ndarray], Sequence[float]],
    config: MopsoConfig,
    callback: Callable[[int, Archive, Swarm], None] | None = None,
) -> Archive:
    """Optimize ``evaluator`` over ``config.bounds`` and return the final archive.

    The swarm moves as a whole and is scored through ``evaluator.batch`` when
    the evaluator provides it.  ``callback(iteration, archive, swarm)`` runs
    after each completed iteration.  Non-finite objective vectors never enter
    the archive or a personal best; their count is kept in ``archive.n_nonfinite``.
    """
    rng = check_random_state(config.seed)
    lower, upper = check_bounds(config.bounds)
    n_dim = lower.shape[0]
    archive = Archive(config.archive_size, config.grid_divisions)

    start = lower + rng.random((config.population, n_dim)) * (upper - lower)
    start_objs = evaluate_rows(evaluator, start)
    k = start_objs.shape[1]
    swarm = Swarm.spawn(start, start_objs)
    archive.n_evaluations = config.population
    archive.n_nonfinite += int(np.count_nonzero(~np.all(np.isfinite(start_objs), axis=1)))
    for x, obj in zip(swarm.position, swarm.objectives):
        archive.insert(x, obj, rng)

    n = config.population
    for it in range(config.iterations):
        # with an empty archive each particle follows its own best
        gbest = select_leaders(archive, archive.grid, n, rng) if len(archive) else swarm.pbest_position
        r1 = rng.random((n, 1))
        r2 = rng.random((n, 1))
        velocity = _velocity(swarm.velocity, swarm.position, swarm.pbest_position, gbest, config.inertia, r1, r2)
        swarm.position, swarm.velocity = _clamp_reflect(swarm.position + velocity, velocity, lower, upper)
        mutate_swarm(swarm.position, it, config.iterations, config.mutation_rate, lower, upper, rng)

        swarm.objectives = evaluate_rows(evaluator, swarm.position, k)
        archive.n_evaluations += n
        archive.n_nonfinite += int(np.count_nonzero(~np.all(np.isfinite(swarm.objectives), axis=1)))
        for x, obj in zip(swarm.position, swarm.objectives):
            archive.insert(x, obj, rng)

        take = _pbest_replace(swarm.objectives, swarm.pbest_objectives, rng.random(n))
        swarm.pbest_position[take] = swarm.position[take]
        swarm.pbest_objectives[take] = swarm.objectives[take]
        if callback is not None:
            callback(it, archive, swarm)

    if archive.n_nonfinite:
        logger.debug("%d of %d evaluations were non-finite", archive.n_nonfinite, archive.n_evaluations)
    return archive


class MOPSO(BaseEstimator):
    """Estimator wrapper around :func:`run_mopso`.

    ``fit(objective, bounds)`` runs the swarm and exposes ``archive_``,
    ``pareto_set_`` (positions) and ``pareto_front_`` (objectives).
    """

    def __init__(
        self,
        population=50,
        iterations=100,
        inertia=0.4,
        archive_size=100,
        grid_divisions=10,
        mutation_rate=1.0,
        random_state=None,
    ):
        self.population = population
        self.iterations = iterations
        self.inertia = inertia
        self.archive_size = archive_size
        self.grid_divisions = grid_divisions
        self.mutation_rate = mutation_rate
        self.random_state = random_state

    def fit(self, objective, bounds, callback=None):
        config = MopsoConfig(
            bounds=bounds,
            population=self.population,
            iterations=self.iterations,
            inertia=self.inertia,
            archive_size=self.archive_size,
            grid_divisions=self.grid_divisions,
            mutation_rate=self.mutation_rate,
            seed=self.random_state,
        )
        archive = run_mopso(objective, config, callback=callback)
        self.archive_ = archive
        n_dim = len(config.bounds)
        self.pareto_set_ = np.array(archive.positions, dtype=float).reshape(len(archive), n_dim)
        self.pareto_front_ = np.array(archive.objectives, dtype=float).reshape(len(archive), -1) if len(archive) else np.empty((0, 0))
        self.n_evaluations_ = archive.n_evaluations
        self.n_nonfinite_ = archive.n_nonfinite
        return self
