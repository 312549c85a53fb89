"""NSGA-II baseline: fast non-dominated sorting, crowding distance, SBX and
polynomial mutation with elitist (mu + lambda) survival."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_bounds, check_in_range, check_positive_int, check_random_state, evaluate_rows
from .dominance import dominance_matrix


@dataclass
class RankedIndividual:
    position: np.ndarray
    objectives: np.ndarray
    rank: int = 0
    crowding: float = 0.0


def fast_nondominated_sort(objectives) -> list[list[int]]:
    """Partition row indices of ``objectives`` into successive Pareto fronts.

    Rows with any non-finite value are infeasible: they go to one extra last
    front after every feasible row.
    """
    objs = np.asarray(objectives, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("fast_nondominated_sort needs a non-empty 2-D array")
    feasible = np.flatnonzero(np.all(np.isfinite(objs), axis=1))
    infeasible = np.flatnonzero(~np.all(np.isfinite(objs), axis=1))
    fronts: list[list[int]] = []
    if feasible.size:
        dom = dominance_matrix(objs[feasible])
        count = dom.sum(axis=0)
        current = np.flatnonzero(count == 0)
        while current.size:
            fronts.append(feasible[current].tolist())
            count = count - dom[current].sum(axis=0)
            count[current] = -1
            current = np.flatnonzero(count == 0)
    if infeasible.size:
        fronts.append(infeasible.tolist())
    return fronts


def crowding_distance(front_objectives) -> np.ndarray:
    """Per-member crowding distance; boundary members of each objective get +inf."""
    objs = np.asarray(front_objectives, dtype=float)
    n = objs.shape[0]
    if n == 0:
        raise ValueError("crowding_distance needs a non-empty front")
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(objs.shape[1]):
        order = np.argsort(objs[:, m], kind="stable")
        col = objs[order, m]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span > 0 and np.isfinite(span):
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def _rank_and_crowd(objs):
    n = objs.shape[0]
    rank = np.empty(n, dtype=int)
    crowd = np.zeros(n)
    for r, front in enumerate(fast_nondominated_sort(objs)):
        rank[front] = r
        sub = objs[front]
        if np.all(np.isfinite(sub)):
            crowd[front] = crowding_distance(sub)
    return rank, crowd


def _tournament(rank, crowd, rng):
    a, b = rng.integers(rank.shape[0], size=2)
    if rank[a] != rank[b]:
        return a if rank[a] < rank[b] else b
    if crowd[a] != crowd[b]:
        return a if crowd[a] > crowd[b] else b
    return a if rng.random() < 0.5 else b


def sbx_crossover(p1, p2, lower, upper, eta, rng):
    """Bounded simulated binary crossover; each variable crosses with probability 0.5."""
    c1, c2 = p1.copy(), p2.copy()
    for i in range(p1.shape[0]):
        if rng.random() > 0.5 or abs(p1[i] - p2[i]) <= 1e-14:
            continue
        y1, y2 = min(p1[i], p2[i]), max(p1[i], p2[i])
        lb, ub = lower[i], upper[i]
        u = rng.random()

        beta = 1.0 + 2.0 * (y1 - lb) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        betaq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        child1 = 0.5 * ((y1 + y2) - betaq * (y2 - y1))

        beta = 1.0 + 2.0 * (ub - y2) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        betaq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        child2 = 0.5 * ((y1 + y2) + betaq * (y2 - y1))

        child1 = min(max(child1, lb), ub)
        child2 = min(max(child2, lb), ub)
        if rng.random() < 0.5:
            child1, child2 = child2, child1
        c1[i], c2[i] = child1, child2
    return c1, c2


def polynomial_mutation(x, lower, upper, eta, prob, rng):
    y = x.copy()
    for i in range(y.shape[0]):
        if rng.random() >= prob:
            continue
        lb, ub = lower[i], upper[i]
        span = ub - lb
        d1 = (y[i] - lb) / span
        d2 = (ub - y[i]) / span
        u = rng.random()
        power = 1.0 / (eta + 1.0)
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            dq = val ** power - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val ** power
        y[i] = min(max(y[i] + dq * span, lb), ub)
    return y


@dataclass
class Nsga2Config:
    bounds: Sequence[tuple[float, float]]
    population: int = 100
    generations: int = 100
    crossover_prob: float = 0.9
    eta_c: float = 20.0
    mutation_prob: float | None = None
    eta_m: float = 20.0
    seed: int | None = None

    def __post_init__(self):
        check_bounds(self.bounds)
        check_positive_int(self.population, "population")
        check_positive_int(self.generations, "generations")
        check_in_range(self.crossover_prob, "crossover_prob", 0.0, 1.0)
        if self.mutation_prob is not None:
            check_in_range(self.mutation_prob, "mutation_prob", 0.0, 1.0)


@dataclass
class Nsga2Result:
    front: list[RankedIndividual]
    population: list[RankedIndividual]
    n_evaluations: int
    n_nonfinite: int


def run_nsga2(evaluator: Callable[[np.ndarray], Sequence[float]], config: Nsga2Config) -> Nsga2Result:
    """Evolve ``config.generations`` generations and return the feasible rank-0 front."""
    rng = check_random_state(config.seed)
    lower, upper = check_bounds(config.bounds)
    n_dim = lower.shape[0]
    n = config.population
    pm = config.mutation_prob if config.mutation_prob is not None else 1.0 / n_dim
    n_nonfinite = 0

    def evaluate(X, k=None):
        nonlocal n_nonfinite
        F = evaluate_rows(evaluator, X, k)
        n_nonfinite += int(np.count_nonzero(~np.all(np.isfinite(F), axis=1)))
        return F

    pos = lower + rng.random((n, n_dim)) * (upper - lower)
    objs = evaluate(pos)
    rank, crowd = _rank_and_crowd(objs)
    n_evals = n

    for _ in range(config.generations):
        children = []
        while len(children) < n:
            a = pos[_tournament(rank, crowd, rng)]
            b = pos[_tournament(rank, crowd, rng)]
            if rng.random() < config.crossover_prob:
                c1, c2 = sbx_crossover(a, b, lower, upper, config.eta_c, rng)
            else:
                c1, c2 = a.copy(), b.copy()
            children.append(polynomial_mutation(c1, lower, upper, config.eta_m, pm, rng))
            if len(children) < n:
                children.append(polynomial_mutation(c2, lower, upper, config.eta_m, pm, rng))
        child_pos = np.array(children)
        child_objs = evaluate(child_pos, objs.shape[1])
        n_evals += n

        merged_pos = np.vstack([pos, child_pos])
        merged_objs = np.vstack([objs, child_objs])
        survivors: list[int] = []
        for front in fast_nondominated_sort(merged_objs):
            if len(survivors) + len(front) <= n:
                survivors.extend(front)
                continue
            sub = merged_objs[front]
            cd = crowding_distance(sub) if np.all(np.isfinite(sub)) else np.zeros(len(front))
            order = np.argsort(-cd, kind="stable")
            survivors.extend(np.asarray(front)[order[: n - len(survivors)]].tolist())
            break
        pos = merged_pos[survivors]
        objs = merged_objs[survivors]
        rank, crowd = _rank_and_crowd(objs)

    population = [RankedIndividual(pos[i].copy(), objs[i].copy(), int(rank[i]), float(crowd[i])) for i in range(n)]
    feasible = np.all(np.isfinite(objs), axis=1)
    front = [ind for ind, ok in zip(population, feasible) if ok and ind.rank == 0]
    return Nsga2Result(front=front, population=population, n_evaluations=n_evals, n_nonfinite=n_nonfinite)


class NSGA2(BaseEstimator):
    """Estimator wrapper around :func:`run_nsga2` with the same ``fit`` surface as MOPSO."""

    def __init__(
        self,
        population=100,
        generations=100,
        crossover_prob=0.9,
        eta_c=20.0,
        mutation_prob=None,
        eta_m=20.0,
        random_state=None,
    ):
        self.population = population
        self.generations = generations
        self.crossover_prob = crossover_prob
        self.eta_c = eta_c
        self.mutation_prob = mutation_prob
        self.eta_m = eta_m
        self.random_state = random_state

    def fit(self, objective, bounds):
        config = Nsga2Config(
            bounds=bounds,
            population=self.population,
            generations=self.generations,
            crossover_prob=self.crossover_prob,
            eta_c=self.eta_c,
            mutation_prob=self.mutation_prob,
            eta_m=self.eta_m,
            seed=self.random_state,
        )
        result = run_nsga2(objective, config)
        n_dim = len(config.bounds)
        self.result_ = result
        self.pareto_set_ = np.array([ind.position for ind in result.front]).reshape(-1, n_dim)
        k = result.population[0].objectives.shape[0]
        self.pareto_front_ = np.array([ind.objectives for ind in result.front]).reshape(-1, k)
        self.n_evaluations_ = result.n_evaluations
        self.n_nonfinite_ = result.n_nonfinite
        return self
