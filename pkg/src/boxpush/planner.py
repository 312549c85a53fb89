"""Step-by-step local planner: optimize one move, commit it, repeat until the goal."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .box_model import (
    BoxState,
    DecisionVector,
    ObjectiveBreakdown,
    StepProblem,
    WorldMap,
    evaluate,
    remaining_distance,
    simulate,
)
from .mopso import MOPSO
from .nsga2 import NSGA2

logger = logging.getLogger(__name__)

GOAL_REACHED = "goal-reached"
STEP_LIMIT = "step-limit"
STALLED = "stalled"

#: swarm/population size and iteration count shared by both optimizers so
#: their evaluation budgets match (5200 evaluations per step)
DEFAULT_POPULATION = 200
DEFAULT_ITERATIONS = 25


class StalledStep(RuntimeError):
    """The optimizer produced no feasible move from the current state."""


@dataclass
class StepRecord:
    step: int
    decision: DecisionVector
    breakdown: ObjectiveBreakdown
    pre: BoxState
    post: BoxState
    archive_size: int
    seed: int
    wall_clock: float = field(default=0.0, compare=False)


@dataclass
class RunReport:
    steps: list[StepRecord]
    termination: str
    seed: int
    algorithm: str
    start: BoxState
    goal: tuple[float, float]

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def total_energy(self) -> float:
        return math.fsum(s.breakdown.f2 for s in self.steps)

    @property
    def total_time(self) -> float:
        return math.fsum(s.breakdown.f1 for s in self.steps)

    @property
    def final_state(self) -> BoxState:
        return self.steps[-1].post if self.steps else self.start

    @property
    def final_distance(self) -> float:
        return remaining_distance(self.final_state.cg, self.goal)


def make_optimizer(algorithm: str, population=DEFAULT_POPULATION, iterations=DEFAULT_ITERATIONS, **params):
    """Optimizer estimator by name, sized to ``population * (iterations + 1)`` evaluations."""
    if algorithm == "mopso":
        return MOPSO(population=population, iterations=iterations, **params)
    if algorithm == "nsga2":
        return NSGA2(population=population, generations=iterations, **params)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected 'mopso' or 'nsga2'")


def algorithm_name(optimizer) -> str:
    return {MOPSO: "mopso", NSGA2: "nsga2"}.get(type(optimizer), type(optimizer).__name__.lower())


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 63-bit child seed for ``(seed, *keys)``."""
    state = np.random.SeedSequence([int(seed), *(int(k) for k in keys)]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def select_solution(objectives) -> int:
    """Index of the member with the smallest sum of min-max normalized objectives.

    Objectives with zero range normalize to 0.  Ties go to the lower first
    objective, then the lower second, then the earlier member.
    """
    objs = np.asarray(objectives, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise StalledStep("no candidate solutions to choose from")
    ok = np.flatnonzero(np.all(np.isfinite(objs), axis=1))
    if ok.size == 0:
        raise StalledStep("every candidate solution is infeasible")
    sub = objs[ok]
    lo, hi = sub.min(axis=0), sub.max(axis=0)
    span = hi - lo
    norm = np.where(span > 0, (sub - lo) / np.where(span > 0, span, 1.0), 0.0)
    total = norm.sum(axis=1)
    keys = [np.arange(ok.size)] + [sub[:, j] for j in range(sub.shape[1] - 1, -1, -1)] + [total]
    return int(ok[np.lexsort(keys)[0]])


def plan_step(state: BoxState, world: WorldMap, optimizer, seed: int, step: int = 0) -> StepRecord:
    """Optimize one move from ``state`` and return it already applied."""
    problem = StepProblem(state, world)
    est = clone(optimizer).set_params(random_state=seed)
    tic = time.perf_counter()
    est.fit(problem, problem.bounds)
    elapsed = time.perf_counter() - tic
    front = est.pareto_front_
    if front.shape[0] == 0:
        raise StalledStep(f"step {step}: optimizer found no feasible move")
    chosen = select_solution(front)
    decision = problem.decision(est.pareto_set_[chosen])
    return StepRecord(
        step=step,
        decision=decision,
        breakdown=evaluate(decision, state, world),
        pre=state,
        post=simulate(decision, state),
        archive_size=int(front.shape[0]),
        seed=seed,
        wall_clock=elapsed,
    )


def run_planner(world: WorldMap, optimizer=None, seed: int = 0, max_steps: int = 50) -> RunReport:
    """Plan until the CG is within ``epsilon`` of the goal, the step limit, or a stall.

    A stalled step is retried once with a fresh seed before the run is abandoned.
    """
    if optimizer is None:
        optimizer = make_optimizer("mopso")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    eps = world.params.epsilon
    state = world.start
    steps: list[StepRecord] = []
    termination = STEP_LIMIT
    while True:
        if remaining_distance(state.cg, world.goal) <= eps:
            termination = GOAL_REACHED
            break
        if len(steps) >= max_steps:
            termination = STEP_LIMIT
            break
        record = None
        for attempt in range(2):
            try:
                record = plan_step(state, world, optimizer, derive_seed(seed, len(steps), attempt), step=len(steps) + 1)
                break
            except StalledStep as exc:
                logger.info("%s (attempt %d)", exc, attempt + 1)
        if record is None:
            termination = STALLED
            break
        steps.append(record)
        state = record.post
    return RunReport(
        steps=steps,
        termination=termination,
        seed=seed,
        algorithm=algorithm_name(optimizer),
        start=world.start,
        goal=world.goal,
    )
