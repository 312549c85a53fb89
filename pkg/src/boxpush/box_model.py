"""Planar kinematics of the pushed box and its per-step time/energy objectives.

A step turns the box by ``alpha`` about a pivot on the robots' contact segment
and then pushes it ``d`` metres along its new heading.  The time objective sums
rotation, translation and a goal look-ahead term; the energy objective sums
rotation work, translation work, a goal look-ahead term and a clearance penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

Point = tuple[float, float]

DECISION_FIELDS = ("pivot_x", "pivot_y", "f1r", "f1t", "d1", "d", "alpha")


class InfeasibleDecision(ValueError):
    """A decision whose forces cannot produce the requested motion."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by its lower-left corner and size."""

    x: float
    y: float
    w: float
    h: float

    @property
    def x_max(self) -> float:
        return self.x + self.w

    @property
    def y_max(self) -> float:
        return self.y + self.h

    def corners(self) -> list[Point]:
        return [(self.x, self.y), (self.x_max, self.y), (self.x_max, self.y_max), (self.x, self.y_max)]


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    r: float


Obstacle = Union[Rect, Circle]


@dataclass(frozen=True)
class BoxState:
    """Box pose plus the two robot contact points E and F on its rear face.

    ``theta`` is the heading of the length axis; the rear face is the short
    side at ``cg - length/2`` along that heading.
    """

    cg: Point
    theta: float
    length: float
    width: float
    contact_e: Point
    contact_f: Point

    @classmethod
    def at(cls, cg, theta, length, width, grip=0.5):
        """Box with contacts placed symmetrically at ``±grip·width/2`` on the rear face."""
        c, s = math.cos(theta), math.sin(theta)
        rx = cg[0] - 0.5 * length * c
        ry = cg[1] - 0.5 * length * s
        off = 0.5 * width * grip
        e = (rx - off * s, ry + off * c)
        f = (rx + off * s, ry - off * c)
        return cls((float(cg[0]), float(cg[1])), float(theta), float(length), float(width), e, f)

    @property
    def grip_span(self) -> float:
        return math.dist(self.contact_e, self.contact_f)

    def corners(self) -> list[Point]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        hl, hw = 0.5 * self.length, 0.5 * self.width
        x, y = self.cg
        return [
            (x - hl * c + hw * s, y - hl * s - hw * c),
            (x + hl * c + hw * s, y + hl * s - hw * c),
            (x + hl * c - hw * s, y + hl * s + hw * c),
            (x - hl * c - hw * s, y - hl * s + hw * c),
        ]


@dataclass
class PhysicalParams:
    mass: float = 50.0
    inertia: float = 333.33
    k: float = 1.0
    k1: float = 10.0
    k2: float = 1000.0
    d_cap: float = 20.0
    epsilon: float = 2.0
    f_min: float = 1.0
    f_max: float = 100.0
    d_min: float = 0.0
    d_max: float = 10.0
    alpha_max: float = math.pi / 2
    alpha_min: float = -math.pi / 2

    def __post_init__(self):
        for name in ("mass", "inertia", "k", "k1", "k2", "epsilon", "d_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not 0 < self.f_min < self.f_max:
            raise ValueError("force bounds must satisfy 0 < f_min < f_max")
        if not 0 <= self.d_min < self.d_max:
            raise ValueError("distance bounds must satisfy 0 <= d_min < d_max")
        if not self.alpha_min < self.alpha_max:
            raise ValueError("alpha bounds must satisfy alpha_min < alpha_max")


@dataclass
class WorldMap:
    workspace: Rect
    start: BoxState
    goal: Point
    obstacles: list[Obstacle] = field(default_factory=list)
    params: PhysicalParams = field(default_factory=PhysicalParams)


@dataclass(frozen=True)
class DecisionVector:
    pivot: Point
    f1r: float
    f1t: float
    d1: float
    d: float
    alpha: float

    def to_array(self) -> np.ndarray:
        return np.array([self.pivot[0], self.pivot[1], self.f1r, self.f1t, self.d1, self.d, self.alpha])

    @classmethod
    def from_array(cls, x) -> "DecisionVector":
        x = [float(v) for v in x]
        return cls((x[0], x[1]), x[2], x[3], x[4], x[5], x[6])


@dataclass(frozen=True)
class ObjectiveBreakdown:
    t1: float
    t2: float
    t3: float
    e1: float
    e2: float
    e3: float
    e4: float
    s_remaining: float
    clearance: float
    feasible: bool = True

    @property
    def f1(self) -> float:
        return self.t1 + self.t2 + self.t3 if self.feasible else math.inf

    @property
    def f2(self) -> float:
        return self.e1 + self.e2 + self.e3 + self.e4 if self.feasible else math.inf

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f1, self.f2)

    @classmethod
    def infeasible(cls) -> "ObjectiveBreakdown":
        nan = math.nan
        return cls(nan, nan, nan, nan, nan, nan, nan, nan, nan, feasible=False)


# -- kinematics --------------------------------------------------------------


def rotate_point(p, pivot, alpha: float) -> Point:
    """Counterclockwise rotation of ``p`` about ``pivot`` by ``alpha`` radians."""
    c, s = math.cos(alpha), math.sin(alpha)
    dx, dy = p[0] - pivot[0], p[1] - pivot[1]
    return (pivot[0] + dx * c - dy * s, pivot[1] + dx * s + dy * c)


def _wrap_angle(a: float) -> float:
    a = math.fmod(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    elif a > math.pi:
        a -= 2 * math.pi
    return a


def apply_rotation(state: BoxState, pivot, alpha: float) -> BoxState:
    if alpha == 0:
        return state
    return replace(
        state,
        cg=rotate_point(state.cg, pivot, alpha),
        theta=_wrap_angle(state.theta + alpha),
        contact_e=rotate_point(state.contact_e, pivot, alpha),
        contact_f=rotate_point(state.contact_f, pivot, alpha),
    )


def apply_translation(state: BoxState, d: float) -> BoxState:
    if d < 0:
        raise ValueError(f"translation distance must be >= 0, got {d}")
    if d == 0:
        return state
    dx, dy = d * math.cos(state.theta), d * math.sin(state.theta)
    shift = lambda p: (p[0] + dx, p[1] + dy)  # noqa: E731
    return replace(state, cg=shift(state.cg), contact_e=shift(state.contact_e), contact_f=shift(state.contact_f))


def project_to_segment(p, a, b) -> Point:
    ax, ay = a
    vx, vy = b[0] - ax, b[1] - ay
    vv = vx * vx + vy * vy
    if vv == 0:
        return (ax, ay)
    t = ((p[0] - ax) * vx + (p[1] - ay) * vy) / vv
    t = min(max(t, 0.0), 1.0)
    return (ax + t * vx, ay + t * vy)


# -- objective components -------------------------------------------------------


def rotation_time(alpha: float, inertia: float, f1r: float, d1: float) -> float:
    if alpha == 0:
        return 0.0
    torque = 2.0 * f1r * d1
    if torque <= 0:
        raise InfeasibleDecision("rotation needs a positive torque (f1r * d1 > 0)")
    return math.sqrt(2.0 * abs(alpha) * inertia / torque)


def translation_time(mass: float, d: float, f1t: float) -> float:
    if d == 0:
        return 0.0
    if f1t <= 0:
        raise InfeasibleDecision("translation needs a positive push force")
    # both robots push with f1t
    return math.sqrt(2.0 * mass * d / (2.0 * f1t))


def remaining_distance(next_cg, goal_cg) -> float:
    return math.dist(next_cg, goal_cg)


def secondary_time(s: float, k: float) -> float:
    return k * math.sqrt(s)


def rotation_energy(f1r: float, d1: float, alpha: float) -> float:
    return 2.0 * f1r * d1 * abs(alpha)


def translation_energy(f1t: float, d: float) -> float:
    return 2.0 * f1t * d


def secondary_energy(s: float, k1: float) -> float:
    return k1 * s


def penalty(d2: float, k2: float) -> float:
    return k2 * 2.0 ** (-d2)


# -- geometry -----------------------------------------------------------------------
#
# Everything below works on stacks of convex polygons, shape (n, m, 2), so a
# whole swarm is scored in one pass.


def _min_point_edge_sq(points, starts, vecs):
    """Squared distance from each point set to each edge set, minimized per row.

    ``points`` is (n, p, 2); ``starts`` and ``vecs`` are (n, e, 2).
    """
    d = points[:, :, None, :] - starts[:, None, :, :]
    vv = np.einsum("nek,nek->ne", vecs, vecs)[:, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("npek,nek->npe", d, vecs) / vv
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    r = d - t[..., None] * vecs[:, None, :, :]
    return np.einsum("npek,npek->npe", r, r).reshape(points.shape[0], -1).min(axis=1)


def _edge_vectors(polys):
    return polys, np.roll(polys, -1, axis=1) - polys


def _separated(p, q, vecs):
    """Rows where some edge normal in ``vecs`` strictly separates ``p`` from ``q``."""
    normals = np.stack([-vecs[..., 1], vecs[..., 0]], axis=-1)
    pp = np.einsum("npk,nak->nap", p, normals)
    qq = np.einsum("nqk,nak->naq", q, normals)
    gap = (pp.max(axis=2) < qq.min(axis=2)) | (qq.max(axis=2) < pp.min(axis=2))
    return gap.any(axis=1)


def _polygon_rect_distance(polys, rect: Rect):
    n = polys.shape[0]
    q = np.broadcast_to(np.asarray(rect.corners(), dtype=float), (n, 4, 2))
    ps, pv = _edge_vectors(polys)
    qs, qv = _edge_vectors(q)
    apart = _separated(polys, q, pv) | _separated(polys, q, qv)
    d2 = np.minimum(_min_point_edge_sq(q, ps, pv), _min_point_edge_sq(polys, qs, qv))
    return np.where(apart, np.sqrt(d2), 0.0)


def _polygon_circle_distance(polys, circle: Circle):
    c = np.broadcast_to(np.array([circle.x, circle.y]), (polys.shape[0], 1, 2))
    ps, pv = _edge_vectors(polys)
    rel = c - ps
    cross = pv[..., 0] * rel[..., 1] - pv[..., 1] * rel[..., 0]
    inside = np.all(cross >= 0, axis=1) | np.all(cross <= 0, axis=1)
    gap = np.sqrt(_min_point_edge_sq(c, ps, pv)) - circle.r
    return np.where(inside, 0.0, np.maximum(gap, 0.0))


def obstacle_distances(polys, obstacle: Obstacle) -> np.ndarray:
    """Boundary distance from each convex polygon in ``polys`` (n, m, 2) to ``obstacle``, 0 on overlap."""
    polys = np.asarray(polys, dtype=float)
    if isinstance(obstacle, Circle):
        return _polygon_circle_distance(polys, obstacle)
    return _polygon_rect_distance(polys, obstacle)


def obstacle_distance(poly, obstacle: Obstacle) -> float:
    return float(obstacle_distances(np.asarray(poly, dtype=float)[None], obstacle)[0])


def _footprint_terms(polys, world: WorldMap):
    """Workspace containment, the two wall terms and the capped obstacle term per polygon."""
    ws = world.workspace
    xs, ys = polys[..., 0], polys[..., 1]
    inside = np.all((xs >= ws.x) & (xs <= ws.x_max) & (ys >= ws.y) & (ys <= ws.y_max), axis=1)
    c_x = np.maximum(np.minimum(xs - ws.x, ws.x_max - xs).min(axis=1), 0.0)
    c_y = np.maximum(np.minimum(ys - ws.y, ws.y_max - ys).min(axis=1), 0.0)
    c_obs = np.full(polys.shape[0], world.params.d_cap)
    for ob in world.obstacles:
        np.minimum(c_obs, obstacle_distances(polys, ob), out=c_obs)
    return inside, c_x, c_y, c_obs


def is_feasible(state: BoxState, world: WorldMap) -> bool:
    """Footprint inside the workspace and strictly apart from every obstacle."""
    inside, _, _, c_obs = _footprint_terms(np.asarray([state.corners()]), world)
    return bool(inside[0] and c_obs[0] > 0)


def clearance(state: BoxState, world: WorldMap) -> float:
    """Three-term clearance: nearest side wall + nearest top/bottom wall + nearest obstacle.

    The obstacle term is capped at ``d_cap`` and equals ``d_cap`` when the map
    has no obstacles.
    """
    _, c_x, c_y, c_obs = _footprint_terms(np.asarray([state.corners()]), world)
    return float(c_x[0] + c_y[0] + c_obs[0])


# -- evaluation ----------------------------------------------------------------------------


def resolve_decision(decision: DecisionVector, state: BoxState) -> DecisionVector:
    """Snap the pivot onto the contact segment EF."""
    pivot = project_to_segment(decision.pivot, state.contact_e, state.contact_f)
    if pivot == decision.pivot:
        return decision
    return replace(decision, pivot=pivot)


def simulate(decision: DecisionVector, state: BoxState) -> BoxState:
    """Turn about the (already resolved) pivot, then push along the new heading."""
    return apply_translation(apply_rotation(state, decision.pivot, decision.alpha), decision.d)


BREAKDOWN_FIELDS = ("t1", "t2", "t3", "e1", "e2", "e3", "e4", "s_remaining", "clearance")


def evaluate_many(X, state: BoxState, world: WorldMap) -> dict[str, np.ndarray]:
    """Objective components for a stack of decision rows (n, 7).

    Mirrors :func:`evaluate` row by row; the extra ``feasible`` entry marks rows
    whose final footprint is valid and whose forces can produce the motion.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    params = world.params
    px, py, f1r, f1t, d1, d, alpha = X.T

    (ex, ey), (fx, fy) = state.contact_e, state.contact_f
    vx, vy = fx - ex, fy - ey
    vv = vx * vx + vy * vy
    if vv == 0:
        px, py = np.full_like(px, ex), np.full_like(py, ey)
    else:
        t = np.clip(((px - ex) * vx + (py - ey) * vy) / vv, 0.0, 1.0)
        px, py = ex + t * vx, ey + t * vy

    gx, gy = state.cg
    turned = alpha != 0
    ca, sa = np.cos(alpha), np.sin(alpha)
    rx = np.where(turned, px + (gx - px) * ca - (gy - py) * sa, gx)
    ry = np.where(turned, py + (gx - px) * sa + (gy - py) * ca, gy)
    theta = np.fmod(state.theta + alpha, 2 * math.pi)
    theta = np.where(theta <= -math.pi, theta + 2 * math.pi, np.where(theta > math.pi, theta - 2 * math.pi, theta))
    theta = np.where(turned, theta, state.theta)

    c, s = np.cos(theta), np.sin(theta)
    moved = d != 0
    cx = np.where(moved, rx + d * c, rx)
    cy = np.where(moved, ry + d * s, ry)

    hl, hw = 0.5 * state.length, 0.5 * state.width
    polys = np.stack(
        [
            np.stack([cx - hl * c + hw * s, cy - hl * s - hw * c], axis=-1),
            np.stack([cx + hl * c + hw * s, cy + hl * s - hw * c], axis=-1),
            np.stack([cx + hl * c - hw * s, cy + hl * s + hw * c], axis=-1),
            np.stack([cx - hl * c - hw * s, cy - hl * s + hw * c], axis=-1),
        ],
        axis=1,
    )
    inside, c_x, c_y, c_obs = _footprint_terms(polys, world)

    torque = 2.0 * f1r * d1
    feasible = inside & (c_obs > 0) & (d >= 0) & ~(turned & (torque <= 0)) & ~(moved & (f1t <= 0))
    with np.errstate(invalid="ignore", divide="ignore"):
        t1 = np.where(turned, np.sqrt(2.0 * np.abs(alpha) * params.inertia / torque), 0.0)
        t2 = np.where(moved, np.sqrt(2.0 * params.mass * d / (2.0 * f1t)), 0.0)
    s_rem = np.hypot(cx - world.goal[0], cy - world.goal[1])
    d2 = c_x + c_y + c_obs
    return {
        "t1": t1,
        "t2": t2,
        "t3": params.k * np.sqrt(s_rem),
        "e1": 2.0 * f1r * d1 * np.abs(alpha),
        "e2": 2.0 * f1t * d,
        "e3": params.k1 * s_rem,
        "e4": params.k2 * np.power(2.0, -d2),
        "s_remaining": s_rem,
        "clearance": d2,
        "feasible": feasible,
    }


def objectives_many(X, state: BoxState, world: WorldMap) -> np.ndarray:
    """``(f1, f2)`` per decision row, ``inf`` for infeasible rows."""
    parts = evaluate_many(X, state, world)
    f1 = parts["t1"] + parts["t2"] + parts["t3"]
    f2 = parts["e1"] + parts["e2"] + parts["e3"] + parts["e4"]
    out = np.stack([f1, f2], axis=1)
    out[~parts["feasible"]] = np.inf
    return out


def evaluate(decision: DecisionVector, state: BoxState, world: WorldMap) -> ObjectiveBreakdown:
    """Objective breakdown of one step, or an infeasible marker when the final footprint
    leaves the workspace or touches an obstacle.  The pivot is projected onto EF first."""
    if decision.d < 0:
        raise ValueError(f"translation distance must be >= 0, got {decision.d}")
    parts = evaluate_many(decision.to_array()[None], state, world)
    if not parts["feasible"][0]:
        return ObjectiveBreakdown.infeasible()
    return ObjectiveBreakdown(**{name: float(parts[name][0]) for name in BREAKDOWN_FIELDS})



def decision_bounds(state: BoxState, params: PhysicalParams) -> list[tuple[float, float]]:
    """Search box for one step, in :data:`DECISION_FIELDS` order.

    The pivot ranges over the bounding box of EF (padded where EF is axis
    parallel); the moment arm ranges over ``(0, |EF|]``.
    """
    (ex, ey), (fx, fy) = state.contact_e, state.contact_f
    span = state.grip_span
    pad = 0.05 * span

    def axis(a, b):
        lo, hi = min(a, b), max(a, b)
        if hi - lo < pad:
            mid = 0.5 * (lo + hi)
            lo, hi = mid - 0.5 * pad, mid + 0.5 * pad
        return (lo, hi)

    return [
        axis(ex, fx),
        axis(ey, fy),
        (params.f_min, params.f_max),
        (params.f_min, params.f_max),
        (0.01 * span, span),
        (params.d_min, params.d_max),
        (params.alpha_min, params.alpha_max),
    ]


class StepProblem:
    """Callable ``x -> (f1, f2)`` over the 7-D decision box of the current state.

    ``batch`` scores a whole (n, 7) population at once; the optimizers use it
    when present.
    """

    def __init__(self, state: BoxState, world: WorldMap):
        self.state = state
        self.world = world
        self.bounds = decision_bounds(state, world.params)

    def __call__(self, x) -> tuple[float, float]:
        f1, f2 = objectives_many(np.asarray(x, dtype=float)[None], self.state, self.world)[0]
        return (float(f1), float(f2))

    def batch(self, X) -> np.ndarray:
        return objectives_many(X, self.state, self.world)

    def breakdown(self, x) -> ObjectiveBreakdown:
        return evaluate(DecisionVector.from_array(x), self.state, self.world)

    def decision(self, x) -> DecisionVector:
        return resolve_decision(DecisionVector.from_array(x), self.state)
