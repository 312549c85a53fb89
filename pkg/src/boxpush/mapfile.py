"""Line-oriented world-map files.

One directive per line, ``#`` starts a comment::

    workspace x_min y_min x_max y_max
    box cg_x cg_y theta length width
    mass kg
    inertia kgm2
    goal x y
    epsilon m
    obstacle rect x y w h
    obstacle circle x y r
    constants k k1 k2 dcap
    bounds f|d|alpha lo hi

``workspace``, ``box`` and ``goal`` are required.  Omitted physical constants
take the :class:`~boxpush.box_model.PhysicalParams` defaults, except the
inertia, which defaults to that of a uniform rectangle of the box's size.
"""

from __future__ import annotations

from dataclasses import fields
from importlib import resources
from pathlib import Path

from .box_model import BoxState, Circle, PhysicalParams, Rect, WorldMap, is_feasible

BUNDLED_MAPS = ("map1", "map2")

_ARITY = {
    "workspace": 4,
    "box": 5,
    "mass": 1,
    "inertia": 1,
    "goal": 2,
    "epsilon": 1,
    "constants": 4,
}


class MapError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


def _numbers(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise MapError(lineno, f"not a number: {bad!r}") from None


def _is_float(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_map(text: str) -> WorldMap:
    seen: dict[str, int] = {}
    values: dict[str, list[float]] = {}
    obstacles = []
    bounds: dict[str, tuple[float, float]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        key = head.lower()
        if key == "obstacle":
            if not rest:
                raise MapError(lineno, "obstacle needs a shape (rect or circle)")
            shape, args = rest[0].lower(), rest[1:]
            if shape == "rect":
                if len(args) != 4:
                    raise MapError(lineno, f"obstacle rect takes 4 values, got {len(args)}")
                x, y, w, h = _numbers(args, lineno)
                if w <= 0 or h <= 0:
                    raise MapError(lineno, "obstacle rect needs positive width and height")
                obstacles.append((lineno, Rect(x, y, w, h)))
            elif shape == "circle":
                if len(args) != 3:
                    raise MapError(lineno, f"obstacle circle takes 3 values, got {len(args)}")
                x, y, r = _numbers(args, lineno)
                if r <= 0:
                    raise MapError(lineno, "obstacle circle needs a positive radius")
                obstacles.append((lineno, Circle(x, y, r)))
            else:
                raise MapError(lineno, f"unknown obstacle shape {rest[0]!r}")
            continue
        if key == "bounds":
            if len(rest) != 3:
                raise MapError(lineno, f"bounds takes a name and 2 values, got {len(rest)} tokens")
            name = rest[0].lower()
            if name not in ("f", "d", "alpha"):
                raise MapError(lineno, f"unknown bounds name {rest[0]!r} (expected f, d or alpha)")
            lo, hi = _numbers(rest[1:], lineno)
            if not lo < hi:
                raise MapError(lineno, f"bounds {name}: lower must be < upper")
            bounds[name] = (lo, hi)
            seen[f"bounds {name}"] = lineno
            continue
        if key not in _ARITY:
            raise MapError(lineno, f"unknown directive {head!r}")
        if key in seen:
            raise MapError(lineno, f"duplicate {key!r} directive (first on line {seen[key]})")
        if len(rest) != _ARITY[key]:
            raise MapError(lineno, f"{key} takes {_ARITY[key]} values, got {len(rest)}")
        seen[key] = lineno
        values[key] = _numbers(rest, lineno)

    for required in ("workspace", "box", "goal"):
        if required not in values:
            raise MapError(None, f"missing required directive {required!r}")

    x0, y0, x1, y1 = values["workspace"]
    if not (x0 < x1 and y0 < y1):
        raise MapError(seen["workspace"], "workspace needs x_min < x_max and y_min < y_max")
    workspace = Rect(x0, y0, x1 - x0, y1 - y0)

    cx, cy, theta, length, width = values["box"]
    if length <= 0 or width <= 0:
        raise MapError(seen["box"], "box needs positive length and width")
    start = BoxState.at((cx, cy), theta, length, width)

    kwargs = {}
    for key, attr in (("mass", "mass"), ("inertia", "inertia"), ("epsilon", "epsilon")):
        if key in values:
            (v,) = values[key]
            if v <= 0:
                raise MapError(seen[key], f"{key} must be positive")
            kwargs[attr] = v
    if "inertia" not in kwargs:
        kwargs["inertia"] = kwargs.get("mass", PhysicalParams.mass) * (length**2 + width**2) / 12.0
    if "constants" in values:
        k, k1, k2, dcap = values["constants"]
        if min(k, k1, k2, dcap) <= 0:
            raise MapError(seen["constants"], "constants k, k1, k2 and dcap must be positive")
        kwargs.update(k=k, k1=k1, k2=k2, d_cap=dcap)
    if "f" in bounds:
        if bounds["f"][0] <= 0:
            raise MapError(seen["bounds f"], "force bounds must be positive")
        kwargs.update(f_min=bounds["f"][0], f_max=bounds["f"][1])
    if "d" in bounds:
        if bounds["d"][0] < 0:
            raise MapError(seen["bounds d"], "distance bounds must be non-negative")
        kwargs.update(d_min=bounds["d"][0], d_max=bounds["d"][1])
    if "alpha" in bounds:
        kwargs.update(alpha_min=bounds["alpha"][0], alpha_max=bounds["alpha"][1])
    params = PhysicalParams(**kwargs)

    gx, gy = values["goal"]
    if not (workspace.x <= gx <= workspace.x_max and workspace.y <= gy <= workspace.y_max):
        raise MapError(seen["goal"], "goal lies outside the workspace")

    world = WorldMap(
        workspace=workspace,
        start=start,
        goal=(gx, gy),
        obstacles=[ob for _, ob in obstacles],
        params=params,
    )
    if not is_feasible(start, world):
        raise MapError(seen["box"], "start box leaves the workspace or overlaps an obstacle")
    return world


def format_map(world: WorldMap) -> str:
    """Map-file text that :func:`parse_map` reads back to an equivalent world."""
    r = repr
    ws, st, p = world.workspace, world.start, world.params
    lines = [
        f"workspace {r(ws.x)} {r(ws.y)} {r(ws.x_max)} {r(ws.y_max)}",
        f"box {r(st.cg[0])} {r(st.cg[1])} {r(st.theta)} {r(st.length)} {r(st.width)}",
        f"goal {r(world.goal[0])} {r(world.goal[1])}",
        f"mass {r(p.mass)}",
        f"inertia {r(p.inertia)}",
        f"epsilon {r(p.epsilon)}",
        f"constants {r(p.k)} {r(p.k1)} {r(p.k2)} {r(p.d_cap)}",
        f"bounds f {r(p.f_min)} {r(p.f_max)}",
        f"bounds d {r(p.d_min)} {r(p.d_max)}",
        f"bounds alpha {r(p.alpha_min)} {r(p.alpha_max)}",
    ]
    for ob in world.obstacles:
        if isinstance(ob, Circle):
            lines.append(f"obstacle circle {r(ob.x)} {r(ob.y)} {r(ob.r)}")
        else:
            lines.append(f"obstacle rect {r(ob.x)} {r(ob.y)} {r(ob.w)} {r(ob.h)}")
    return "\n".join(lines) + "\n"


def load_map(source: str | Path) -> WorldMap:
    """Parse a map file, or a bundled map by name (``map1``, ``map2``)."""
    path = Path(source)
    if not path.exists() and str(source) in BUNDLED_MAPS:
        text = resources.files("boxpush.maps").joinpath(f"{source}.map").read_text(encoding="utf-8")
        return parse_map(text)
    return parse_map(path.read_text(encoding="utf-8"))


def params_as_dict(params: PhysicalParams) -> dict[str, float]:
    return {f.name: getattr(params, f.name) for f in fields(params)}
