"""Standalone SVG rendering of a planned box trajectory."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .box_model import Circle, WorldMap
from .planner import RunReport

SVG_NS = "http://www.w3.org/2000/svg"


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _points(pts) -> str:
    return " ".join(f"{_n(x)},{_n(y)}" for x, y in pts)


def render_svg(report: RunReport, world: WorldMap, scale: float = 8.0) -> str:
    """Workspace, obstacles, the box footprint before and after every step, the CG
    path and the goal.  World y points up; the drawing is flipped accordingly."""
    ws = world.workspace
    margin = 2.0
    width = (ws.w + 2 * margin) * scale
    height = (ws.h + 2 * margin) * scale
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "width": _n(width),
            "height": _n(height),
            "viewBox": f"0 0 {_n(width)} {_n(height)}",
        },
    )
    ET.SubElement(root, "title").text = f"{report.algorithm} seed {report.seed}: {report.termination}"
    scene = ET.SubElement(
        root,
        "g",
        {"transform": f"translate({_n(margin * scale - ws.x * scale)},{_n(height - margin * scale + ws.y * scale)}) scale({_n(scale)},{_n(-scale)})"},
    )
    ET.SubElement(
        scene,
        "rect",
        {"class": "workspace", "x": _n(ws.x), "y": _n(ws.y), "width": _n(ws.w), "height": _n(ws.h),
         "fill": "none", "stroke": "black", "stroke-width": "0.3"},
    )
    for ob in world.obstacles:
        if isinstance(ob, Circle):
            ET.SubElement(scene, "circle", {"class": "obstacle", "cx": _n(ob.x), "cy": _n(ob.y), "r": _n(ob.r), "fill": "#888"})
        else:
            ET.SubElement(
                scene, "rect",
                {"class": "obstacle", "x": _n(ob.x), "y": _n(ob.y), "width": _n(ob.w), "height": _n(ob.h), "fill": "#888"},
            )

    states = [report.start] + [s.post for s in report.steps]
    for i, st in enumerate(states):
        attrs = {"class": "box start" if i == 0 else "box", "points": _points(st.corners()),
                 "fill": "none", "stroke-width": "0.25"}
        attrs["stroke"] = "#1f77b4" if i == 0 else "#d62728"
        if i == 0:
            attrs["fill"] = "#1f77b4"
            attrs["fill-opacity"] = "0.3"
        ET.SubElement(scene, "polygon", attrs)
    if len(states) > 1:
        ET.SubElement(
            scene, "polyline",
            {"class": "cg-path", "points": _points([st.cg for st in states]), "fill": "none",
             "stroke": "#2ca02c", "stroke-width": "0.3"},
        )
    gx, gy = world.goal
    ET.SubElement(
        scene, "circle",
        {"class": "goal", "cx": _n(gx), "cy": _n(gy), "r": _n(world.params.epsilon), "fill": "none",
         "stroke": "#ff7f0e", "stroke-width": "0.3"},
    )
    ET.SubElement(scene, "circle", {"class": "goal-centre", "cx": _n(gx), "cy": _n(gy), "r": "0.4", "fill": "#ff7f0e"})
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
