"""Route plots as standalone SVG files.

Draws the operating area, depots, targets, and one closed polyline per trip
colored by vehicle, with a legend of per-vehicle loads and the completion
time.  The writer goes through xml.etree so the output is always well-formed.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .exact import Solution, total_travel_distance
from .instance import Instance

# One line color per vehicle, recycled when the fleet is larger.
PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#ff9896",
    "#98df8a", "#c5b0d5", "#ffbb78", "#c49c94", "#f7b6d2", "#9edae5",
]

_PLOT_PX = 600.0
_MARGIN = 30.0
_LEGEND_ROW = 18.0


def vehicle_color(vehicle_id: int) -> str:
    return PALETTE[vehicle_id % len(PALETTE)]


def render_solution(instance: Instance, solution: Solution, path: str) -> str:
    """Write the route plot for ``solution`` to ``path`` and return the path."""
    xs = [n.x for n in list(instance.depots) + list(instance.targets)]
    ys = [n.y for n in list(instance.depots) + list(instance.targets)]
    lo = min(0.0, min(xs, default=0.0), min(ys, default=0.0))
    hi = max(max(xs, default=1.0), max(ys, default=1.0), lo + 1.0)
    scale = _PLOT_PX / (hi - lo)

    def px(x: float, y: float) -> tuple[float, float]:
        # SVG's y axis grows downward; flip so north stays up.
        return (_MARGIN + (x - lo) * scale, _MARGIN + (hi - y) * scale)

    used = sorted({vid for _, vid in solution.assignments})
    legend_rows = len(used) + 2
    width = _PLOT_PX + 2 * _MARGIN
    height = _PLOT_PX + 2 * _MARGIN + legend_rows * _LEGEND_ROW

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=f"{width:.0f}",
        height=f"{height:.0f}",
        viewBox=f"0 0 {width:.0f} {height:.0f}",
    )
    ET.SubElement(svg, "rect", x="0", y="0", width=f"{width:.0f}",
                  height=f"{height:.0f}", fill="white")
    x0, y0 = px(lo, hi)
    ET.SubElement(
        svg, "rect",
        x=f"{x0:.1f}", y=f"{y0:.1f}",
        width=f"{_PLOT_PX:.1f}", height=f"{_PLOT_PX:.1f}",
        fill="none", stroke="#444444", **{"stroke-width": "1"},
    )

    for seq, vid in solution.assignments:
        depot = instance.depot_by_id[instance.vehicle_by_id[vid].home_depot]
        pts = [px(depot.x, depot.y)]
        pts += [px(instance.target_by_id[i].x, instance.target_by_id[i].y)
                for i in seq.nodes]
        pts.append(px(depot.x, depot.y))
        ET.SubElement(
            svg, "polyline",
            points=" ".join(f"{x:.1f},{y:.1f}" for x, y in pts),
            fill="none", stroke=vehicle_color(vid), opacity="0.75",
            **{"stroke-width": "2"},
        )

    for t in instance.targets:
        cx, cy = px(t.x, t.y)
        ET.SubElement(svg, "circle", cx=f"{cx:.1f}", cy=f"{cy:.1f}",
                      r="3.5", fill="#111111")
    for d in instance.depots:
        cx, cy = px(d.x, d.y)
        ET.SubElement(
            svg, "rect",
            x=f"{cx - 6:.1f}", y=f"{cy - 6:.1f}", width="12", height="12",
            fill="#222222", stroke="white", **{"stroke-width": "1.5"},
        )

    ty = _PLOT_PX + 2 * _MARGIN
    for row, vid in enumerate(used):
        v = instance.vehicle_by_id[vid]
        trips = sum(1 for _, u in solution.assignments if u == vid)
        y = ty + row * _LEGEND_ROW
        ET.SubElement(
            svg, "line",
            x1=f"{_MARGIN:.1f}", y1=f"{y + 5:.1f}",
            x2=f"{_MARGIN + 24:.1f}", y2=f"{y + 5:.1f}",
            stroke=vehicle_color(vid), **{"stroke-width": "3"},
        )
        label = ET.SubElement(
            svg, "text",
            x=f"{_MARGIN + 32:.1f}", y=f"{y + 9:.1f}",
            **{"font-family": "sans-serif", "font-size": "12"},
        )
        label.text = (
            f"vehicle {vid} (depot {v.home_depot}): {trips} trips,"
            f" load {solution.loads.get(vid, 0.0):.1f} min"
        )
    summary = ET.SubElement(
        svg, "text",
        x=f"{_MARGIN:.1f}", y=f"{ty + len(used) * _LEGEND_ROW + 12:.1f}",
        **{"font-family": "sans-serif", "font-size": "12", "font-weight": "bold"},
    )
    summary.text = (
        f"completion time {solution.tau:.1f} min,"
        f" travel {total_travel_distance(solution, instance):.1f} min,"
        f" {solution.trips} trips"
    )

    ET.ElementTree(svg).write(path, encoding="unicode", xml_declaration=True)
    return path
