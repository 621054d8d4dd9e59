"""Flat-file formats: environment json, dataset csv, results, svg.

Serialization is deterministic: json keys are sorted, floats print with
their shortest round-trip repr, and svg documents are assembled from
fixed templates. Identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .fleet import MakespanCertificate, SplitParameters
from .geometry import Environment
from .placement import MeasurementPlan, VerificationReport
from .routing import TimeModel, Tour, cumulative_times, tour_time

__all__ = [
    "certificate_to_payload",
    "environment_from_payload",
    "environment_to_payload",
    "load_dataset",
    "load_environment",
    "plan_svg",
    "read_curve_csv",
    "read_json",
    "read_plan_entries",
    "tour_from_payload",
    "tour_svg",
    "tour_to_payload",
    "verification_from_payload",
    "verification_to_payload",
    "write_curve_csv",
    "write_dataset",
    "write_json",
    "write_plan_csv",
]

_DATASET_HEADER = "x,y,value"
_PLAN_HEADER = "x,y,n_measurements"


def _fmt(value: float) -> str:
    return repr(float(value))


def environment_to_payload(env: Environment) -> dict:
    if env.kind == "rectangle":
        x0, y0, x1, y1 = env.bounds
        return {"type": "rectangle", "min": [x0, y0], "max": [x1, y1]}
    return {
        "type": "polygon",
        "vertices": [[float(x), float(y)] for x, y in env.vertices],
    }


def environment_from_payload(payload) -> Environment:
    if not isinstance(payload, dict) or "type" not in payload:
        raise ValueError("environment json must be an object with a 'type' key")
    kind = payload["type"]
    try:
        if kind == "rectangle":
            return Environment.rectangle(payload["min"], payload["max"])
        if kind == "polygon":
            return Environment.polygon(payload["vertices"])
    except KeyError as exc:
        raise ValueError(f"environment json is missing the {exc.args[0]!r} key") from None
    raise ValueError(f"unknown environment type {kind!r}")


def load_environment(path) -> Environment:
    return environment_from_payload(json.loads(Path(path).read_text(encoding="utf-8")))


def load_dataset(path):
    """Read an 'x,y,value' csv into (points, centered values, mean).

    Blank lines and '#' comments are skipped anywhere. Values are
    centered at ingestion; the subtracted mean is returned so
    predictions can be de-centered later.
    """
    rows = []
    header_seen = False
    for i, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != _DATASET_HEADER:
                raise ValueError(f"line {i}: expected header {_DATASET_HEADER!r}, got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {i}: expected 3 comma-separated fields, got {len(parts)}")
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError:
            raise ValueError(f"line {i}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(t) for t in (x, y, v)):
            raise ValueError(f"line {i}: non-finite value in {line!r}")
        rows.append((x, y, v))
    if not header_seen:
        raise ValueError(f"line 1: missing {_DATASET_HEADER!r} header")
    if not rows:
        raise ValueError("no data rows after the header")
    arr = np.asarray(rows, dtype=float)
    mean = float(arr[:, 2].mean())
    return arr[:, :2], arr[:, 2] - mean, mean


def write_dataset(path, points, values) -> None:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    vals = np.asarray(values, dtype=float)
    if pts.shape[0] != vals.shape[0]:
        raise ValueError("one value per point is required")
    lines = [_DATASET_HEADER]
    lines.extend(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}" for (x, y), v in zip(pts, vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, payload) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_plan_csv(path, plan: MeasurementPlan) -> None:
    lines = [_PLAN_HEADER]
    lines.extend(f"{_fmt(x)},{_fmt(y)},{int(n)}" for (x, y), n in plan.entries)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_plan_entries(path) -> tuple:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != _PLAN_HEADER:
        raise ValueError(f"expected header {_PLAN_HEADER!r}")
    entries = []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {i}: expected 3 fields")
        entries.append(((float(parts[0]), float(parts[1])), int(parts[2])))
    return tuple(entries)


def verification_to_payload(report: VerificationReport) -> dict:
    return {
        "max_variance": report.max_variance,
        "argmax": [report.argmax[0], report.argmax[1]],
        "mean_variance": report.mean_variance,
        "passed": report.passed,
        "grid_spacing": report.grid_spacing,
        "grid_count": report.grid_count,
    }


def verification_from_payload(payload) -> VerificationReport:
    return VerificationReport(
        float(payload["max_variance"]),
        (payload["argmax"][0], payload["argmax"][1]),
        float(payload["mean_variance"]),
        bool(payload["passed"]),
        float(payload["grid_spacing"]),
        int(payload["grid_count"]),
    )


def tour_to_payload(tour: Tour, time: TimeModel) -> dict:
    """Tour as json-ready dict, cumulative elapsed time per waypoint.

    The elapsed column makes split thresholds auditable from the file
    alone.
    """
    elapsed = cumulative_times(tour, time)
    waypoints = []
    for i, ((loc, dwell), t) in enumerate(zip(tour.waypoints, elapsed)):
        waypoints.append(
            {
                "location": [loc[0], loc[1]],
                "dwell": int(dwell),
                "elapsed": float(t),
                "disk": None if tour.disk_index is None else int(tour.disk_index[i]),
            }
        )
    return {
        "depot": [tour.depot[0], tour.depot[1]],
        "closed": tour.closed,
        "waypoints": waypoints,
        "travel_length": tour.travel_length(),
        "total_time": tour_time(tour, time),
        "measurement_time": time.measurement_time,
        "speed": time.speed,
    }


def tour_from_payload(payload) -> Tour:
    waypoints = tuple(
        ((w["location"][0], w["location"][1]), int(w["dwell"])) for w in payload["waypoints"]
    )
    tags = [w.get("disk") for w in payload["waypoints"]]
    if all(t is None for t in tags):
        disk_index = None
    elif any(t is None for t in tags):
        raise ValueError("waypoints mix tagged and untagged disk indices")
    else:
        disk_index = tuple(int(t) for t in tags)
    return Tour(
        (payload["depot"][0], payload["depot"][1]),
        waypoints,
        bool(payload["closed"]),
        disk_index,
    )


def certificate_to_payload(
    cert: MakespanCertificate, params: SplitParameters, total_time: float
) -> dict:
    return {
        "robots": params.robots,
        "bound": cert.bound,
        "makespan": cert.makespan,
        "satisfied": cert.satisfied,
        "depot_reach": params.depot_reach,
        "dwell_count": params.dwell_count,
        "measurement_time": params.measurement_time,
        "total_time": total_time,
    }


def write_curve_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_curve_csv(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError("empty curve file")
    header = tuple(lines[0].split(","))
    rows = [tuple(float(c) for c in line.split(",")) for line in lines[1:] if line.strip()]
    return header, rows


def _env_path_data(env: Environment) -> str:
    verts = env.vertices
    parts = [f"M {_fmt(verts[0, 0])} {_fmt(verts[0, 1])}"]
    parts.extend(f"L {_fmt(x)} {_fmt(y)}" for x, y in verts[1:])
    parts.append("Z")
    return " ".join(parts)


def _svg_document(env: Environment, plan: MeasurementPlan, tour: Tour | None) -> str:
    x0, y0, x1, y1 = env.bounds
    pad = max((d.radius for d in plan.sweep_disks), default=0.0) + 0.05 * env.diameter
    view = f"{_fmt(x0 - pad)} {_fmt(y0 - pad)} {_fmt(x1 - x0 + 2 * pad)} {_fmt(y1 - y0 + 2 * pad)}"
    stroke = env.diameter / 500.0
    dot = env.diameter / 300.0

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view}">',
        # data coordinates run y-up; flip so north stays on top
        f'<g transform="translate(0 {_fmt(y0 + y1)}) scale(1 -1)">',
        f'<path d="{_env_path_data(env)}" fill="none" stroke="#202020" stroke-width="{_fmt(2 * stroke)}"/>',
        '<g id="independent-disks">',
    ]
    for d in plan.mis_disks:
        out.append(
            f'<circle cx="{_fmt(d.center[0])}" cy="{_fmt(d.center[1])}" r="{_fmt(d.radius)}" '
            f'fill="none" stroke="#1f77b4" stroke-width="{_fmt(stroke)}"/>'
        )
    out.append("</g>")
    out.append('<g id="sweep-disks">')
    for d in plan.sweep_disks:
        out.append(
            f'<circle cx="{_fmt(d.center[0])}" cy="{_fmt(d.center[1])}" r="{_fmt(d.radius)}" '
            f'fill="none" stroke="#2ca02c" stroke-dasharray="{_fmt(4 * stroke)}" '
            f'stroke-width="{_fmt(stroke)}"/>'
        )
    out.append("</g>")
    if tour is not None:
        out.append('<g id="legs">')
        stops = [tour.depot] + [loc for loc, _ in tour.waypoints]
        if tour.closed:
            stops.append(tour.depot)
        for (ax, ay), (bx, by) in zip(stops, stops[1:]):
            out.append(
                f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
                f'stroke="#d62728" stroke-width="{_fmt(stroke)}"/>'
            )
        out.append("</g>")
    out.append('<g id="sites">')
    for (x, y), _ in plan.entries:
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(dot)}" fill="#202020"/>')
    out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plan_svg(env: Environment, plan: MeasurementPlan) -> str:
    """Environment outline, both disk families, and measurement sites."""
    return _svg_document(env, plan, None)


def tour_svg(env: Environment, plan: MeasurementPlan, tour: Tour) -> str:
    """Plan drawing plus one line per tour leg."""
    return _svg_document(env, plan, tour)
