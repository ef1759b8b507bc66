"""Deterministic artifact emission: canonical JSON reports, trajectory CSV
dumps, and SVG renderings of foliations and of the image of the polar grid
under a map."""

from __future__ import annotations

import io
import json

import numpy as np

from .boundary import DiscreteMap
from .mesh import UnitDiskMesh

__all__ = [
    "jsonify",
    "canonical_json",
    "write_trajectory_csv",
    "emit_svg_foliation",
    "emit_svg_map",
]

_VIEW = 1000.0
_R = 480.0


def jsonify(obj):
    """Recursively convert numpy scalars/arrays and complex numbers into
    plain JSON-compatible values (complex -> [re, im])."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(jsonify(obj), sort_keys=True, indent=2) + "\n"


def write_trajectory_csv(segments) -> str:
    """CSV dump: seed_re, seed_im, orientation, point_index, x, y,
    termination (backward|forward ends joined)."""
    out = io.StringIO()
    out.write("seed_re,seed_im,orientation,point_index,x,y,termination\n")
    for seg in segments:
        term = f"{seg.termination[0]}|{seg.termination[1]}"
        for i, p in enumerate(seg.points):
            out.write(f"{seg.seed.real:.12g},{seg.seed.imag:.12g},"
                      f"{seg.orientation},{i},{p.real:.12g},{p.imag:.12g},{term}\n")
    return out.getvalue()


def _to_svg(z: complex) -> tuple[float, float]:
    return (_VIEW / 2 + _R * z.real, _VIEW / 2 - _R * z.imag)


def _polyline(points, stroke: str, dashed: bool = False, width: float = 1.5) -> str:
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in (_to_svg(p) for p in points))
    dash = ' stroke-dasharray="8,6"' if dashed else ""
    return (f'<polyline fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{dash} points="{coords}"/>')


def emit_svg_foliation(trajectories, critical_pts=()) -> str:
    """SVG of traced trajectories on the disk: vertical solid, horizontal
    dashed, critical points as markers. Fixed 1000x1000 viewport; output is
    byte-deterministic for identical inputs."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_VIEW:.0f}" '
        f'height="{_VIEW:.0f}" viewBox="0 0 {_VIEW:.0f} {_VIEW:.0f}">',
        f'<circle cx="{_VIEW/2:.1f}" cy="{_VIEW/2:.1f}" r="{_R:.1f}" '
        'fill="none" stroke="black" stroke-width="2"/>',
    ]
    for seg in trajectories:
        stride = max(1, len(seg.points) // 2000)
        pts = list(seg.points[::stride])
        if len(seg.points) > 1 and stride > 1:
            pts.append(seg.points[-1])
        parts.append(_polyline(pts, "#1f4e9c" if seg.orientation == "vertical"
                               else "#b03030", dashed=seg.orientation == "horizontal"))
    for cp in critical_pts:
        x, y = _to_svg(cp.position)
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="6" fill="black"/>')
        parts.append(f'<text x="{x + 8:.3f}" y="{y - 8:.3f}" font-size="18">'
                     f'{cp.order_estimate}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _ring_indices(mesh: UnitDiskMesh, k: int) -> np.ndarray:
    start = 1 + mesh.sectors * (k - 1) * k // 2
    return np.arange(start, start + k * mesh.sectors)


def emit_svg_map(h: DiscreteMap, circle_stride: int | None = None) -> str:
    """SVG of the images of the mesh's concentric circles and sector rays
    under the map, scaled to fit the viewport."""
    mesh = h.mesh
    R, S = mesh.rings, mesh.sectors
    vals = h.values
    span = max(np.ptp(vals.real), np.ptp(vals.imag), 1e-12)
    mid = complex(vals.real.min() + np.ptp(vals.real) / 2,
                  vals.imag.min() + np.ptp(vals.imag) / 2)

    def tf(z):
        return (z - mid) / span * 1.9

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_VIEW:.0f}" '
        f'height="{_VIEW:.0f}" viewBox="0 0 {_VIEW:.0f} {_VIEW:.0f}">',
    ]
    stride = circle_stride or max(1, R // 12)
    for k in range(stride, R + 1, stride):
        ring = _ring_indices(mesh, k)
        pts = [tf(vals[i]) for i in ring] + [tf(vals[ring[0]])]
        parts.append(_polyline(pts, "#444444", width=1.0))
    for j in range(S):
        ray = [0] + [_ring_indices(mesh, k)[j * k] for k in range(1, R + 1)]
        parts.append(_polyline([tf(vals[i]) for i in ray], "#8888cc", width=1.0))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
