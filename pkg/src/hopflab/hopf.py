"""Hopf product phi = hz * conj(hzbar) of a discrete map, its discrete
anti-holomorphicity residual, zeros of the associated quadratic differential,
and tracing of the differential's vertical/horizontal trajectories.

Vertical (resp. horizontal) trajectories follow the unit direction d with
phi * d^2 on the negative (resp. positive) real axis; they are the directions
of minimal (resp. maximal) stretch of the underlying map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boundary import DiscreteMap
from .mesh import UnitDiskMesh, WirtingerField, wirtinger

__all__ = [
    "HopfField",
    "TrajectorySegment",
    "CriticalPoint",
    "CriticalPointScan",
    "TraceConfig",
    "hopf_product",
    "holomorphy_residual",
    "critical_points",
    "trace_trajectory",
    "endpoint_distinctness",
    "vertical_constancy",
]


def _fit_vertex_values(mesh: UnitDiskMesh, tri_values: np.ndarray) -> np.ndarray:
    """Area-weighted least-squares affine reconstruction of per-triangle
    values at the vertices: around each vertex v fit c0 + c1 d + c2 conj(d)
    (d = centroid offset) over the incident triangles and keep c0. Vertices
    with too few or degenerate incidences fall back to the area-weighted
    mean, which keeps constant fields exactly constant."""
    nv = mesh.n_vertices
    cent = mesh.centroids
    area = mesh.signed_areas

    cols = mesh.triangles.ravel()
    d = (np.repeat(cent, 3) - mesh.vertices[cols])
    w = np.repeat(area, 3)
    y = np.repeat(tri_values, 3)

    # rows of the local design matrix: x = (1, d, conj(d))
    x = np.stack([np.ones_like(d), d, np.conj(d)], axis=1)
    M = np.zeros((nv, 3, 3), dtype=complex)
    rhs = np.zeros((nv, 3), dtype=complex)
    for j in range(3):
        for k in range(3):
            np.add.at(M[:, j, k], cols, w * np.conj(x[:, j]) * x[:, k])
        np.add.at(rhs[:, j], cols, w * np.conj(x[:, j]) * y)

    counts = np.zeros(nv, dtype=np.int64)
    np.add.at(counts, cols, 1)

    out = np.zeros(nv, dtype=complex)
    wsum = M[:, 0, 0].real
    mean_ok = wsum > 0
    out[mean_ok] = rhs[mean_ok, 0] / wsum[mean_ok]

    scale = np.maximum(np.einsum("vii->v", M).real / 3.0, 1e-300)
    det = np.linalg.det(M)
    good = (counts >= 3) & (np.abs(det) > 1e-10 * scale ** 3)
    if good.any():
        sol = np.linalg.solve(M[good], rhs[good][..., None])[..., 0]
        out[good] = sol[:, 0]
    return out


@dataclass(frozen=True)
class HopfField:
    """Per-triangle Hopf product with a least-squares vertex reconstruction
    and the aggregate L1 anti-holomorphicity residual
    sum area * |dzbar of the reconstructed field|."""

    phi: np.ndarray
    phi_fit: np.ndarray
    residual: float
    mesh: UnitDiskMesh
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_vertex_values(cls, mesh: UnitDiskMesh, phi_tri: np.ndarray,
                           phi_vert: np.ndarray) -> "HopfField":
        fld = wirtinger(mesh, phi_vert)
        residual = float(np.sum(fld.area * np.abs(fld.hzbar)))
        return cls(phi=np.asarray(phi_tri, dtype=complex),
                   phi_fit=np.asarray(phi_vert, dtype=complex),
                   residual=residual, mesh=mesh)

    @classmethod
    def from_function(cls, mesh: UnitDiskMesh, fn) -> "HopfField":
        """Synthetic field: fn evaluated at centroids (per triangle) and at
        vertices (reconstruction)."""
        return cls.from_vertex_values(
            mesh, np.asarray(fn(mesh.centroids), dtype=complex),
            np.asarray(fn(mesh.vertices), dtype=complex))

    @classmethod
    def from_wirtinger_functions(cls, mesh: UnitDiskMesh, wfn) -> "HopfField":
        """Exact field of a closed-form map with analytic derivatives: wfn
        returns (hz, hzbar) at given points."""
        hz_c, hzb_c = wfn(mesh.centroids)
        hz_v, hzb_v = wfn(mesh.vertices)
        return cls.from_vertex_values(mesh, hz_c * np.conj(hzb_c),
                                      hz_v * np.conj(hzb_v))

    def interpolator(self):
        """Piecewise-linear interpolant of phi_fit; returns a callable
        complex-valued on points (nan outside the mesh)."""
        if "interp" not in self._cache:
            from matplotlib.tri import (LinearTriInterpolator, Triangulation,
                                        TrapezoidMapTriFinder)
            tri = Triangulation(self.mesh.vertices.real, self.mesh.vertices.imag,
                                self.mesh.triangles)
            finder = TrapezoidMapTriFinder(tri)
            ire = LinearTriInterpolator(tri, self.phi_fit.real, trifinder=finder)
            iim = LinearTriInterpolator(tri, self.phi_fit.imag, trifinder=finder)

            def interp(pts):
                pts = np.asarray(pts, dtype=complex)
                re = ire(pts.real, pts.imag)
                im = iim(pts.real, pts.imag)
                out = np.where(re.mask | im.mask, np.nan + 1j * np.nan,
                               re.filled(np.nan) + 1j * im.filled(np.nan))
                return out

            self._cache["interp"] = interp
        return self._cache["interp"]


def hopf_product(fld: WirtingerField, mesh: UnitDiskMesh) -> HopfField:
    """Hopf product of a Wirtinger field: per-triangle hz*conj(hzbar), the
    least-squares vertex reconstruction, and the anti-holomorphicity
    residual of the reconstruction."""
    phi = fld.hz * np.conj(fld.hzbar)
    phi_fit = _fit_vertex_values(mesh, phi)
    return HopfField.from_vertex_values(mesh, phi, phi_fit)


def holomorphy_residual(hopf: HopfField, mesh: UnitDiskMesh | None = None) -> float:
    """Aggregate L1 residual of the differential's holomorphy; the numerical
    stand-in for stationarity under inner variations."""
    return hopf.residual


@dataclass(frozen=True)
class CriticalPoint:
    position: complex
    order_estimate: int
    emanating_count: int


@dataclass(frozen=True)
class CriticalPointScan:
    points: tuple
    identically_zero: bool


def critical_points(hopf: HopfField, mesh: UnitDiskMesh,
                    tol: float = 0.05) -> CriticalPointScan:
    """Locate zeros of the differential: vertices with |phi_fit| below
    tol * median(|phi_fit|) are clustered by mesh adjacency; each cluster
    yields a candidate zero whose order is the winding of phi_fit around a
    circle of three element diameters. An identically vanishing field is a
    distinguished outcome, not a list of zeros."""
    mag = np.abs(hopf.phi_fit)
    scale = float(mag.max())
    if scale < 1e-13:
        return CriticalPointScan(points=(), identically_zero=True)
    med = float(np.median(mag))
    if med < 1e-13 * scale:
        med = scale
    low = np.nonzero(mag < tol * med)[0]
    if len(low) == 0:
        return CriticalPointScan(points=(), identically_zero=False)

    low_set = set(int(i) for i in low)
    adj: dict = {int(i): [] for i in low}
    for t in mesh.triangles:
        ids = [int(v) for v in t if int(v) in low_set]
        for a in ids:
            for b in ids:
                if a != b:
                    adj[a].append(b)
    seen: set = set()
    clusters = []
    for i in sorted(low_set):
        if i in seen:
            continue
        stack = [i]
        comp = []
        seen.add(i)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        clusters.append(comp)

    diam = mesh.median_element_diameter
    interp = hopf.interpolator()
    pts = []
    for comp in clusters:
        pos = complex(mesh.vertices[comp].mean())
        radius = 3.0 * diam
        if abs(pos) + radius >= 1.0:
            radius = max(1.5 * diam, 0.9 * (1.0 - abs(pos)))
        ang = 2.0 * np.pi * np.arange(96) / 96
        ring = pos + radius * np.exp(1j * ang)
        vals = interp(ring)
        if np.any(np.isnan(vals)):
            continue
        dphi = np.angle(np.roll(vals, -1) / vals)
        order = int(np.round(dphi.sum() / (2.0 * np.pi)))
        if order < 1:
            continue
        pts.append(CriticalPoint(position=pos, order_estimate=order,
                                 emanating_count=order + 2))
    return CriticalPointScan(points=tuple(pts), identically_zero=False)


@dataclass(frozen=True)
class TraceConfig:
    max_angle_deg: float = 5.0
    step_min: float = 1e-4
    step_max: float = 0.05
    step_init: float = 0.01
    max_points: int = 100000
    stop_radius_factor: float = 1.5
    critical_points: Optional[Sequence[complex]] = None


@dataclass(frozen=True)
class TrajectorySegment:
    points: np.ndarray
    orientation: str
    termination: tuple            # (backward end, forward end)
    endpoints: tuple              # terminal positions in the same order
    seed: complex

    def __post_init__(self):
        self.points.flags.writeable = False


def _direction(phi_val: complex, orientation: str,
               prev: Optional[complex]) -> complex:
    u = phi_val / abs(phi_val)
    root = np.exp(-0.5j * np.angle(u))  # 1/sqrt(u), unit modulus
    d = 1j * root if orientation == "vertical" else root
    if prev is None:
        if orientation == "vertical":
            if abs(d.imag) > 1e-12:
                d = d if d.imag > 0 else -d
            else:
                d = d if d.real > 0 else -d
        else:
            if abs(d.real) > 1e-12:
                d = d if d.real > 0 else -d
            else:
                d = d if d.imag > 0 else -d
    elif (d * np.conj(prev)).real < 0:
        d = -d
    return d


def _circle_exit(z0: complex, z1: complex) -> complex:
    """Intersection of the segment z0 -> z1 (|z0| < 1 <= |z1| allowed to
    overshoot) with the unit circle."""
    dz = z1 - z0
    a = abs(dz) ** 2
    b = 2.0 * (z0 * np.conj(dz)).real
    c = abs(z0) ** 2 - 1.0
    disc = max(b * b - 4 * a * c, 0.0)
    t = (-b + np.sqrt(disc)) / (2 * a) if a > 0 else 0.0
    t = min(max(t, 0.0), 1.0) if abs(z1) >= 1.0 else 1.0
    z = z0 + t * dz
    return z / max(abs(z), 1e-300)


def trace_trajectory(hopf: HopfField, mesh: UnitDiskMesh, seed: complex,
                     orientation: str,
                     config: Optional[TraceConfig] = None) -> TrajectorySegment:
    """Integrate the trajectory of the quadratic differential through seed,
    in both directions, with classical RK4 and adaptive steps that bound the
    direction-field rotation per step. The square-root sign of the direction
    field is chosen for continuity with the previous step.

    Termination per end: reached-boundary (unit circle hit, endpoint placed
    on the circle), reached-critical-point (within the stop radius of a
    detected zero, or the field magnitude vanishes), step-cap, or left-mesh.
    """
    if orientation not in ("vertical", "horizontal"):
        raise ValueError("orientation must be 'vertical' or 'horizontal'")
    cfg = config or TraceConfig()
    seed = complex(seed)
    if abs(seed) >= 1.0:
        raise ValueError("seed must lie strictly inside the disk")
    interp = hopf.interpolator()
    v0 = complex(interp(np.array([seed]))[0])
    if np.isnan(v0):
        raise ValueError("seed outside the mesh")
    floor = max(1e-13 * max(np.abs(hopf.phi_fit).max(), 1e-300), 1e-300)
    if abs(v0) <= max(floor, 1e-6 * float(np.abs(hopf.phi_fit).max())):
        raise ValueError("seed lies at a critical point of the differential")

    if cfg.critical_points is not None:
        crits = [complex(c) for c in cfg.critical_points]
    else:
        crits = [c.position for c in critical_points(hopf, mesh).points]
    stop_r = cfg.stop_radius_factor * mesh.median_element_diameter
    max_angle = np.deg2rad(cfg.max_angle_deg)

    def near_critical(z: complex) -> bool:
        return any(abs(z - c) < stop_r for c in crits)

    def phi_at(z: complex) -> complex:
        return complex(interp(np.array([z]))[0])

    def run(sign: int):
        pts = [seed]
        prev = None
        z = seed
        v = v0
        d0 = _direction(v, orientation, None)
        prev = d0 if sign > 0 else -d0
        step = cfg.step_init
        budget = cfg.max_points // 2
        while True:
            if len(pts) >= budget:
                return pts, "step-cap", z
            # RK4 stages with branch continuity
            retry = True
            while retry:
                retry = False
                k1 = _direction_or_none(phi_at(z), orientation, prev, floor)
                if k1 is None:
                    return pts, "reached-critical-point", z
                p2 = z + 0.5 * step * k1
                vals = [phi_at(p2)]
                if np.isnan(vals[0]):
                    zb = _circle_exit(z, p2)
                    pts.append(zb)
                    return pts, "reached-boundary", zb
                k2 = _direction_or_none(vals[0], orientation, k1, floor)
                if k2 is None:
                    return pts, "reached-critical-point", z
                p3 = z + 0.5 * step * k2
                v3 = phi_at(p3)
                if np.isnan(v3):
                    zb = _circle_exit(z, p3)
                    pts.append(zb)
                    return pts, "reached-boundary", zb
                k3 = _direction_or_none(v3, orientation, k2, floor)
                if k3 is None:
                    return pts, "reached-critical-point", z
                p4 = z + step * k3
                v4 = phi_at(p4)
                if np.isnan(v4):
                    zb = _circle_exit(z, p4)
                    pts.append(zb)
                    return pts, "reached-boundary", zb
                k4 = _direction_or_none(v4, orientation, k3, floor)
                if k4 is None:
                    return pts, "reached-critical-point", z
                move = step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                znew = z + move
                # rotation control
                ang = abs(np.angle(k4 * np.conj(k1)))
                if ang > max_angle and step > cfg.step_min * (1 + 1e-12):
                    step = max(0.5 * step, cfg.step_min)
                    retry = True
            if abs(znew) >= 1.0:
                zb = _circle_exit(z, znew)
                pts.append(zb)
                return pts, "reached-boundary", zb
            vnew = phi_at(znew)
            if np.isnan(vnew):
                zb = _circle_exit(z, znew)
                pts.append(zb)
                return pts, "reached-boundary", zb
            pts.append(znew)
            if near_critical(znew):
                return pts, "reached-critical-point", znew
            if abs(vnew) <= floor:
                return pts, "reached-critical-point", znew
            prev = _direction(vnew, orientation, k4)
            z = znew
            if ang < 0.5 * max_angle:
                step = min(step * 1.4, cfg.step_max)

    fwd_pts, fwd_term, fwd_end = run(+1)
    bwd_pts, bwd_term, bwd_end = run(-1)
    points = np.array(list(reversed(bwd_pts))[:-1] + fwd_pts, dtype=complex)
    return TrajectorySegment(points=points, orientation=orientation,
                             termination=(bwd_term, fwd_term),
                             endpoints=(bwd_end, fwd_end), seed=seed)


def _direction_or_none(phi_val: complex, orientation: str,
                       prev: Optional[complex], floor: float):
    if np.isnan(phi_val) or abs(phi_val) <= floor:
        return None
    return _direction(phi_val, orientation, prev)


def endpoint_distinctness(seg: TrajectorySegment,
                          mesh: UnitDiskMesh) -> tuple[bool, float]:
    """Distance between the two boundary endpoints of a trajectory and
    whether it exceeds the boundary vertex spacing. Raises when either end
    did not reach the boundary."""
    if seg.termination != ("reached-boundary", "reached-boundary"):
        raise ValueError("inapplicable termination: segment must reach the "
                         "boundary on both ends")
    y1, y2 = seg.endpoints
    dist = abs(y1 - y2)
    spacing = 2.0 * np.sin(np.pi / len(mesh.boundary_loop))
    return dist > spacing, float(dist)


def vertical_constancy(h: DiscreteMap, seg: TrajectorySegment,
                       max_samples: int = 1024) -> float:
    """Oscillation of the map along a vertical trajectory, from affine
    interpolation at up to max_samples polyline points. Vanishes (to
    interpolation accuracy) where the map is degenerate along the
    trajectory's direction."""
    if seg.orientation != "vertical":
        raise ValueError("segment must be a vertical trajectory")
    from matplotlib.tri import (LinearTriInterpolator, Triangulation,
                                TrapezoidMapTriFinder)
    mesh = h.mesh
    tri = Triangulation(mesh.vertices.real, mesh.vertices.imag, mesh.triangles)
    finder = TrapezoidMapTriFinder(tri)
    ire = LinearTriInterpolator(tri, h.values.real, trifinder=finder)
    iim = LinearTriInterpolator(tri, h.values.imag, trifinder=finder)

    pts = seg.points
    if len(pts) > max_samples:
        idx = np.unique(np.linspace(0, len(pts) - 1, max_samples).astype(int))
        pts = pts[idx]
    # pull near-boundary points inside the outer polygon ALONG the polyline,
    # so degenerate directions of the map are preserved exactly
    rmax = np.cos(np.pi / len(mesh.boundary_loop)) * (1.0 - 1e-12)
    pts = pts.copy()
    n = len(pts)
    for i in range(n):
        if abs(pts[i]) <= rmax:
            continue
        j = i - 1 if i > 0 and abs(pts[i - 1]) <= rmax else \
            (i + 1 if i + 1 < n and abs(pts[i + 1]) <= rmax else None)
        if j is None:
            continue
        p, e = pts[j], pts[i]
        d = e - p
        # largest t in [0,1] with |p + t d| = rmax
        a = abs(d) ** 2
        b = 2.0 * (p * np.conj(d)).real
        c = abs(p) ** 2 - rmax ** 2
        disc = b * b - 4 * a * c
        if a > 0 and disc >= 0:
            t = (-b + np.sqrt(disc)) / (2 * a)
            pts[i] = p + min(max(t, 0.0), 1.0) * d
    re = ire(pts.real, pts.imag)
    im = iim(pts.real, pts.imag)
    keep = ~(re.mask | im.mask)
    vals = re.filled(0)[keep] + 1j * im.filled(0)[keep]
    if len(vals) < 2:
        return 0.0
    osc = 0.0
    for lo in range(0, len(vals), 256):
        d = np.abs(vals[lo:lo + 256, None] - vals[None, :])
        osc = max(osc, float(d.max()))
    return osc
