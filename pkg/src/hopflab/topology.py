"""Topological diagnostics of discrete maps: connected components of ball
preimages (with the trace-arc part of boundary fibers), winding and
Jacobian-integral degree estimators, monotonicity verdicts, conformal
capacity of condensers, and oscillation profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components as _cc
from scipy.sparse.linalg import cg as _cg

from .boundary import DiscreteMap, _distance_to_polyline
from .mesh import UnitDiskMesh, stiffness_matrix, wirtinger

__all__ = [
    "DegreeComponent",
    "DegreeReport",
    "MonotonicityReport",
    "Condenser",
    "fiber_components",
    "degree_in_preimage",
    "degree_equality_check",
    "monotonicity_report",
    "default_fiber_radius",
    "capacity",
    "rasterize_segment",
    "capacity_blowup_profile",
    "oscillation_profile",
    "oscillation_decay_check",
]


# -- fiber components ---------------------------------------------------------

class _FiberMarker:
    """Precomputed image-triangle edge data of a map, for repeated exact
    triangle-vs-ball intersection tests against many target points."""

    def __init__(self, h: DiscreteMap):
        self.mesh = h.mesh
        self.values = h.values
        w = h.values[h.mesh.triangles]
        self.a = [w[:, i] for i in range(3)]
        self.ab = [w[:, (i + 1) % 3] - w[:, i] for i in range(3)]
        self.denom = [np.maximum((e * np.conj(e)).real, 1e-300) for e in self.ab]
        self.conj_ab = [np.conj(e) for e in self.ab]
        # boundary edges: (triangle id, segment start value, segment vector)
        btris = h.mesh.boundary_triangles
        tri_ids, seg_a, seg_ab = [], [], []
        if len(btris):
            nbr = h.mesh.neighbors[btris]
            for i in range(3):
                sel = nbr[:, i] < 0
                if not sel.any():
                    continue
                t = btris[sel]
                v1 = h.mesh.triangles[t, i]
                v2 = h.mesh.triangles[t, (i + 1) % 3]
                tri_ids.append(t)
                seg_a.append(h.values[v1])
                seg_ab.append(h.values[v2] - h.values[v1])
        if tri_ids:
            self.btri = np.concatenate(tri_ids)
            self.bseg_a = np.concatenate(seg_a)
            self.bseg_ab = np.concatenate(seg_ab)
            self.bseg_den = np.maximum(
                (self.bseg_ab * np.conj(self.bseg_ab)).real, 1e-300)
        else:
            self.btri = np.array([], dtype=np.int64)

    def distances(self, y: complex) -> np.ndarray:
        """Distance from y to each (possibly degenerate) image triangle."""
        d_edges = np.full(len(self.a[0]), np.inf)
        crosses = np.empty((len(self.a[0]), 3))
        for i in range(3):
            ya = y - self.a[i]
            t = np.clip((ya * self.conj_ab[i]).real / self.denom[i], 0.0, 1.0)
            d_edges = np.minimum(d_edges, np.abs(ya - t * self.ab[i]))
            crosses[:, i] = (self.ab[i] * np.conj(ya)).imag
        inside = np.all(crosses <= 0, axis=1) | np.all(crosses >= 0, axis=1)
        nondeg = np.abs(crosses).max(axis=1) > 0
        return np.where(inside & nondeg, 0.0, d_edges)

    def boundary_links(self, y: complex, r: float) -> list:
        """Chain links between boundary triangles whose boundary-edge image
        segments meet the ball B(y, r)."""
        if not len(self.btri):
            return []
        ya = y - self.bseg_a
        t = np.clip((ya * np.conj(self.bseg_ab)).real / self.bseg_den, 0.0, 1.0)
        d = np.abs(ya - t * self.bseg_ab)
        qual = sorted(set(self.btri[d <= r].tolist()))
        return [(qual[k], qual[k + 1]) for k in range(len(qual) - 1)]

    def components(self, y: complex, r: float) -> list:
        marked = self.distances(complex(y)) <= r
        return _marked_components(self.mesh, marked,
                                  self.boundary_links(complex(y), r))


def _marked_components(mesh: UnitDiskMesh, marked: np.ndarray,
                       extra_links: Optional[list] = None) -> list:
    """Connected components (shared-edge adjacency plus optional extra
    links) of the marked triangle set, each as a sorted index array, ordered
    by smallest member."""
    ids = np.nonzero(marked)[0]
    if len(ids) == 0:
        return []
    pos = np.full(mesh.n_triangles, -1, dtype=np.int64)
    pos[ids] = np.arange(len(ids))
    nbr = mesh.neighbors[ids]
    rows, cols = [], []
    for i in range(3):
        n = nbr[:, i]
        ok = (n >= 0)
        ok[ok] &= marked[n[ok]]
        rows.append(np.arange(len(ids))[ok])
        cols.append(pos[n[ok]])
    if extra_links:
        for a, b in extra_links:
            rows.append(np.array([pos[a]]))
            cols.append(np.array([pos[b]]))
    rows = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.array([], dtype=np.int64)
    g = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(len(ids), len(ids)))
    ncomp, labels = _cc(g, directed=False)
    comps = [ids[labels == c] for c in range(ncomp)]
    comps.sort(key=lambda a: int(a.min()))
    return comps


def fiber_components(h: DiscreteMap, y: complex, r: float) -> list:
    """Connected components of the preimage of the closed ball B(y, r) under
    the piecewise-linear map: triangles whose affine image meets the ball,
    joined across shared edges, plus the boundary-trace part: all boundary
    triangles whose boundary-edge image segments meet the ball are linked
    together (two interior components hanging off the same trace arc count
    as one fiber). Qualifying boundary triangles are always marked, since
    the edge segment lies in the triangle's image hull."""
    if r <= 0:
        raise ValueError("fiber radius must be positive")
    return _FiberMarker(h).components(y, r)


# -- degree -------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeComponent:
    triangle_ids: np.ndarray
    degree_winding: Optional[int]
    winding_raw: Optional[float]
    degree_jacobian: float
    closure_meets_boundary: bool


@dataclass(frozen=True)
class DegreeReport:
    target_point: complex
    radius: float
    components: tuple
    total_degree: int
    boundary_adjacent: bool


_BARY_LEVEL = 8


def _bary_grid(level: int = _BARY_LEVEL) -> np.ndarray:
    """Centroids of the level^2 congruent subtriangles of the reference
    triangle, as barycentric coordinates (level^2, 3)."""
    pts = []
    for i in range(level):
        for j in range(level - i):
            # upward subtriangle centroid
            l1 = (i + 1.0 / 3.0) / level
            l2 = (j + 1.0 / 3.0) / level
            pts.append((1 - l1 - l2, l1, l2))
            if i + j < level - 1:
                l1 = (i + 2.0 / 3.0) / level
                l2 = (j + 2.0 / 3.0) / level
                pts.append((1 - l1 - l2, l1, l2))
    return np.asarray(pts)


_BARY = _bary_grid()


def degree_in_preimage(h: DiscreteMap, y: complex, r: float) -> DegreeReport:
    """Per-component topological degree of the map over the ball B(y, r),
    estimated two ways: the winding of h - y along the component's boundary
    loops (outer loop plus holes, traversed with the region on the left),
    and the Jacobian integral over the clipped preimage divided by the ball
    area. Balls whose closure comes within r/2 of the trace curve yield a
    distinguished boundary-adjacent report; components touching the mesh
    boundary have their winding estimator disabled."""
    if r <= 0:
        raise ValueError("radius must be positive")
    y = complex(y)
    mesh = h.mesh
    trace = h.trace()
    trace_dist = float(_distance_to_polyline(np.array([y]), trace)[0])
    if trace_dist <= 1.5 * r:
        return DegreeReport(target_point=y, radius=r, components=(),
                            total_degree=0, boundary_adjacent=True)

    comps = fiber_components(h, y, r)
    fld = wirtinger(mesh, h.values)
    on_boundary = np.zeros(mesh.n_vertices, dtype=bool)
    on_boundary[mesh.boundary_loop] = True
    in_comp = np.zeros(mesh.n_triangles, dtype=bool)

    out = []
    total = 0
    for comp in comps:
        tris = mesh.triangles[comp]
        meets = bool(on_boundary[tris].any())
        # Jacobian estimator over the clipped preimage
        wvals = h.values[tris]                    # (k, 3)
        sub = _BARY @ wvals.T                     # (npts, k) affine values
        frac = (np.abs(sub - y) <= r).mean(axis=0)
        jac_int = float(np.sum(fld.jacobian[comp] * fld.area[comp] * frac))
        deg_j = jac_int / (np.pi * r * r)

        wind_raw = None
        wind = None
        if not meets:
            in_comp[comp] = True
            nbr = mesh.neighbors[comp]
            sweep = 0.0
            for i in range(3):
                n = nbr[:, i]
                outer = (n < 0) | (~in_comp[np.maximum(n, 0)])
                if not outer.any():
                    continue
                v1 = tris[outer, i]
                v2 = tris[outer, (i + 1) % 3]
                sweep += float(np.angle(
                    (h.values[v2] - y) / (h.values[v1] - y)).sum())
            in_comp[comp] = False
            wind_raw = sweep / (2.0 * np.pi)
            wind = int(np.round(wind_raw))
            total += wind
        out.append(DegreeComponent(
            triangle_ids=comp, degree_winding=wind, winding_raw=wind_raw,
            degree_jacobian=deg_j, closure_meets_boundary=meets))
    return DegreeReport(target_point=y, radius=r, components=tuple(out),
                        total_degree=total, boundary_adjacent=False)


def degree_equality_check(h: DiscreteMap, f_extension: DiscreteMap,
                          y: complex, r: float):
    """Compare the total degrees of two maps with identical traces over the
    same ball; returns (equal, degree_h, degree_f)."""
    if h.mesh is not f_extension.mesh and h.mesh.n_vertices != f_extension.mesh.n_vertices:
        raise ValueError("maps must share a mesh")
    if not np.array_equal(h.trace(), f_extension.trace()):
        raise ValueError("maps must have identical boundary values")
    rep_h = degree_in_preimage(h, y, r)
    rep_f = degree_in_preimage(f_extension, y, r)
    if rep_h.boundary_adjacent or rep_f.boundary_adjacent:
        raise ValueError("ball is boundary-adjacent; degrees undefined")
    return rep_h.total_degree == rep_f.total_degree, rep_h.total_degree, \
        rep_f.total_degree


# -- monotonicity -------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityReport:
    samples: tuple
    max_components: int
    verdict: str
    min_jacobian: float


def default_fiber_radius(mesh: UnitDiskMesh) -> float:
    """Point fibers are meaningless discretely; ball preimages at three
    element diameters stand in for them."""
    return 3.0 * mesh.median_element_diameter


def monotonicity_report(h: DiscreteMap, sample_grid: Sequence[complex],
                        r: Optional[float] = None) -> MonotonicityReport:
    """Fiber-component counts over a grid of target points; the verdict is
    monotone-consistent exactly when no sampled fiber splits."""
    if r is None:
        r = default_fiber_radius(h.mesh)
    marker = _FiberMarker(h)
    samples = []
    max_comp = 0
    for y in sample_grid:
        comps = marker.components(complex(y), r)
        samples.append({"y": complex(y), "r": float(r),
                        "component_count": len(comps)})
        max_comp = max(max_comp, len(comps))
    fld = wirtinger(h.mesh, h.values)
    verdict = "monotone-consistent" if max_comp <= 1 else "non-monotone"
    return MonotonicityReport(samples=tuple(samples), max_components=max_comp,
                              verdict=verdict,
                              min_jacobian=float(fld.jacobian.min()))


# -- conformal capacity --------------------------------------------------------

@dataclass(frozen=True)
class Condenser:
    compact_set: np.ndarray
    capacity: float


def capacity(condenser_tris: np.ndarray, mesh: UnitDiskMesh,
             rtol: float = 1e-10) -> float:
    """Conformal capacity of the condenser (K, disk): minimize the Dirichlet
    energy of piecewise-linear potentials equal to 1 on the vertices of the
    plate triangles and 0 on the outer boundary, via conjugate gradients on
    the stiffness system."""
    condenser_tris = np.asarray(condenser_tris, dtype=np.int64)
    if len(condenser_tris) == 0:
        raise ValueError("condenser plate is empty")
    plate_verts = np.unique(mesh.triangles[condenser_tris])
    on_bdr = np.zeros(mesh.n_vertices, dtype=bool)
    on_bdr[mesh.boundary_loop] = True
    if on_bdr[plate_verts].any():
        raise ValueError("condenser plate touches the mesh boundary")

    K = stiffness_matrix(mesh)
    u = np.zeros(mesh.n_vertices)
    u[plate_verts] = 1.0
    fixed = on_bdr.copy()
    fixed[plate_verts] = True
    free = ~fixed
    Kff = K[free][:, free]
    rhs = -(K[free][:, fixed] @ u[fixed])
    if Kff.shape[0]:
        sol, info = _cg(Kff, rhs, rtol=rtol, atol=0.0,
                        maxiter=10 * mesh.n_vertices)
        if info != 0:
            raise RuntimeError(f"capacity solve did not converge (info={info})")
        u[free] = sol
    return float(u @ (K @ u))


def rasterize_segment(a: float, b: float, mesh: UnitDiskMesh) -> np.ndarray:
    """Triangles of the mesh met by the real-axis segment [a, b], found by
    locating a dense prefix-stable sequence of sample points."""
    from matplotlib.tri import Triangulation, TrapezoidMapTriFinder
    if not (-1.0 < a < b < 1.0):
        raise ValueError("segment leaves the disk")
    step = mesh.median_element_diameter / 4.0
    xs = np.arange(a, b, step)
    xs = np.append(xs, b)
    tri = Triangulation(mesh.vertices.real, mesh.vertices.imag, mesh.triangles)
    finder = TrapezoidMapTriFinder(tri)
    found = finder(xs, np.zeros_like(xs))
    found = np.unique(found[found >= 0])
    return found.astype(np.int64)


def capacity_blowup_profile(a: float, eps_list: Sequence[float],
                            mesh: UnitDiskMesh) -> list:
    """Capacities of the segments [a, 1-eps] for decreasing eps; the
    sequence increases as the segment approaches the boundary."""
    eps_arr = [float(e) for e in eps_list]
    if a + max(eps_arr) >= 1.0 or min(eps_arr) <= 0.0 or not 0.0 < a < 1.0:
        raise ValueError("need 0 < a and 0 < eps with a + eps < 1")
    caps = []
    for e in eps_arr:
        tris = rasterize_segment(a, 1.0 - e, mesh)
        caps.append(capacity(tris, mesh))
    return caps


# -- oscillation ---------------------------------------------------------------

def _osc(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    out = 0.0
    for lo in range(0, len(values), 512):
        d = np.abs(values[lo:lo + 512, None] - values[None, :])
        out = max(out, float(d.max()))
    return out


def oscillation_profile(h: DiscreteMap, center: complex,
                        radii: Sequence[float]) -> list:
    """Oscillation of the map over balls and over their bounding circles.

    osc_ball uses all vertices in the closed ball. osc_circle uses the
    vertices lying on the circle itself whenever at least eight do (exact
    rings of the structured mesh); otherwise it falls back to the band of
    vertices within one element diameter of the circle.
    """
    center = complex(center)
    mesh = h.mesh
    diam = mesh.median_element_diameter
    dist = np.abs(mesh.vertices - center)
    out = []
    for r in radii:
        r = float(r)
        if r < diam:
            raise ValueError(f"radius {r} below mesh resolution {diam:.3g}")
        if abs(center) + r > 1.0 + 1e-12:
            raise ValueError("ball leaves the mesh")
        ball = dist <= r * (1.0 + 1e-12)
        on_circle = np.abs(dist - r) <= 1e-9 * max(r, 1.0)
        if on_circle.sum() >= 8:
            circ = on_circle
        else:
            circ = np.abs(dist - r) <= diam
        out.append({"r": r,
                    "osc_ball": _osc(h.values[ball]),
                    "osc_circle": _osc(h.values[circ])})
    return out


def oscillation_decay_check(h: DiscreteMap, center: complex, r: float,
                            R: float, K: float = 1.0):
    """Check the logarithmic oscillation decay
    osc(B_r)^2 <= 64 K^2 / log(R/r) * local Dirichlet energy over B_R.
    The constant 64 K^2 is a deliberately generous admissible choice: the
    check validates the decay shape, not a sharp constant. Returns
    (passed, lhs, rhs)."""
    center = complex(center)
    if not (0.0 < r < R / 2.0):
        raise ValueError("need 0 < r < R/2")
    if abs(center) + R > 1.0 + 1e-12:
        raise ValueError("outer ball leaves the mesh")
    mesh = h.mesh
    ball = np.abs(mesh.vertices - center) <= r * (1.0 + 1e-12)
    lhs = _osc(h.values[ball]) ** 2
    fld = wirtinger(mesh, h.values)
    local = np.abs(mesh.centroids - center) <= R
    energy = float(np.sum(fld.area[local] * 2.0 *
                          (np.abs(fld.hz[local]) ** 2 +
                           np.abs(fld.hzbar[local]) ** 2)))
    rhs = 64.0 * K * K / np.log(R / r) * energy
    return bool(lhs <= rhs), lhs, rhs
