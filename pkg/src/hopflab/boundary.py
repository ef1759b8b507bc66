"""Boundary curve specifications, the harmonic (Poisson-kernel) extension,
and the double-integral trace energy that characterizes boundary data of
finite-energy extensions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gallery import GalleryMap, get_gallery_map
from .mesh import UnitDiskMesh, stiffness_matrix

__all__ = [
    "BoundarySpec",
    "DiscreteMap",
    "sample_boundary",
    "harmonic_extension",
    "douglas_energy",
    "winding_number",
    "polyline_is_simple",
    "poisson_residual",
    "laplacian_residual",
    "min_interior_cone_angle",
]

INJECTIVITY_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteMap:
    """Per-vertex complex values on a carrier mesh; the values on the
    boundary loop are the map's trace."""

    values: np.ndarray
    mesh: UnitDiskMesh

    def __post_init__(self):
        if self.values.shape != (self.mesh.n_vertices,):
            raise ValueError("one value per mesh vertex required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("map values must be finite")
        self.values.flags.writeable = False

    @classmethod
    def from_function(cls, mesh: UnitDiskMesh, fn) -> "DiscreteMap":
        return cls(np.asarray(fn(mesh.vertices), dtype=complex), mesh)

    def trace(self) -> np.ndarray:
        return self.values[self.mesh.boundary_loop]


@dataclass(frozen=True)
class BoundarySpec:
    """A parametrized boundary curve theta -> f(e^{i theta}).

    Either backed by a closed-form gallery map restricted to the unit circle
    (kind 'gallery:<name>') or by a dense sample table with monotone angles
    (kind 'samples'). An optional target polygon lets the spec check that
    sampled image points actually lie on the intended boundary curve.
    """

    kind: str
    theta: Optional[np.ndarray] = None
    fvals: Optional[np.ndarray] = None
    polygon: Optional[np.ndarray] = None
    _gmap: Optional[GalleryMap] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_gallery(cls, name: str, polygon_samples: int = 720) -> "BoundarySpec":
        gmap = get_gallery_map(name)
        ang = 2.0 * np.pi * np.arange(polygon_samples) / polygon_samples
        poly = np.asarray(gmap.evaluate(np.exp(1j * ang)), dtype=complex)
        return cls(kind=f"gallery:{name}", polygon=poly, _gmap=gmap)

    @classmethod
    def from_samples(cls, theta, fvals, polygon=None) -> "BoundarySpec":
        theta = np.asarray(theta, dtype=float)
        fvals = np.asarray(fvals, dtype=complex)
        if theta.ndim != 1 or theta.shape != fvals.shape:
            raise ValueError("theta and fvals must be 1-d arrays of equal length")
        if len(theta) < 3:
            raise ValueError("need at least 3 samples")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("sample angles must be strictly increasing")
        if theta[0] < 0 or theta[-1] >= 2.0 * np.pi:
            raise ValueError("sample angles must lie in [0, 2*pi)")
        poly = None if polygon is None else np.asarray(polygon, dtype=complex)
        return cls(kind="samples", theta=theta, fvals=fvals, polygon=poly)

    @classmethod
    def from_json(cls, obj) -> "BoundarySpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj["kind"]
        poly = obj.get("polygon")
        if kind.startswith("gallery:"):
            spec = cls.from_gallery(kind.split(":", 1)[1])
            if poly is not None:
                poly = np.array([x + 1j * y for x, y in poly])
                spec = cls(kind=spec.kind, polygon=poly, _gmap=spec._gmap)
            return spec
        if kind == "samples":
            samples = np.asarray(obj["samples"], dtype=float)
            poly_c = None
            if poly is not None:
                poly_c = np.array([x + 1j * y for x, y in poly])
            return cls.from_samples(samples[:, 0], samples[:, 1] + 1j * samples[:, 2],
                                    poly_c)
        raise ValueError(f"unknown boundary spec kind {kind!r}")

    def to_json(self) -> dict:
        obj: dict = {"kind": self.kind}
        if self.kind == "samples":
            obj["samples"] = [[float(t), float(v.real), float(v.imag)]
                              for t, v in zip(self.theta, self.fvals)]
        if self.polygon is not None:
            obj["polygon"] = [[float(p.real), float(p.imag)] for p in self.polygon]
        return obj

    def evaluate(self, theta) -> np.ndarray:
        """f at angles theta; sample tables are interpolated periodically."""
        theta = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
        if self._gmap is not None:
            return np.asarray(self._gmap.evaluate(np.exp(1j * theta)), dtype=complex)
        tgrid = np.concatenate([self.theta, [self.theta[0] + 2.0 * np.pi]])
        vgrid = np.concatenate([self.fvals, [self.fvals[0]]])
        re = np.interp(theta, tgrid, vgrid.real, period=2.0 * np.pi)
        im = np.interp(theta, tgrid, vgrid.imag, period=2.0 * np.pi)
        return re + 1j * im

    def dense_samples(self, n: int = 1024) -> np.ndarray:
        if self.kind == "samples":
            return self.fvals
        ang = 2.0 * np.pi * np.arange(n) / n
        return self.evaluate(ang)

    def validate(self) -> None:
        """Homeomorphism proxy: pairwise injectivity of the samples, and
        (when a target polygon is present) image points on the polygon.

        Raises ValueError on failure. Orientation is reported separately by
        winding_number, so a doubly-winding curve fails here through its
        repeated values rather than through the winding count.
        """
        n = 1024
        if self._gmap is not None and self.polygon is not None:
            # sample at the polygon's own angles so the on-polygon check is
            # not polluted by the polygon's chordal approximation error
            n = len(self.polygon)
        vals = self.dense_samples(n)
        if _min_pairwise_distance(vals) < INJECTIVITY_TOL:
            raise ValueError("boundary samples are not injective "
                             f"(pairwise tolerance {INJECTIVITY_TOL})")
        if self.polygon is not None and len(self.polygon) >= 3:
            diam = _set_diameter(self.polygon)
            d = _distance_to_polyline(vals, self.polygon, closed=True)
            if d.max() > 1e-6 * diam:
                raise ValueError("sampled image points do not lie on the "
                                 "target polygon")

    def winding(self) -> int:
        """Winding of the sampled curve around a representative interior
        point of its image polygon."""
        vals = self.dense_samples()
        return winding_number(vals, _polygon_centroid(vals))


def _min_pairwise_distance(vals: np.ndarray, chunk: int = 512) -> float:
    n = len(vals)
    best = np.inf
    for lo in range(0, n, chunk):
        block = vals[lo:lo + chunk, None] - vals[None, :]
        d = np.abs(block)
        ii = np.arange(lo, min(lo + chunk, n))
        d[ii - lo, ii] = np.inf
        best = min(best, float(d.min()))
    return best


def _set_diameter(vals: np.ndarray) -> float:
    return float(max(np.ptp(vals.real), np.ptp(vals.imag)))


def _polygon_centroid(vals: np.ndarray) -> complex:
    """Area centroid of a closed polygon given by its vertices."""
    z = vals
    zn = np.roll(z, -1)
    cross = z.real * zn.imag - zn.real * z.imag
    area = cross.sum() / 2.0
    if abs(area) < 1e-300:
        return complex(z.mean())
    cx = ((z.real + zn.real) * cross).sum() / (6.0 * area)
    cy = ((z.imag + zn.imag) * cross).sum() / (6.0 * area)
    return complex(cx, cy)


def _distance_to_polyline(points: np.ndarray, poly: np.ndarray,
                          closed: bool = True) -> np.ndarray:
    """Distance from each point to a polyline (vectorized over segments)."""
    a = poly
    b = np.roll(poly, -1) if closed else poly[1:]
    if not closed:
        a = poly[:-1]
    ab = b - a
    denom = np.maximum(np.abs(ab) ** 2, 1e-300)
    p = points[:, None]
    t = np.clip(((p - a[None, :]) * np.conj(ab[None, :])).real / denom[None, :],
                0.0, 1.0)
    proj = a[None, :] + t * ab[None, :]
    return np.abs(p - proj).min(axis=1)


def winding_number(values: np.ndarray, point: complex) -> int:
    """Winding of the closed polyline of values around point."""
    w = values - point
    if np.any(np.abs(w) < 1e-300):
        raise ValueError("winding undefined: curve passes through the point")
    ratios = np.roll(w, -1) / w
    return int(np.round(np.angle(ratios).sum() / (2.0 * np.pi)))


def polyline_is_simple(values: np.ndarray) -> bool:
    """True when no two non-adjacent segments of the closed polyline cross."""
    n = len(values)
    a = values
    b = np.roll(values, -1)

    def orient(p, q, r):
        return np.sign((q - p).real * (r - p).imag - (q - p).imag * (r - p).real)

    for i in range(n):
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if len(js) == 0:
            continue
        o1 = orient(a[i], b[i], a[js])
        o2 = orient(a[i], b[i], b[js])
        o3 = orient(a[js], b[js], a[i])
        o4 = orient(a[js], b[js], b[i])
        if np.any((o1 != o2) & (o3 != o4) & (o1 * o2 != 0) & (o3 * o4 != 0)):
            return False
    return True


def min_interior_cone_angle(polygon: np.ndarray) -> float:
    """Smallest interior angle of a counterclockwise polygon, in radians.
    Recorded as boundary-regularity metadata; no threshold is enforced."""
    prev = np.roll(polygon, 1)
    nxt = np.roll(polygon, -1)
    v1 = prev - polygon
    v2 = nxt - polygon
    ang = np.angle(v1 / v2)
    ang = np.mod(ang, 2.0 * np.pi)
    return float(ang.min())


def sample_boundary(spec: BoundarySpec, mesh: UnitDiskMesh) -> np.ndarray:
    """Evaluate the boundary curve at the angles of the mesh boundary
    vertices, preserving cyclic order. Rejects sample tables that fail the
    injectivity proxy."""
    spec.validate()
    return spec.evaluate(mesh.boundary_angles)


def harmonic_extension(boundary_values: np.ndarray, mesh: UnitDiskMesh) -> DiscreteMap:
    """Harmonic extension of per-boundary-vertex values by Poisson-kernel
    quadrature over the boundary samples.

    The kernel weights are normalized so that constants extend exactly and
    real data obeys the maximum principle exactly; trigonometric polynomials
    of low frequency extend to the corresponding z-powers to aliasing
    accuracy. Boundary values are copied verbatim.
    """
    boundary_values = np.asarray(boundary_values, dtype=complex)
    nb = len(mesh.boundary_loop)
    if boundary_values.shape != (nb,):
        raise ValueError(f"expected {nb} boundary values")
    interior = mesh.interior_mask()
    zi = mesh.vertices[interior]
    if np.any(np.abs(zi) > 1.0 - 1e-12):
        raise ValueError("interior evaluation point within 1e-12 of the boundary")

    theta = mesh.boundary_angles
    xb = np.cos(theta)
    yb = np.sin(theta)
    # trapezoid weights on the (uniform) periodic angle grid
    wts = 0.5 * np.mod(np.roll(theta, -1) - np.roll(theta, 1), 2.0 * np.pi)
    fmat = np.stack([boundary_values.real, boundary_values.imag], axis=1)

    values = np.empty(mesh.n_vertices, dtype=complex)
    values[mesh.boundary_loop] = boundary_values

    # chunk interior points to bound the (points x boundary) kernel matrix
    chunk = max(1, int(2e7) // max(nb, 1))
    idx = np.nonzero(interior)[0]
    for lo in range(0, len(idx), chunk):
        sel = idx[lo:lo + chunk]
        z = mesh.vertices[sel]
        dist2 = (z.real[:, None] - xb) ** 2 + (z.imag[:, None] - yb) ** 2
        ker = (wts * (1.0 - np.abs(z) ** 2)[:, None]) / dist2
        num = ker @ fmat
        den = ker.sum(axis=1)
        values[sel] = (num[:, 0] + 1j * num[:, 1]) / den
    return DiscreteMap(values=values, mesh=mesh)


def douglas_energy(boundary_values: np.ndarray) -> float:
    """Trapezoid approximation of the double integral over the circle pair
    of |f(z)-f(z')|^2 / |z-z'|^2, with the removable diagonal skipped
    (pairs closer than half the angular grid spacing are excluded).

    Finiteness of this integral characterizes traces of finite-energy disk
    maps; for the identity it tends to (2*pi)^2.
    """
    f = np.asarray(boundary_values, dtype=complex)
    n = len(f)
    if n < 3:
        raise ValueError("need at least 3 boundary samples")
    h = 2.0 * np.pi / n
    theta = h * np.arange(n)
    z = np.exp(1j * theta)
    total = 0.0
    chunk = max(1, int(2e7) // n)
    for lo in range(0, n, chunk):
        dz2 = np.abs(z[lo:lo + chunk, None] - z[None, :]) ** 2
        df2 = np.abs(f[lo:lo + chunk, None] - f[None, :]) ** 2
        keep = dz2 >= (h / 2.0) ** 2
        total += float((df2[keep] / dz2[keep]).sum())
    return total * h * h


def poisson_residual(dmap: DiscreteMap) -> float:
    """Discrete-harmonicity residual: the largest deviation of the interior
    values from the Poisson-kernel extension of the map's own trace. Zero
    (to quadrature accuracy) exactly for harmonic maps."""
    ext = harmonic_extension(dmap.trace(), dmap.mesh)
    interior = dmap.mesh.interior_mask()
    return float(np.abs(dmap.values[interior] - ext.values[interior]).max())


def laplacian_residual(dmap: DiscreteMap) -> float:
    """Max norm over interior vertices of the cotangent-weighted discrete
    Laplacian applied to the map; tends to 0 under refinement for smooth
    harmonic data."""
    K = stiffness_matrix(dmap.mesh)
    r = K @ dmap.values
    return float(np.abs(r[dmap.mesh.interior_mask()]).max())
