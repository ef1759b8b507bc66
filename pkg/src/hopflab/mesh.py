"""Concentric-ring triangulations of the closed unit disk and per-element
Wirtinger derivatives of piecewise-linear complex maps.

The mesh places ring k (1 <= k <= rings) at radius k/rings carrying
k*sectors equally spaced vertices, so both the radial and the angular
vertex spacing scale like 1/rings and element aspect ratios stay bounded
as the mesh is refined. All triangles are oriented counterclockwise.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UnitDiskMesh",
    "WirtingerField",
    "build_disk_mesh",
    "wirtinger",
    "refine",
    "write_mesh_text",
    "read_mesh_text",
]


@dataclass(frozen=True)
class UnitDiskMesh:
    """Triangulation of the closed unit disk.

    Attributes
    ----------
    vertices : complex ndarray, shape (nv,)
        Vertex positions, |z| <= 1; boundary vertices lie on the unit circle.
    triangles : int ndarray, shape (nt, 3)
        Vertex index triples, counterclockwise.
    boundary_loop : int ndarray
        Boundary vertex indices in counterclockwise cyclic order.
    rings, sectors : int
        Construction parameters.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loop: np.ndarray
    rings: int
    sectors: int
    # caches filled lazily; dicts so the dataclass can stay frozen
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.vertices.flags.writeable = False
        self.triangles.flags.writeable = False
        self.boundary_loop.flags.writeable = False

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def corners(self) -> np.ndarray:
        """Complex vertex positions per triangle, shape (nt, 3)."""
        if "corners" not in self._cache:
            self._cache["corners"] = self.vertices[self.triangles]
        return self._cache["corners"]

    @property
    def signed_areas(self) -> np.ndarray:
        if "areas" not in self._cache:
            c = self.corners
            e1 = c[:, 1] - c[:, 0]
            e2 = c[:, 2] - c[:, 0]
            self._cache["areas"] = 0.5 * np.imag(np.conj(e1) * e2)
        return self._cache["areas"]

    @property
    def total_area(self) -> float:
        return float(self.signed_areas.sum())

    @property
    def centroids(self) -> np.ndarray:
        if "centroids" not in self._cache:
            self._cache["centroids"] = self.corners.mean(axis=1)
        return self._cache["centroids"]

    @property
    def element_diameters(self) -> np.ndarray:
        """Longest edge of each triangle."""
        if "diam" not in self._cache:
            c = self.corners
            d = np.maximum(np.abs(c[:, 1] - c[:, 0]),
                           np.maximum(np.abs(c[:, 2] - c[:, 1]),
                                      np.abs(c[:, 0] - c[:, 2])))
            self._cache["diam"] = d
        return self._cache["diam"]

    @property
    def median_element_diameter(self) -> float:
        return float(np.median(self.element_diameters))

    @property
    def neighbors(self) -> np.ndarray:
        """Triangle adjacent across edge (i, i+1) of each triangle, -1 if none.

        Entry [t, i] is the triangle sharing the edge from local vertex i to
        local vertex (i+1) % 3 of triangle t.
        """
        if "neighbors" not in self._cache:
            tri = self.triangles
            nt = len(tri)
            edges = np.stack([tri, np.roll(tri, -1, axis=1)], axis=-1).reshape(-1, 2)
            key = np.sort(edges, axis=1)
            order = np.lexsort((key[:, 1], key[:, 0]))
            k = key[order]
            same = np.all(k[:-1] == k[1:], axis=1)
            nbr = np.full(3 * nt, -1, dtype=np.int64)
            a = order[:-1][same]
            b = order[1:][same]
            nbr[a] = b // 3
            nbr[b] = a // 3
            self._cache["neighbors"] = nbr.reshape(nt, 3)
        return self._cache["neighbors"]

    @property
    def boundary_triangles(self) -> np.ndarray:
        """Indices of triangles owning at least one boundary edge."""
        if "bdr_tris" not in self._cache:
            self._cache["bdr_tris"] = np.nonzero((self.neighbors < 0).any(axis=1))[0]
        return self._cache["bdr_tris"]

    @property
    def boundary_angles(self) -> np.ndarray:
        """Angles of the boundary vertices, in boundary_loop order."""
        if "bdr_ang" not in self._cache:
            z = self.vertices[self.boundary_loop]
            self._cache["bdr_ang"] = np.mod(np.angle(z), 2.0 * np.pi)
        return self._cache["bdr_ang"]

    def interior_mask(self) -> np.ndarray:
        m = np.ones(self.n_vertices, dtype=bool)
        m[self.boundary_loop] = False
        return m


@dataclass(frozen=True)
class WirtingerField:
    """Per-triangle differential data of a piecewise-linear complex map.

    hz and hzbar are the constant Wirtinger derivatives of the affine
    interpolant on each triangle; jacobian = |hz|^2 - |hzbar|^2.
    """

    hz: np.ndarray
    hzbar: np.ndarray
    jacobian: np.ndarray
    area: np.ndarray

    def __post_init__(self):
        for a in (self.hz, self.hzbar, self.jacobian, self.area):
            a.flags.writeable = False


def build_disk_mesh(rings: int, sectors: int) -> UnitDiskMesh:
    """Build the concentric-ring triangulation of the closed unit disk.

    Ring k sits at radius k/rings and carries k*sectors equally spaced
    vertices starting at angle 0; vertex count is
    1 + sectors*rings*(rings+1)/2.

    Raises
    ------
    ValueError
        If rings < 1 or sectors < 3 (degenerate triangles).
    """
    rings = int(rings)
    sectors = int(sectors)
    if rings < 1:
        raise ValueError(f"rings must be >= 1, got {rings}")
    if sectors < 3:
        raise ValueError(f"sectors must be >= 3, got {sectors}")

    verts = [np.zeros(1, dtype=complex)]
    ring_start = [0, 1]  # first vertex index of ring k (ring 0 = center)
    for k in range(1, rings + 1):
        n = k * sectors
        theta = 2.0 * np.pi * np.arange(n) / n
        verts.append((k / rings) * np.exp(1j * theta))
        ring_start.append(ring_start[-1] + n)
    vertices = np.concatenate(verts)

    tris = []
    # center fan
    first = ring_start[1]
    n1 = sectors
    for j in range(n1):
        tris.append((0, first + j, first + (j + 1) % n1))
    # annulus strips: zig-zag merge by unwrapped angle
    for k in range(2, rings + 1):
        inner0 = ring_start[k - 1]
        outer0 = ring_start[k]
        ni = (k - 1) * sectors
        no = k * sectors
        i = o = 0
        while i < ni or o < no:
            cur_in = inner0 + (i % ni)
            cur_out = outer0 + (o % no)
            nxt_in_ang = (i + 1) / ni if i < ni else np.inf
            nxt_out_ang = (o + 1) / no if o < no else np.inf
            if nxt_out_ang <= nxt_in_ang:
                tris.append((cur_in, cur_out, outer0 + (o + 1) % no))
                o += 1
            else:
                tris.append((cur_in, cur_out, inner0 + (i + 1) % ni))
                i += 1
    triangles = np.asarray(tris, dtype=np.int64)

    boundary_loop = np.arange(ring_start[rings], ring_start[rings] + rings * sectors,
                              dtype=np.int64)
    mesh = UnitDiskMesh(vertices=vertices, triangles=triangles,
                        boundary_loop=boundary_loop, rings=rings, sectors=sectors)
    if not np.all(mesh.signed_areas > 0):
        raise AssertionError("mesh construction produced non-positive triangle areas")
    return mesh


def refine(mesh: UnitDiskMesh) -> UnitDiskMesh:
    """Return the mesh with doubled ring count (same sectors)."""
    return build_disk_mesh(2 * mesh.rings, mesh.sectors)


def wirtinger(mesh: UnitDiskMesh, values: np.ndarray) -> WirtingerField:
    """Per-triangle Wirtinger derivatives of the affine interpolant of
    per-vertex complex values.

    For a triangle with corners z1, z2, z3 and values w1, w2, w3 the affine
    interpolant is h(z) = a z + b z~ + c; this returns a as hz and b as hzbar,
    together with jacobian = |a|^2 - |b|^2 and the element area.

    Raises
    ------
    ValueError
        If the value count does not match the vertex count, or any value is
        not finite.
    """
    values = np.asarray(values, dtype=complex)
    if values.shape != (mesh.n_vertices,):
        raise ValueError(
            f"expected {mesh.n_vertices} vertex values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("vertex values must be finite")

    c = mesh.corners
    w = values[mesh.triangles]
    e1 = c[:, 1] - c[:, 0]
    e2 = c[:, 2] - c[:, 0]
    d1 = w[:, 1] - w[:, 0]
    d2 = w[:, 2] - w[:, 0]
    det = e1 * np.conj(e2) - e2 * np.conj(e1)  # = -4i * area
    a = (d1 * np.conj(e2) - d2 * np.conj(e1)) / det
    b = (e1 * d2 - e2 * d1) / det
    jac = (a * np.conj(a)).real - (b * np.conj(b)).real
    return WirtingerField(hz=a, hzbar=b, jacobian=jac,
                          area=mesh.signed_areas.copy())


def stiffness_matrix(mesh: UnitDiskMesh):
    """P1 stiffness matrix K with K[i,j] = integral of grad(phi_i).grad(phi_j);
    for per-vertex values u the quadratic form u.K.u is the Dirichlet energy
    of the piecewise-linear interpolant of u. Returns a CSR matrix."""
    from scipy import sparse

    c = mesh.corners
    areas = mesh.signed_areas
    # edge vector opposite local vertex i (as 2-vectors)
    opp = np.stack([c[:, 2] - c[:, 1], c[:, 0] - c[:, 2], c[:, 1] - c[:, 0]], axis=1)
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            dot = opp[:, i].real * opp[:, j].real + opp[:, i].imag * opp[:, j].imag
            rows.append(mesh.triangles[:, i])
            cols.append(mesh.triangles[:, j])
            vals.append(dot / (4.0 * areas))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    n = mesh.n_vertices
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def write_mesh_text(mesh: UnitDiskMesh) -> str:
    """Serialize to the plain-text format: 'ND NT' header, ND lines 'x y',
    NT lines 'i j k' (0-based)."""
    out = io.StringIO()
    out.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
    for z in mesh.vertices:
        out.write(f"{z.real:.17g} {z.imag:.17g}\n")
    for i, j, k in mesh.triangles:
        out.write(f"{i} {j} {k}\n")
    return out.getvalue()


def read_mesh_text(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse the plain-text mesh format; returns (vertices, triangles)."""
    lines = text.strip().splitlines()
    nd, nt = (int(t) for t in lines[0].split())
    verts = np.array([[float(t) for t in ln.split()] for ln in lines[1:1 + nd]])
    tris = np.array([[int(t) for t in ln.split()] for ln in lines[1 + nd:1 + nd + nt]],
                    dtype=np.int64)
    return verts[:, 0] + 1j * verts[:, 1], tris
