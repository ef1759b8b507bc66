import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopflab.mesh import (build_disk_mesh, read_mesh_text, refine,
                          stiffness_matrix, wirtinger, write_mesh_text)


def test_smallest_legal_mesh():
    m = build_disk_mesh(1, 3)
    assert m.n_vertices == 4
    assert m.n_triangles == 3
    # inscribed equilateral triangle
    assert m.total_area == pytest.approx(3 * np.sqrt(3) / 4, rel=1e-14)


def test_vertex_count_formula():
    m = build_disk_mesh(2, 6)
    assert m.n_vertices == 19  # 1 + 6 + 12


def test_area_converges_to_pi():
    m = build_disk_mesh(64, 64)
    assert abs(m.total_area - np.pi) / np.pi < 1e-3


def test_area_within_one_percent_at_16_rings():
    m = build_disk_mesh(16, 8)
    assert abs(m.total_area - np.pi) / np.pi < 0.01


def test_rejects_degenerate_parameters():
    with pytest.raises(ValueError):
        build_disk_mesh(4, 2)
    with pytest.raises(ValueError):
        build_disk_mesh(0, 8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 10), st.integers(3, 14))
def test_mesh_invariants(rings, sectors):
    m = build_disk_mesh(rings, sectors)
    assert m.n_vertices == 1 + sectors * rings * (rings + 1) // 2
    assert np.all(m.signed_areas > 0)
    assert np.all(np.abs(m.vertices) <= 1 + 1e-12)
    bz = m.vertices[m.boundary_loop]
    assert np.all(np.abs(np.abs(bz) - 1) <= 1e-12)
    # single closed cycle visiting each boundary vertex once
    assert len(np.unique(m.boundary_loop)) == len(m.boundary_loop)
    assert len(m.boundary_loop) == rings * sectors
    ang = np.angle(bz)
    assert np.all(np.diff(np.unwrap(ang)) > 0)
    assert m.total_area < np.pi


def test_refine_doubles_rings_and_reduces_area_error():
    m8 = build_disk_mesh(8, 8)
    m16 = refine(m8)
    m32 = refine(m16)
    assert (m16.rings, m16.sectors) == (16, 8)
    errs = [abs(m.total_area - np.pi) for m in (m8, m16, m32)]
    assert errs[0] > errs[1] > errs[2]
    assert m16.n_vertices == 1 + 8 * 16 * 17 // 2


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_wirtinger_exact_on_affine_maps(a, b, c):
    m = build_disk_mesh(4, 6)
    fld = wirtinger(m, a * m.vertices + b * np.conj(m.vertices) + c)
    scale = max(abs(a), abs(b), 1.0)
    assert np.abs(fld.hz - a).max() <= 1e-13 * scale
    assert np.abs(fld.hzbar - b).max() <= 1e-13 * scale
    assert np.allclose(fld.jacobian, abs(a) ** 2 - abs(b) ** 2,
                       atol=1e-12 * scale ** 2)


def test_wirtinger_identity_and_reflection():
    m = build_disk_mesh(6, 8)
    f = wirtinger(m, m.vertices)
    assert np.allclose(f.hz, 1) and np.allclose(f.hzbar, 0)
    assert np.allclose(f.jacobian, 1)
    g = wirtinger(m, np.conj(m.vertices))
    assert np.allclose(g.hz, 0) and np.allclose(g.hzbar, 1)
    assert np.allclose(g.jacobian, -1)


def test_wirtinger_square_map_fit_bound():
    m = build_disk_mesh(8, 8)
    fld = wirtinger(m, m.vertices ** 2)
    cent = m.centroids
    diam = m.element_diameters
    assert np.all(np.abs(fld.hz - 2 * cent) <= 2 * diam + 1e-12)


def test_wirtinger_consistency_first_order():
    errs = []
    for rings in (8, 16, 32):
        m = build_disk_mesh(rings, 8)
        fld = wirtinger(m, np.exp(m.vertices))
        errs.append(np.abs(fld.hz - np.exp(m.centroids)).max())
    assert errs[1] <= 0.7 * errs[0]
    assert errs[2] <= 0.7 * errs[1]


def test_wirtinger_rejects_bad_input():
    m = build_disk_mesh(4, 6)
    with pytest.raises(ValueError):
        wirtinger(m, np.zeros(3, dtype=complex))
    vals = m.vertices.copy()
    vals[0] = np.nan
    with pytest.raises(ValueError):
        wirtinger(m, vals)


def test_jacobian_algebraic_identity():
    m = build_disk_mesh(6, 10)
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(m.n_vertices) + 1j * rng.standard_normal(m.n_vertices)
    fld = wirtinger(m, vals)
    assert np.allclose(fld.jacobian, np.abs(fld.hz) ** 2 - np.abs(fld.hzbar) ** 2,
                       atol=1e-12)


def test_stiffness_energy_matches_wirtinger_energy():
    m = build_disk_mesh(8, 8)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal(m.n_vertices) + 1j * rng.standard_normal(m.n_vertices)
    K = stiffness_matrix(m)
    quad = float(vals.real @ (K @ vals.real) + vals.imag @ (K @ vals.imag))
    fld = wirtinger(m, vals)
    direct = float(np.sum(fld.area * 2 * (np.abs(fld.hz) ** 2 +
                                          np.abs(fld.hzbar) ** 2)))
    assert quad == pytest.approx(direct, rel=1e-12)


def test_text_serialization_round_trip():
    m = build_disk_mesh(3, 5)
    text = write_mesh_text(m)
    header = text.splitlines()[0].split()
    assert [int(t) for t in header] == [m.n_vertices, m.n_triangles]
    verts, tris = read_mesh_text(text)
    assert np.allclose(verts, m.vertices)
    assert np.array_equal(tris, m.triangles)
