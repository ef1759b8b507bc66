import numpy as np
import pytest

from hopflab.boundary import DiscreteMap
from hopflab.gallery import example2_map, fig1_map, square_fold_disk_map
from hopflab.topology import (capacity, capacity_blowup_profile,
                              default_fiber_radius, degree_equality_check,
                              degree_in_preimage, fiber_components,
                              monotonicity_report, oscillation_decay_check,
                              oscillation_profile, rasterize_segment)


def _disk_plate(mesh, radius):
    return np.nonzero(np.all(
        np.abs(mesh.vertices[mesh.triangles]) <= radius + 1e-12, axis=1))[0]


# -- fibers ---------------------------------------------------------------------

def test_identity_fiber_is_single(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    assert len(fiber_components(h, 0.3, 0.05)) == 1


def test_square_map_fiber_splits(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices ** 2, mesh=m)
    comps = fiber_components(h, 0.25, 0.01)
    assert len(comps) == 2
    centers = sorted(complex(m.centroids[c].mean()).real for c in comps)
    assert centers[0] == pytest.approx(-0.5, abs=0.05)
    assert centers[1] == pytest.approx(0.5, abs=0.05)


def test_collapse_map_fiber_circle_plus_point(disk):
    m = disk(32, 8)
    h = DiscreteMap.from_function(m, example2_map)
    comps = fiber_components(h, 0.5, 0.01)
    assert len(comps) == 2
    radii = sorted(np.abs(m.centroids[c]).mean() for c in comps)
    assert radii[0] == pytest.approx(0.25, abs=0.05)
    assert radii[1] == pytest.approx(0.75, abs=0.05)
    # a point below the collapsed range has a single preimage
    assert len(fiber_components(h, -0.5, 0.01)) == 1


def test_fiber_radius_validation(disk):
    m = disk(8, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    with pytest.raises(ValueError):
        fiber_components(h, 0.0, -1.0)


def test_boundary_arc_adjacency_merges_trace_fiber(disk):
    # map whose fiber over a trace point consists of two interior prongs
    # joined only through the boundary arc
    m = disk(24, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    y = complex(m.vertices[m.boundary_loop[0]])  # = 1
    comps = fiber_components(h, y, 2.5 * m.median_element_diameter)
    assert len(comps) == 1


# -- degree ---------------------------------------------------------------------

def test_degree_of_identity(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    rep = degree_in_preimage(h, 0.0, 0.5)
    assert rep.total_degree == 1
    assert len(rep.components) == 1
    c = rep.components[0]
    assert c.degree_winding == 1
    assert abs(c.degree_jacobian - 1) <= 0.1
    assert not c.closure_meets_boundary


def test_degree_of_square_map(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices ** 2, mesh=m)
    rep = degree_in_preimage(h, 0.0, 0.25)
    assert rep.total_degree == 2
    assert len(rep.components) == 1
    assert abs(rep.components[0].degree_jacobian - 2) <= 0.1
    assert abs(rep.components[0].winding_raw - 2) <= 0.1


def test_degree_outside_image(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    rep = degree_in_preimage(h, 2.0, 0.4)
    assert rep.components == () and rep.total_degree == 0
    assert not rep.boundary_adjacent


def test_boundary_adjacent_outcome(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    rep = degree_in_preimage(h, 0.9, 0.2)
    assert rep.boundary_adjacent


def test_degree_locality(disk):
    m = disk(32, 8)
    base = m.vertices ** 2
    rep0 = degree_in_preimage(DiscreteMap(values=base.copy(), mesh=m), 0.0, 0.25)
    vals = base.copy()
    far = np.abs(m.vertices) > 0.8
    far[m.boundary_loop] = False
    vals[far] += 0.3 + 0.2j
    rep1 = degree_in_preimage(DiscreteMap(values=vals, mesh=m), 0.0, 0.25)
    assert rep0.total_degree == rep1.total_degree == 2
    assert rep0.components[0].degree_jacobian == pytest.approx(
        rep1.components[0].degree_jacobian, rel=1e-12)


def test_degree_equality_for_fixed_trace(disk):
    m = disk(24, 8)
    f = DiscreteMap(values=m.vertices.copy(), mesh=m)
    rng = np.random.default_rng(5)
    for _ in range(3):
        noise = 0.08 * (rng.standard_normal(m.n_vertices) +
                        1j * rng.standard_normal(m.n_vertices))
        noise[m.boundary_loop] = 0
        h = DiscreteMap(values=m.vertices + noise, mesh=m)
        equal, dh, df = degree_equality_check(h, f, 0.0, 0.3)
        assert equal and dh == df == 1


def test_degree_equality_rejects_mismatched_traces(disk):
    m = disk(12, 8)
    f = DiscreteMap(values=m.vertices.copy(), mesh=m)
    g = DiscreteMap(values=1.1 * m.vertices, mesh=m)
    with pytest.raises(ValueError, match="identical boundary"):
        degree_equality_check(f, g, 0.0, 0.2)


# -- monotonicity ----------------------------------------------------------------

def test_identity_is_monotone_consistent(disk):
    m = disk(20, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    grid = [complex(x, y) for x in np.linspace(-0.7, 0.7, 20)
            for y in np.linspace(-0.7, 0.7, 20)]
    rep = monotonicity_report(h, grid)
    assert rep.verdict == "monotone-consistent"
    assert rep.max_components == 1
    assert rep.min_jacobian == pytest.approx(1.0, abs=1e-12)


def test_collapse_map_is_non_monotone_on_segment_samples(disk):
    m = disk(32, 8)
    h = DiscreteMap.from_function(m, example2_map)
    rep = monotonicity_report(h, np.linspace(0.1, 0.9, 9), r=0.01)
    assert rep.verdict == "non-monotone"
    assert rep.max_components == 2


def test_square_map_is_non_monotone(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices ** 2, mesh=m)
    rep = monotonicity_report(h, np.linspace(0.1, 0.8, 8), r=0.02)
    assert rep.verdict == "non-monotone"


# -- capacity --------------------------------------------------------------------

def test_capacity_of_centered_disk_plates(disk):
    m = disk(64, 8)
    cap = capacity(_disk_plate(m, np.exp(-1.0)), m)
    assert abs(cap - 2 * np.pi) / (2 * np.pi) < 0.05
    cap05 = capacity(_disk_plate(m, 0.5), m)
    assert cap05 == pytest.approx(2 * np.pi / np.log(2), rel=0.02)


def test_capacity_monotone_in_plate(disk):
    m = disk(32, 8)
    small = capacity(_disk_plate(m, 0.3), m)
    large = capacity(_disk_plate(m, 0.5), m)
    assert small <= large


def test_capacity_validation(disk):
    m = disk(16, 8)
    with pytest.raises(ValueError, match="empty"):
        capacity(np.array([], dtype=int), m)
    with pytest.raises(ValueError, match="boundary"):
        capacity(np.arange(m.n_triangles), m)


def test_capacity_mobius_invariance_proxy(disk):
    m = disk(64, 8)
    base = capacity(_disk_plate(m, 0.3), m)
    # image of |z| <= 0.3 under (z - 0.3)/(1 - 0.3 z): a disk on the real axis
    a, b = (0.3 - 0.3) / (1 - 0.09), (-0.3 - 0.3) / (1 + 0.09)
    center, radius = (a + b) / 2, abs(a - b) / 2
    plate = np.nonzero(np.all(
        np.abs(m.vertices[m.triangles] - center) <= radius + 1e-12, axis=1))[0]
    moved = capacity(plate, m)
    assert abs(moved - base) / base < 0.05


def test_segment_capacity_profile_increases(disk):
    m = disk(64, 8)
    caps = capacity_blowup_profile(0.5, [0.2, 0.1, 0.05], m)
    assert all(np.diff(caps) > 0)


def test_tiny_segment_has_small_positive_capacity(disk):
    m = disk(64, 8)
    cap = capacity_blowup_profile(0.5, [0.45], m)[0]
    assert 0 < cap < 3.0


def test_segment_profile_refinement_stability(disk):
    # thin-plate capacities converge like O(1/log h); the per-doubling drift
    # measures 4-8 percent at these resolutions
    caps32 = capacity_blowup_profile(0.5, [0.2, 0.1], disk(32, 8))
    caps64 = capacity_blowup_profile(0.5, [0.2, 0.1], disk(64, 8))
    for c32, c64 in zip(caps32, caps64):
        assert abs(c64 - c32) / c32 < 0.10


def test_segment_validation(disk):
    m = disk(16, 8)
    with pytest.raises(ValueError):
        capacity_blowup_profile(0.5, [0.6], m)
    with pytest.raises(ValueError):
        rasterize_segment(0.5, 1.2, m)


# -- oscillation -----------------------------------------------------------------

def test_identity_oscillation_is_diametric(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    for p in oscillation_profile(h, 0.0, [0.25, 0.5]):
        assert p["osc_ball"] == pytest.approx(2 * p["r"], rel=1e-9)
        assert p["osc_circle"] == pytest.approx(2 * p["r"], rel=1e-9)


def test_collapse_map_fails_oscillation(disk):
    m = disk(40, 8)  # radius 0.3 lies exactly on ring 12
    h = DiscreteMap.from_function(m, example2_map)
    p = oscillation_profile(h, 0.0, [0.3])[0]
    assert p["osc_ball"] == pytest.approx(0.6, abs=0.01)
    assert p["osc_circle"] < 1e-9 * p["osc_ball"]


def test_square_fold_passes_unit_oscillation_but_not_monotonicity(disk):
    m = disk(32, 8)
    h = DiscreteMap.from_function(m, square_fold_disk_map)
    rng = np.random.default_rng(0)
    for _ in range(6):
        c = (rng.random() * 1.0 - 0.5) + 1j * (rng.random() * 1.0 - 0.5)
        r = 0.2 + 0.1 * rng.random()
        if abs(c) + r > 0.95:
            continue
        p = oscillation_profile(h, c, [r])[0]
        assert p["osc_ball"] <= 1.05 * p["osc_circle"]
    grid = [complex(x, y) for x in np.linspace(-0.6, 0.6, 12)
            for y in np.linspace(-0.6, 0.6, 12)]
    assert monotonicity_report(h, grid).verdict == "non-monotone"


def test_oscillation_radius_validation(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    with pytest.raises(ValueError, match="resolution"):
        oscillation_profile(h, 0.0, [1e-4])
    with pytest.raises(ValueError, match="mesh"):
        oscillation_profile(h, 0.8, [0.4])


def test_oscillation_decay_identity_closed_form(disk):
    m = disk(32, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    ok, lhs, rhs = oscillation_decay_check(h, 0.0, 0.1, 0.5, 1.0)
    assert ok
    assert lhs == pytest.approx(0.04, abs=0.01)
    assert rhs == pytest.approx(64 * 2 * np.pi * 0.25 / np.log(5), rel=0.05)


def test_oscillation_decay_constant_map(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=np.full(m.n_vertices, 1 + 1j), mesh=m)
    ok, lhs, _ = oscillation_decay_check(h, 0.0, 0.1, 0.4)
    assert ok and lhs == 0.0


def test_oscillation_decay_validation(disk):
    m = disk(16, 8)
    h = DiscreteMap(values=m.vertices.copy(), mesh=m)
    with pytest.raises(ValueError):
        oscillation_decay_check(h, 0.0, 0.3, 0.5)
    with pytest.raises(ValueError):
        oscillation_decay_check(h, 0.7, 0.1, 0.5)


def test_fiber_default_radius(disk):
    m = disk(24, 8)
    assert default_fiber_radius(m) == pytest.approx(3 * m.median_element_diameter)
