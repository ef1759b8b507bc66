import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopflab.boundary import (BoundarySpec, DiscreteMap, douglas_energy,
                              harmonic_extension, laplacian_residual,
                              min_interior_cone_angle, polyline_is_simple,
                              poisson_residual, sample_boundary,
                              winding_number)
from hopflab.gallery import fig1_map


def test_identity_boundary_samples_are_the_vertices(disk):
    m = disk(1, 3)
    bv = sample_boundary(BoundarySpec.from_gallery("identity"), m)
    assert np.allclose(bv, m.vertices[m.boundary_loop], atol=1e-12)


def test_double_winding_is_rejected_but_reported(disk):
    m = disk(8, 8)
    theta = 2 * np.pi * np.arange(256) / 256
    spec = BoundarySpec.from_samples(theta, np.exp(2j * theta))
    with pytest.raises(ValueError, match="injective"):
        sample_boundary(spec, m)
    assert winding_number(np.exp(2j * theta), 0j) == 2


def test_fig1_boundary_is_a_simple_curve():
    spec = BoundarySpec.from_gallery("fig1")
    vals = spec.dense_samples(512)
    assert polyline_is_simple(vals)
    assert spec.winding() == 1
    spec.validate()


def test_self_crossing_detection():
    square = np.array([0, 1 + 1j, 1, 1j])  # bow tie
    assert not polyline_is_simple(square)
    assert polyline_is_simple(np.array([0, 1, 1 + 1j, 1j]))


def test_sample_table_interpolation_and_json_round_trip(disk):
    m = disk(4, 8)
    theta = 2 * np.pi * np.arange(64) / 64
    spec = BoundarySpec.from_samples(theta, np.exp(1j * theta))
    blob = json.dumps(spec.to_json())
    spec2 = BoundarySpec.from_json(blob)
    bv = sample_boundary(spec2, m)
    # boundary vertices sit between table nodes; linear interpolation error
    assert np.abs(bv - m.vertices[m.boundary_loop]).max() < 2e-3


def test_spec_rejects_offpolygon_samples():
    theta = 2 * np.pi * np.arange(16) / 16
    square = np.array([2 + 2j, -2 + 2j, -2 - 2j, 2 - 2j])
    spec = BoundarySpec.from_samples(theta, np.exp(1j * theta), polygon=square)
    with pytest.raises(ValueError, match="polygon"):
        spec.validate()


def test_cone_angle_metadata():
    square = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    assert min_interior_cone_angle(square) == pytest.approx(np.pi / 2)


# -- harmonic extension --------------------------------------------------------

def test_extension_of_identity_is_identity(disk):
    m = disk(16, 8)
    bv = sample_boundary(BoundarySpec.from_gallery("identity"), m)
    ext = harmonic_extension(bv, m)
    assert np.abs(ext.values - m.vertices).max() < 1e-3


def test_extension_of_second_harmonic_is_square(disk):
    m = disk(16, 8)
    ext = harmonic_extension(np.exp(2j * m.boundary_angles), m)
    assert np.abs(ext.values - m.vertices ** 2).max() < 1e-3


def test_extension_of_constant_is_exact(disk):
    m = disk(8, 8)
    c = 2.5 - 1.0j
    ext = harmonic_extension(np.full(len(m.boundary_loop), c), m)
    assert np.abs(ext.values - c).max() < 1e-13


def test_mean_value_property(disk):
    m = disk(12, 8)
    th = m.boundary_angles
    ext = harmonic_extension(2 * np.exp(1j * th) + np.exp(3j * th) - 1j *
                             np.exp(5j * th), m)
    assert abs(ext.values[0]) < 1e-12


def test_maximum_principle_exact(disk):
    m = disk(12, 8)
    f = np.cos(3 * m.boundary_angles) + 0.2 * np.sin(m.boundary_angles)
    ext = harmonic_extension(f.astype(complex), m)
    assert ext.values.real.min() >= f.min() - 1e-12
    assert ext.values.real.max() <= f.max() + 1e-12
    assert np.abs(ext.values.imag).max() < 1e-12


def test_extension_boundary_values_copied_verbatim(disk):
    m = disk(8, 8)
    bv = np.exp(1j * m.boundary_angles) * (1 + 0.3j)
    ext = harmonic_extension(bv, m)
    assert np.array_equal(ext.values[m.boundary_loop], bv)


def test_extension_rejects_wrong_count(disk):
    with pytest.raises(ValueError):
        harmonic_extension(np.zeros(5, dtype=complex), disk(8, 8))


def test_laplacian_residual_decreases_under_refinement(disk):
    spec = BoundarySpec.from_gallery("fig1")
    res = []
    for rings in (8, 16, 32):
        m = disk(rings, 8)
        ext = harmonic_extension(sample_boundary(spec, m), m)
        res.append(laplacian_residual(ext))
    assert res[1] < res[0] and res[2] < res[1]


def test_poisson_residual_detects_non_harmonic(disk):
    # quadrature aliasing floors the residual near exp(-sectors)
    m = disk(12, 16)
    harmonic = DiscreteMap.from_function(m, fig1_map)
    assert poisson_residual(harmonic) < 1e-5
    squared = DiscreteMap.from_function(m, lambda z: np.abs(z) ** 2 + 0j)
    assert poisson_residual(squared) > 0.1


# -- trace double-integral energy ----------------------------------------------

def test_douglas_identity_closed_form():
    for n in (64, 256):
        t = 2 * np.pi * np.arange(n) / n
        val = douglas_energy(np.exp(1j * t))
        assert val == pytest.approx((2 * np.pi) ** 2 * (1 - 1 / n), rel=1e-12)


def test_douglas_double_frequency_closed_form():
    for n in (64, 256):
        t = 2 * np.pi * np.arange(n) / n
        val = douglas_energy(np.exp(2j * t))
        assert val == pytest.approx(2 * (2 * np.pi) ** 2 * (1 - 2 / n), rel=1e-10)


def test_douglas_constant_is_zero():
    assert douglas_energy(np.full(100, 1 + 2j)) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 4.0), st.floats(-np.pi, np.pi),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_douglas_rigid_invariance_and_dilation(lam, alpha, shift):
    t = 2 * np.pi * np.arange(48) / 48
    f = np.exp(1j * t) + 0.3 * np.exp(-2j * t)
    base = douglas_energy(f)
    moved = douglas_energy(np.exp(1j * alpha) * f + shift)
    assert moved == pytest.approx(base, rel=1e-9)
    assert douglas_energy(lam * f) == pytest.approx(lam ** 2 * base, rel=1e-9)
