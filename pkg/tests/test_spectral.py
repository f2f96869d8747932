import numpy as np
import pytest

from ans2d.errors import BlowUpError
from ans2d.norms import l2_norm_sq
from ans2d.spectral import (
    PhysicalField,
    SpectralField,
    TorusGrid,
    check_finite,
    dealias,
    derivative,
    divergence_defect,
    forward_transform,
    hermitian_defect,
    inverse_transform,
    leray_project,
    nonlinear_term,
    random_solenoidal_field,
    shear_field,
    taylor_green,
    zero_mean,
    zeros_spectral,
)


def test_wavenumber_layout():
    grid = TorusGrid(8, 8)
    assert sorted(grid.k1.ravel().tolist()) == [-3, -2, -1, 0, 1, 2, 3, 4]
    assert grid.k1.ravel()[4] == 4  # Nyquist carries the positive label
    assert grid.k1.shape == (8, 1) and grid.k2.shape == (1, 8)


@pytest.mark.parametrize("n1,n2", [(3, 8), (8, 7), (2, 8)])
def test_grid_rejects_bad_sizes(n1, n2):
    with pytest.raises(ValueError):
        TorusGrid(n1, n2)


def test_single_mode_coefficients(grid16):
    u = shear_field(grid16, axis=2)  # (sin x2, 0)
    np.testing.assert_allclose(u.mode((0, 1)), [-0.5j, 0.0], atol=1e-15)
    np.testing.assert_allclose(u.mode((0, -1)), [0.5j, 0.0], atol=1e-15)
    # cos x1 in component 1
    x1 = grid16.x1[:, None]
    samples = np.stack([np.zeros((16, 16)), np.cos(x1) * np.ones((1, 16))])
    c = forward_transform(PhysicalField(grid16, samples))
    np.testing.assert_allclose(c.mode((1, 0)), [0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(c.mode((-1, 0)), [0.0, 0.5], atol=1e-15)


def test_round_trip(grid16, make_field):
    u = make_field(grid16, band=5, seed=1)
    back = forward_transform(inverse_transform(u))
    np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-14)
    f = inverse_transform(u)
    again = inverse_transform(forward_transform(f))
    np.testing.assert_allclose(again.samples, f.samples, atol=1e-13)


def test_parseval(grid16, make_field):
    u = make_field(grid16, band=5, seed=2)
    samples = inverse_transform(u).samples
    physical = float(np.sum(samples ** 2)) * grid16.cell_area
    assert abs(physical - l2_norm_sq(u)) <= 1e-12 * max(1.0, physical)


def test_norm_of_sine_is_two_pi_squared(grid16):
    assert l2_norm_sq(shear_field(grid16, axis=2)) == pytest.approx(2.0 * np.pi ** 2, rel=1e-14)
    assert l2_norm_sq(taylor_green(grid16)) == pytest.approx(2.0 * np.pi ** 2, rel=1e-14)


def test_inverse_rejects_broken_symmetry(grid16):
    u = shear_field(grid16, axis=2)
    u.coeffs[0, 0, grid16.index_of((0, 1))[1]] += 1e-6
    assert hermitian_defect(u.coeffs) > 1e-7
    with pytest.raises(ValueError, match="conjugate-symmetric"):
        inverse_transform(u)


def test_derivative_single_mode(grid16):
    u = shear_field(grid16, axis=2)  # (sin x2, 0)
    du = derivative(u, axis=2)       # (cos x2, 0)
    np.testing.assert_allclose(du.mode((0, 1)), [0.5, 0.0], atol=1e-15)
    assert np.all(derivative(u, axis=1).coeffs == 0.0)
    with pytest.raises(ValueError):
        derivative(u, axis=3)


def test_derivatives_commute(grid16, make_field):
    u = make_field(grid16, band=5, seed=3)
    a = derivative(derivative(u, axis=1), axis=2)
    b = derivative(derivative(u, axis=2), axis=1)
    np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=0.0, atol=1e-15)


def test_dealias_band_and_idempotence(make_field):
    grid = TorusGrid(12, 12)
    u = SpectralField(grid, np.ones((2, 12, 12), dtype=complex))
    v = dealias(u)
    # keep |k_i| <= n_i // 3 = 4
    kept = (np.abs(grid.k1) <= 4) & (np.abs(grid.k2) <= 4)
    assert np.array_equal(v.coeffs[0] != 0, kept)
    assert np.array_equal(dealias(v).coeffs, v.coeffs)


def test_leray_single_mode(grid16):
    u = zeros_spectral(grid16)
    i, j = grid16.index_of((1, 1))
    im, jm = grid16.index_of((-1, -1))
    u.coeffs[0, i, j] = 1.0
    u.coeffs[0, im, jm] = 1.0
    p = leray_project(u)
    # u - k (k.u)/|k|^2 at k=(1,1) with u=(1,0): (1/2, -1/2)
    np.testing.assert_allclose(p.mode((1, 1)), [0.5, -0.5], atol=1e-15)
    assert divergence_defect(p) <= 1e-15
    np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-15)


def test_leray_keeps_mean_mode(grid16):
    u = zeros_spectral(grid16)
    u.coeffs[:, 0, 0] = [2.0, -1.0]
    p = leray_project(u)
    np.testing.assert_array_equal(p.mean_mode(), [2.0, -1.0])
    assert np.all(zero_mean(p).mean_mode() == 0.0)


def test_advection_two_mode_closed_form(grid16):
    # u = (a cos x2, b cos x1) gives u.grad u = (-ab cos x1 sin x2, -ab sin x1 cos x2)
    a, b = 0.7, -1.3
    x1 = grid16.x1[:, None]
    x2 = grid16.x2[None, :]
    u = forward_transform(PhysicalField(grid16, np.stack([
        a * np.cos(x2) * np.ones_like(x1),
        b * np.cos(x1) * np.ones_like(x2),
    ])))
    expected = forward_transform(PhysicalField(grid16, np.stack([
        -a * b * np.cos(x1) * np.sin(x2),
        -a * b * np.sin(x1) * np.cos(x2),
    ])))
    adv = nonlinear_term(u)
    np.testing.assert_allclose(adv.coeffs, expected.coeffs, atol=1e-14)


def test_advection_vanishes_for_pure_shear(grid16):
    for axis in (1, 2):
        adv = nonlinear_term(shear_field(grid16, axis=axis))
        assert np.max(np.abs(adv.coeffs)) <= 1e-15


def test_check_finite_raises():
    c = np.full((2, 4, 4), np.nan, dtype=complex)
    with pytest.raises(BlowUpError) as info:
        check_finite(c, 1.0, 1.0, t_last=0.25)
    assert info.value.last_finite_time == 0.25
    with pytest.raises(BlowUpError):
        check_finite(np.zeros((2, 4, 4), dtype=complex), 1e20, 1.0, t_last=0.5, guard=1e6)


def test_shear_field_orientation(grid16):
    f1 = inverse_transform(shear_field(grid16, axis=1, amplitude=2.0)).samples
    x1 = grid16.x1[:, None]
    np.testing.assert_allclose(f1[1], 2.0 * np.sin(x1) * np.ones((1, 16)), atol=1e-14)
    assert np.max(np.abs(f1[0])) <= 1e-14
    f2 = inverse_transform(shear_field(grid16, axis=2, amplitude=0.5)).samples
    x2 = grid16.x2[None, :]
    np.testing.assert_allclose(f2[0], 0.5 * np.sin(x2) * np.ones((16, 1)), atol=1e-14)
    assert np.max(np.abs(f2[1])) <= 1e-14


def test_random_solenoidal_properties(grid32):
    rng = np.random.default_rng(11)
    u = random_solenoidal_field(grid32, band=4, amplitude=2.5, rng=rng)
    assert divergence_defect(u) <= 1e-13
    assert np.all(u.mean_mode() == 0.0)
    outside = (np.abs(grid32.k1) > 4) | (np.abs(grid32.k2) > 4)
    assert np.max(np.abs(u.coeffs[:, outside])) == 0.0
    assert l2_norm_sq(u) == pytest.approx(2.5 ** 2, rel=1e-12)


def test_random_solenoidal_band_guard(grid16):
    with pytest.raises(ValueError):
        random_solenoidal_field(grid16, band=6, amplitude=1.0,
                                rng=np.random.default_rng(0))
