import numpy as np
import pytest

from ans2d.basis import galerkin_project_raw, max_level
from ans2d.det import DetConfig, run_det
from ans2d.noise import make_model, sample_wiener_increment, sigma_channels
from ans2d.sde import (
    SdeConfig,
    ito_isometry_audit,
    ou_mode_validation,
    pathwise_uniqueness_experiment,
    run_sde,
    single_mode_noise,
    step_sde,
    undamped_mode_validation,
    weighted_h01_series,
)
from ans2d.spectral import SpectralField, TorusGrid, zeros_spectral


def _model_small():
    return make_model(["0.05*cos(0,1)"], ["0.05*cos(1,0)", "0.02*sin(1,1)"], "tanh")


def test_config_validation():
    with pytest.raises(ValueError):
        SdeConfig(scheme="milstein")
    with pytest.raises(ValueError):
        SdeConfig(alpha_tilde=1.0)
    with pytest.raises(ValueError):
        SdeConfig(galerkin_n=0)
    assert SdeConfig(dt=1e-3, t_end=0.5).n_steps == 500


def test_run_is_deterministic(grid16, make_field):
    u0 = make_field(grid16, band=3, seed=1)
    cfg = SdeConfig(dt=2e-3, t_end=0.05, galerkin_n=10, seed=9)
    a = run_sde(u0, _model_small(), cfg)
    b = run_sde(u0, _model_small(), cfg)
    assert np.array_equal(a.final.coeffs, b.final.coeffs)
    for name in a.diag:
        assert np.array_equal(a.diag[name], b.diag[name])
    c = run_sde(u0, _model_small(), SdeConfig(dt=2e-3, t_end=0.05, galerkin_n=10, seed=10))
    assert not np.array_equal(a.final.coeffs, c.final.coeffs)


def test_zero_noise_reduces_to_deterministic_euler(grid16, make_field):
    u0 = make_field(grid16, band=3, seed=2)
    dt, t_end = 2e-3, 0.1
    sde = run_sde(u0, None, SdeConfig(dt=dt, t_end=t_end, galerkin_n=max_level(grid16)))
    det = run_det(u0, DetConfig(dt=dt, t_end=t_end, integrator="if-euler", eps_v=0.0))
    final_det = det.states[-1][1]
    scale = float(np.max(np.abs(final_det.coeffs)))
    assert np.max(np.abs(sde.final.coeffs - final_det.coeffs)) <= 1e-12 * scale
    np.testing.assert_allclose(sde.diag["l2_sq"], det.l2_sq, rtol=1e-12)


def test_galerkin_projection_is_invariant(grid16, make_field):
    # the state never leaves the span: projecting the final state is a no-op
    u0 = make_field(grid16, band=4, seed=3)
    cfg = SdeConfig(dt=2e-3, t_end=0.05, galerkin_n=6, seed=1)
    traj = run_sde(u0, _model_small(), cfg)
    again = galerkin_project_raw(traj.final.coeffs, grid16, 6)
    np.testing.assert_allclose(traj.final.coeffs, again, atol=1e-14)


def test_step_sde_matches_manual_update(grid16, make_field):
    u0g = galerkin_project_raw(make_field(grid16, band=3, seed=4).coeffs, grid16, 8)
    u0 = SpectralField(grid16, u0g)
    model = _model_small()
    cfg = SdeConfig(dt=1e-3, t_end=1e-3, galerkin_n=8)
    dw = sample_wiener_increment(model.n_modes, 1, cfg.dt, 0)[0]
    stepped = step_sde(u0, model, cfg, dw)
    from ans2d.sde import _Stepper

    st = _Stepper(grid16, model, cfg)
    manual = st.ef * (u0.coeffs + cfg.dt * st.drift(u0.coeffs)
                      + st.noise_increment(u0.coeffs, dw))
    np.testing.assert_allclose(stepped.coeffs, manual, atol=0.0)
    with pytest.raises(ValueError):
        step_sde(u0, model, cfg, np.zeros(5))


def test_additive_fast_path_matches_channels(grid16, make_field):
    model = make_model([], ["0.1*cos(1,0)", "0.05*sin(0,1)"], "one")
    assert model.is_additive
    u0 = make_field(grid16, band=3, seed=5)
    cfg = SdeConfig(dt=1e-3, t_end=1e-3, galerkin_n=8)
    dw = np.array([0.3, -0.2])
    from ans2d.sde import _Stepper

    st = _Stepper(grid16, model, cfg)
    batch_dw = np.stack([dw, 2.0 * dw, -dw])
    fast = st.noise_increment(np.repeat(u0.coeffs[None], 3, axis=0), batch_dw)
    chans = galerkin_project_raw(sigma_channels(model, zeros_spectral(grid16)), grid16, 8)
    expected = dw[0] * chans[0] + dw[1] * chans[1]
    np.testing.assert_allclose(fast[0], expected, atol=1e-15)
    np.testing.assert_allclose(fast[1], 2.0 * expected, atol=1e-15)
    np.testing.assert_allclose(fast[2], -expected, atol=1e-15)
    # increments that do not depend on the state broadcast over the batch
    single = st.noise_increment(u0.coeffs[None], dw[None, :])
    assert single.shape == (1, 2, 16, 16)


def test_weighted_series_recomputation(grid16, make_field):
    u0 = make_field(grid16, band=4, seed=6)
    cfg = SdeConfig(dt=2e-3, t_end=0.1, galerkin_n=12, seed=2, alpha_tilde=0.4)
    traj = run_sde(u0, _model_small(), cfg)
    w = traj.weighted
    # rebuild h from the recorded d1 column
    d1 = traj.diag["d1_sq"]
    h = np.zeros_like(d1)
    h[1:] = np.cumsum(0.5 * np.diff(traj.t) * (d1[:-1] + d1[1:])) * 2.0 * w.big_c
    np.testing.assert_allclose(w.h, h, atol=1e-15)
    np.testing.assert_allclose(w.weighted_h01, np.exp(-h) * traj.diag["h01_sq"], rtol=1e-13)
    assert w.big_c == pytest.approx(w.c_emp_sup ** 2 / (4.0 * cfg.alpha_tilde))
    assert np.all(np.diff(w.int_weighted_h11) >= 0.0)
    ws = weighted_h01_series(traj.t, d1, traj.diag["d1d2_sq"], traj.diag["d2_sq"],
                             traj.diag["cross"], traj.diag["h01_sq"],
                             traj.diag["h11_sq"], cfg.alpha_tilde)
    np.testing.assert_allclose(ws.weighted_h01, w.weighted_h01, atol=0.0)


def test_ito_energy_balance_audit(grid16, make_field):
    u0 = make_field(grid16, band=3, seed=7, amplitude=0.5)
    cfg = SdeConfig(dt=2e-3, t_end=0.1, galerkin_n=10, seed=5)
    report = ito_isometry_audit(u0, _model_small(), cfg, n_paths=60)
    assert report.passed
    assert report.quad_mean > 0.0


def test_pathwise_uniqueness_bitwise(grid16, make_field):
    u0 = make_field(grid16, band=3, seed=8)
    cfg = SdeConfig(dt=2e-3, t_end=0.1, galerkin_n=10, seed=3)
    report = pathwise_uniqueness_experiment(u0, u0.copy(), _model_small(), cfg)
    assert report.bitwise_zero and report.passed
    assert np.all(report.w_l2_sq == 0.0)


def test_pathwise_uniqueness_perturbed(grid16, make_field):
    u0 = make_field(grid16, band=3, seed=9)
    pert = make_field(grid16, band=3, seed=10)
    v0 = SpectralField(grid16, u0.coeffs + 1e-7 * pert.coeffs)
    cfg = SdeConfig(dt=2e-3, t_end=0.2, galerkin_n=10, seed=4)
    report = pathwise_uniqueness_experiment(u0, v0, _model_small(), cfg, tol=0.05)
    assert not report.bitwise_zero
    assert report.passed
    assert report.max_ratio <= 1.0
    assert report.l1 > 0.0


def test_single_mode_noise_guard(grid16):
    with pytest.raises(ValueError, match="k1 != k2"):
        single_mode_noise(grid16, (1, 1), 0.1)
    model = single_mode_noise(grid16, (1, 0), 0.1)
    chans = sigma_channels(model, zeros_spectral(grid16))
    from ans2d.basis import basis_element
    from ans2d.norms import MEASURE

    e = basis_element(grid16, (1, 0))
    # projected channel is exactly s * e_mode
    np.testing.assert_allclose(chans[0], 0.1 * e.coeffs, atol=1e-15)
    assert MEASURE * np.sum(np.abs(chans[0]) ** 2) == pytest.approx(0.01, rel=1e-12)


def test_ou_validation_small():
    cfg = SdeConfig(dt=1e-3, t_end=0.5, galerkin_n=4, seed=11, drop_nonlinearity=True)
    report = ou_mode_validation((1, 0), s=0.3, m0=0.04, n_paths=400, cfg=cfg)
    assert report.passed
    assert report.exact == pytest.approx(
        np.exp(-2.0 * 0.5) * 0.04 + 0.09 * (1.0 - np.exp(-2.0 * 0.5)) / 2.0, rel=1e-12)
    with pytest.raises(ValueError):
        ou_mode_validation((0, 1), s=0.3, m0=0.0, n_paths=10, cfg=cfg)
    live = SdeConfig(dt=1e-3, t_end=0.1, galerkin_n=4, seed=1)
    with pytest.raises(ValueError, match="drop_nonlinearity"):
        ou_mode_validation((1, 0), s=0.3, m0=0.0, n_paths=10, cfg=live)


def test_undamped_validation_small():
    cfg = SdeConfig(dt=1e-3, t_end=0.5, galerkin_n=4, seed=12, drop_nonlinearity=True)
    report = undamped_mode_validation((0, 1), s=0.2, n_paths=400, cfg=cfg)
    assert report.passed
    assert report.exact == pytest.approx(0.04 * 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        undamped_mode_validation((1, 0), s=0.2, n_paths=10, cfg=cfg)


def test_blowup_guard_in_batched_run(grid16, make_field):
    u0 = SpectralField(grid16, make_field(grid16, band=3, seed=13).coeffs * 1e4)
    cfg = SdeConfig(dt=0.5, t_end=5.0, galerkin_n=max_level(grid16), blowup_factor=10.0)
    from ans2d.errors import BlowUpError

    with pytest.raises(BlowUpError):
        run_sde(u0, None, cfg)
