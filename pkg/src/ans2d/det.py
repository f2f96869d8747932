"""Deterministic time stepping with exact horizontal-viscosity flow.

The evolved system is du/dt = P(-u.grad u) + L u with diagonal symbol
L = -(k1^2 + eps_v^2 k2^2); the viscous flow is applied exactly through an
integrating factor, so purely linear solutions (for example unidirectional
shear) are reproduced to round-off.  Certificates re-derive the energy
balance, the vertical-gradient decay, and a two-solution stability bound
from recorded diagnostics, with all constants measured from the run itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import spectral
from .basis import basis_element
from .norms import MEASURE, l2_inner, l2_norm_sq
from .spectral import SpectralField, TorusGrid

INTEGRATORS = ("if-rk2", "if-rk4", "if-euler")


@dataclass
class DetConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    integrator: str = "if-rk2"
    eps_v: float = 0.0  # vertical viscosity multiplier of the regularized system
    snapshot_every: int = 0  # store full states every k steps; 0 = endpoints only
    blowup_factor: float = 1e6

    def __post_init__(self):
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dt and t_end must be positive")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.eps_v < 0.0:
            raise ValueError("eps_v must be >= 0")

    @property
    def n_steps(self) -> int:
        return int(np.ceil(self.t_end / self.dt - 1e-12))


@dataclass
class Trajectory:
    """Per-step diagnostics plus optionally stored states.

    Squared norms are recorded at every step; int_* columns are running
    trapezoid integrals of the matching squared norm.  cross holds the
    vertical advection pairing (d2(u.grad u), d2 u).
    """

    grid: TorusGrid
    config: DetConfig
    t: np.ndarray
    l2_sq: np.ndarray
    d1_sq: np.ndarray
    d2_sq: np.ndarray
    d1d2_sq: np.ndarray
    cross: np.ndarray
    int_d1_sq: np.ndarray
    int_d2_sq: np.ndarray
    int_d1d2_sq: np.ndarray
    states: list[tuple[float, SpectralField]] = field(default_factory=list)

    def state_at(self, step_idx: int) -> SpectralField:
        target = step_idx * self.config.dt
        for t, state in self.states:
            if abs(t - target) <= 1e-12 * max(1.0, target):
                return state
        raise ValueError(f"step {step_idx} (t={target:.6g}) was not stored")


def linear_symbol(grid: TorusGrid, eps_v: float) -> np.ndarray:
    k1 = grid.k1.astype(np.float64)
    k2 = grid.k2.astype(np.float64)
    return -(k1 ** 2) - eps_v ** 2 * k2 ** 2


def mollify(u: SpectralField, eps: float) -> SpectralField:
    """Spectral smoothing: scale mode k by exp(-eps^2 |k|^2)."""
    if eps < 0.0:
        raise ValueError("mollifier width must be >= 0")
    return SpectralField(u.grid, u.coeffs * np.exp(-eps ** 2 * u.grid.ksq))


def _drift(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """-P(u.grad u), dealiased and mean-free; batch-friendly."""
    return -spectral._leray_raw(spectral._advection_raw(coeffs, grid), grid)


def _make_stepper(grid: TorusGrid, cfg: DetConfig) -> Callable[[np.ndarray], np.ndarray]:
    dt = cfg.dt
    ef = np.exp(dt * linear_symbol(grid, cfg.eps_v))
    eh = np.exp(0.5 * dt * linear_symbol(grid, cfg.eps_v))

    # k1 may be passed in when the caller already evaluated the drift at c
    if cfg.integrator == "if-euler":
        def step(c: np.ndarray, k1: np.ndarray | None = None) -> np.ndarray:
            if k1 is None:
                k1 = _drift(c, grid)
            return ef * (c + dt * k1)
    elif cfg.integrator == "if-rk2":
        def step(c: np.ndarray, k1: np.ndarray | None = None) -> np.ndarray:
            if k1 is None:
                k1 = _drift(c, grid)
            pred = ef * (c + dt * k1)
            return ef * c + 0.5 * dt * (ef * k1 + _drift(pred, grid))
    else:  # if-rk4
        def step(c: np.ndarray, k1: np.ndarray | None = None) -> np.ndarray:
            if k1 is None:
                k1 = _drift(c, grid)
            k2 = _drift(eh * (c + 0.5 * dt * k1), grid)
            k3 = _drift(eh * c + 0.5 * dt * k2, grid)
            k4 = _drift(ef * c + dt * eh * k3, grid)
            return ef * c + dt / 6.0 * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
    return step


def _norm_row(coeffs: np.ndarray, grid: TorusGrid) -> tuple[float, float, float, float]:
    k1sq = grid.k1.astype(np.float64) ** 2
    k2sq = grid.k2.astype(np.float64) ** 2
    p = np.abs(coeffs) ** 2
    l2 = float(MEASURE * p.sum())
    d1 = float(MEASURE * (k1sq * p).sum())
    d2 = float(MEASURE * (k2sq * p).sum())
    d1d2 = float(MEASURE * (k1sq * k2sq * p).sum())
    return l2, d1, d2, d1d2


def _cross_from_adv(adv: np.ndarray, coeffs: np.ndarray, grid: TorusGrid) -> float:
    k2sq = grid.k2.astype(np.float64) ** 2
    return float(MEASURE * np.sum(k2sq * adv * np.conj(coeffs)).real)


def _cross_term(coeffs: np.ndarray, grid: TorusGrid) -> float:
    """(d2(u.grad u), d2 u) from the dealiased advection spectrum."""
    return _cross_from_adv(spectral._advection_raw(coeffs, grid), coeffs, grid)


def prepare_initial(u0: SpectralField) -> SpectralField:
    """Mean-free, solenoidal, dealiased copy of the initial data."""
    u = spectral.zero_mean(spectral.leray_project(spectral.dealias(u0)))
    return u


def run_det(u0: SpectralField, cfg: DetConfig) -> Trajectory:
    """Advance the deterministic system and record per-step diagnostics."""
    grid = u0.grid
    step = _make_stepper(grid, cfg)
    c = prepare_initial(u0).coeffs
    n_steps = cfg.n_steps
    dt = cfg.dt

    cols = {name: np.zeros(n_steps + 1) for name in
            ("t", "l2_sq", "d1_sq", "d2_sq", "d1d2_sq", "cross",
             "int_d1_sq", "int_d2_sq", "int_d1d2_sq")}
    states: list[tuple[float, SpectralField]] = []

    def record(i: int, coeffs: np.ndarray, adv: np.ndarray) -> None:
        t = i * dt
        l2, d1, d2, d1d2 = _norm_row(coeffs, grid)
        cols["t"][i] = t
        cols["l2_sq"][i] = l2
        cols["d1_sq"][i] = d1
        cols["d2_sq"][i] = d2
        cols["d1d2_sq"][i] = d1d2
        cols["cross"][i] = _cross_from_adv(adv, coeffs, grid)
        if i > 0:
            for intname, src in (("int_d1_sq", "d1_sq"), ("int_d2_sq", "d2_sq"),
                                 ("int_d1d2_sq", "d1d2_sq")):
                cols[intname][i] = cols[intname][i - 1] + 0.5 * dt * (
                    cols[src][i - 1] + cols[src][i])
        keep = cfg.snapshot_every > 0 and i % cfg.snapshot_every == 0
        if keep or i == 0 or i == n_steps:
            states.append((t, SpectralField(grid, coeffs.copy())))

    # one advection evaluation per state feeds both the cross-term
    # diagnostic and the first integrator stage
    adv = spectral._advection_raw(c, grid)
    record(0, c, adv)
    l2_sq0 = cols["l2_sq"][0]
    for i in range(1, n_steps + 1):
        c = step(c, -spectral._leray_raw(adv, grid))
        spectral.check_finite(c, float(MEASURE * np.sum(np.abs(c) ** 2)),
                              l2_sq0, t_last=(i - 1) * dt, guard=cfg.blowup_factor)
        adv = spectral._advection_raw(c, grid)
        record(i, c, adv)

    return Trajectory(grid=grid, config=cfg, states=states,
                      **{k: v for k, v in cols.items()})


# ---------------------------------------------------------------------------
# certificates


@dataclass
class EnergyReport:
    residual: np.ndarray
    max_abs: float
    rel_to_initial: float
    passed: bool


def energy_certificate(traj: Trajectory, rel_tol: float = 1e-4) -> EnergyReport:
    """Energy balance audit.

    Checks R(t) = ||u(t)||^2 + 2 int ||d1 u||^2 + 2 eps^2 int ||d2 u||^2
    - ||u0||^2 stays below rel_tol * ||u0||^2; R carries the trapezoid and
    integrator bias, both second order in dt.
    """
    eps = traj.config.eps_v
    residual = (traj.l2_sq + 2.0 * traj.int_d1_sq + 2.0 * eps ** 2 * traj.int_d2_sq
                - traj.l2_sq[0])
    max_abs = float(np.max(np.abs(residual)))
    scale = float(traj.l2_sq[0]) if traj.l2_sq[0] > 0 else 1.0
    rel = max_abs / scale
    return EnergyReport(residual=residual, max_abs=max_abs, rel_to_initial=rel,
                        passed=bool(rel <= rel_tol))


@dataclass
class H01Report:
    c_emp: np.ndarray
    c_sup: float
    big_c: float
    weighted: np.ndarray
    max_step_increase: float
    passed_monotone: bool
    passed_bound: bool


def h01_certificate(traj: Trajectory, slack: float = 1e-6) -> H01Report:
    """Vertical-gradient decay audit with a run-measured constant.

    c_emp(t) = |(d2(u.grad u), d2 u)| / (||d1 d2 u|| ||d1 u|| ||d2 u||) is the
    realized constant of the trilinear bound; with C = sup(c_emp)^2 / 2 the
    weighted quantity exp(-2C int ||d1 u||^2) ||d2 u||^2 must not increase by
    more than slack * its initial value at any step, which also yields
    ||d2 u(t)||^2 <= ||d2 u(0)||^2 exp(2C int ||d1 u||^2).
    """
    denom = np.sqrt(traj.d1d2_sq * traj.d1_sq * traj.d2_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_emp = np.where(denom > 0.0, np.abs(traj.cross) / denom, 0.0)
    c_sup = float(np.max(c_emp))
    big_c = 0.5 * c_sup ** 2  # Young split with half weight on ||d1 d2 u||^2
    weighted = np.exp(-2.0 * big_c * traj.int_d1_sq) * traj.d2_sq
    diffs = np.diff(weighted)
    max_inc = float(np.max(diffs, initial=0.0))
    allowance = slack * weighted[0] if weighted[0] > 0 else slack
    monotone = bool(max_inc <= allowance)
    bound = traj.d2_sq <= traj.d2_sq[0] * np.exp(2.0 * big_c * traj.int_d1_sq) * (1.0 + slack) + allowance
    return H01Report(c_emp=c_emp, c_sup=c_sup, big_c=big_c, weighted=weighted,
                     max_step_increase=max_inc, passed_monotone=monotone,
                     passed_bound=bool(np.all(bound)))


@dataclass
class TimeProfile:
    """Smooth scalar time window chi with its derivative."""

    name: str
    fn: Callable[[float], float]
    dfn: Callable[[float], float]


def time_profile(name: str) -> TimeProfile:
    profiles = {
        "one": TimeProfile("one", lambda t: 1.0, lambda t: 0.0),
        "cos": TimeProfile("cos", lambda t: float(np.cos(t)), lambda t: float(-np.sin(t))),
        "quadratic": TimeProfile("quadratic", lambda t: 1.0 + t * t, lambda t: 2.0 * t),
    }
    if name not in profiles:
        raise ValueError(f"unknown time profile {name!r}; choose from {sorted(profiles)}")
    return profiles[name]


def weak_form_residual(traj: Trajectory, test_mode: tuple[int, int],
                       chi: TimeProfile) -> float:
    """Weak-form defect against the test function chi(t) e_k(x).

    Needs states stored at every step (snapshot_every=1).  The residual

        int_0^t [ -chi'(s) (u, e_k) + chi(s) ((d1 u, d1 e_k)
                  + eps^2 (d2 u, d2 e_k) + (u.grad u, e_k)) ] ds
        - chi(0) (u0, e_k) + chi(t) (u(t), e_k)

    vanishes for exact solutions; trapezoid quadrature leaves O(dt^2).
    Passing -k selects the sine element of the mode pair of k.
    """
    if traj.config.snapshot_every != 1:
        raise ValueError("weak-form residual needs states at every step (snapshot_every=1)")
    grid = traj.grid
    ek = basis_element(grid, test_mode)
    kc = test_mode if test_mode[0] > 0 or (test_mode[0] == 0 and test_mode[1] > 0) \
        else (-test_mode[0], -test_mode[1])
    eps = traj.config.eps_v
    n = len(traj.t)
    a = np.zeros(n)       # (u, e_k)
    b = np.zeros(n)       # (u.grad u, e_k)
    for i in range(n):
        _, state = traj.states[i]
        a[i] = l2_inner(state, ek)
        b[i] = l2_inner(spectral.nonlinear_term(state), ek)
    chi_v = np.array([chi.fn(t) for t in traj.t])
    dchi_v = np.array([chi.dfn(t) for t in traj.t])
    # e_k is a single mode pair: (d1 u, d1 e_k) = k1^2 (u, e_k), same for d2
    integrand = -dchi_v * a + chi_v * (kc[0] ** 2 + eps ** 2 * kc[1] ** 2) * a + chi_v * b
    integral = float(np.trapezoid(integrand, traj.t))
    return integral - chi_v[0] * a[0] + chi_v[-1] * a[-1]


@dataclass
class UniquenessReport:
    t: np.ndarray
    w_l2_sq: np.ndarray
    growth: np.ndarray       # the Gronwall exponent E(t)
    c1: float
    c0: float
    bitwise_zero: bool
    max_ratio: float
    passed: bool


def uniqueness_experiment(u0: SpectralField, v0: SpectralField, cfg: DetConfig,
                          tol: float = 0.05) -> UniquenessReport:
    """Two-solution stability audit.

    Runs u and v in lockstep and checks the difference w = u - v against
    ||w(t)||^2 <= ||w(0)||^2 exp(E(t)) (1 + tol) with

        E(t) = 2 C0 int ( ||d1 v||^{2/3} + ||d2 v||^{2/3} ) ||d1 d2 v||^{2/3} ds

    where C0 = (3/4) c1^{4/3} converts the measured trilinear constant

        c1 = sup |(w.grad v, w)| / ( ||d1 w||^{1/2}
             ( ||d1 v||^{1/2} + ||d2 v||^{1/2} ) ||d1 d2 v||^{1/2} ||w||^{3/2} )

    through Young's inequality with elastic weight 1/2 on ||d1 w||^2.
    Identical inputs short-circuit to an exact-zero check: the two runs
    perform identical arithmetic, so w stays bitwise zero.
    """
    grid = u0.grid
    step = _make_stepper(grid, cfg)
    cu = prepare_initial(u0).coeffs
    cv = prepare_initial(v0).coeffs
    n_steps = cfg.n_steps
    dt = cfg.dt
    k1 = grid.k1.astype(np.float64)
    k2 = grid.k2.astype(np.float64)

    t = np.arange(n_steps + 1) * dt
    w_l2 = np.zeros(n_steps + 1)
    ratio_den = np.zeros(n_steps + 1)  # trilinear denominator
    tri = np.zeros(n_steps + 1)        # |(w.grad v, w)|
    dissip = np.zeros(n_steps + 1)     # ( ||d1 v||^{2/3}+||d2 v||^{2/3} ) ||d1d2 v||^{2/3}
    bitwise = True

    def record(i: int, cu_: np.ndarray, cv_: np.ndarray) -> None:
        nonlocal bitwise
        w = cu_ - cv_
        bitwise = bitwise and bool(np.all(cu_ == cv_))
        p = np.abs(w) ** 2
        w_l2[i] = MEASURE * p.sum()
        w_d1 = MEASURE * float((k1 ** 2 * p).sum())
        _, d1v, d2v, d1d2v = _norm_row(cv_, grid)
        dissip[i] = (d1v ** (1.0 / 3.0) + d2v ** (1.0 / 3.0)) * d1d2v ** (1.0 / 3.0)
        # (w.grad v, w) via physical-space products
        wphys = spectral._phys(w, grid.n_points)
        d1vp = spectral._phys(cv_ * (1j * k1), grid.n_points)
        d2vp = spectral._phys(cv_ * (1j * k2), grid.n_points)
        adv = wphys[0:1] * d1vp + wphys[1:2] * d2vp
        tri[i] = abs(float(np.sum(adv * wphys) * grid.cell_area))
        ratio_den[i] = (w_d1 ** 0.25
                        * (d1v ** 0.25 + d2v ** 0.25) * d1d2v ** 0.25
                        * w_l2[i] ** 0.75)

    record(0, cu, cv)
    l2u0 = float(MEASURE * np.sum(np.abs(cu) ** 2))
    for i in range(1, n_steps + 1):
        cu = step(cu)
        cv = step(cv)
        spectral.check_finite(cu, float(MEASURE * np.sum(np.abs(cu) ** 2)), l2u0,
                              t_last=(i - 1) * dt, guard=cfg.blowup_factor)
        record(i, cu, cv)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(ratio_den > 0.0, tri / ratio_den, 0.0)
    c1 = float(np.max(ratios))
    c0 = 0.75 * c1 ** (4.0 / 3.0)
    growth = np.zeros(n_steps + 1)
    for i in range(1, n_steps + 1):
        growth[i] = growth[i - 1] + 0.5 * dt * (dissip[i - 1] + dissip[i]) * 2.0 * c0

    if bitwise:
        passed = bool(np.all(w_l2 == 0.0))
        max_ratio = 0.0
    else:
        bound = w_l2[0] * np.exp(growth) * (1.0 + tol)
        with np.errstate(divide="ignore", invalid="ignore"):
            max_ratio = float(np.max(np.where(bound > 0, w_l2 / bound, np.inf)))
        passed = bool(np.all(w_l2 <= bound))
    return UniquenessReport(t=t, w_l2_sq=w_l2, growth=growth, c1=c1, c0=c0,
                            bitwise_zero=bitwise, max_ratio=max_ratio, passed=passed)


def eps_sweep(u0: SpectralField, cfg: DetConfig, eps_values: list[float]) -> list[float]:
    """L2-in-time distance of each regularized run from the eps = 0 run.

    Each eps run starts from mollified data mollify(u0, eps) and evolves with
    vertical viscosity eps^2; returns
    || u_eps - u_0 ||_{L2([0,T]; L2)} for each eps, computed by trapezoid
    over per-step differences.
    """
    from dataclasses import replace

    base_cfg = replace(cfg, eps_v=0.0, snapshot_every=1)
    base = run_det(u0, base_cfg)
    out = []
    for eps in eps_values:
        cfg_eps = replace(cfg, eps_v=eps, snapshot_every=1)
        traj = run_det(mollify(u0, eps), cfg_eps)
        diff_sq = np.array([
            l2_norm_sq(SpectralField(u0.grid, traj.states[i][1].coeffs - base.states[i][1].coeffs))
            for i in range(len(traj.t))
        ])
        out.append(float(np.sqrt(np.trapezoid(diff_sq, traj.t))))
    return out
