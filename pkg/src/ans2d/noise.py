"""Multiplicative noise family, Wiener sampling, and well-posedness gates.

The diffusion maps a Wiener increment with components y_k to

    sigma(u) y = sum_k ( c_k(x) d1 u + b_k(x) g(u) ) y_k

followed by dealiasing, Leray projection, and mean removal.  The c_k, b_k
are finite trigonometric recipes; g acts componentwise, is bounded and
Lipschitz.  Declared budgets:

    M1 >= sum_k (sup|c_k| + sup|d1 c_k| + sup|d2 c_k|)^2
    M2 >= sum_k (sup|b_k|)^2   and   M2 >= sum_k (sup|d2 b_k|)^2
    Cg >= max(sup|g|, Lip(g))

Growth and Lipschitz constants are derived from the budgets with a
Peter-Paul split eta; the derivations are generous (validity over
sharpness), while the gate thresholds compare the pinned constants
K2 = (1+eta) M1, Kt2 = 2 (1+eta) M1, L2 = (1+eta) M1 directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import spectral
from .norms import MEASURE, NormReport
from .spectral import SpectralField, TorusGrid

EXISTENCE_K2_LIMIT = 2.0 / 11.0
EXISTENCE_KT2_LIMIT = 2.0 / 5.0
UNIQUENESS_L2_LIMIT = 2.0 / 5.0

_TERM_RE = re.compile(
    r"(?P<sign>[+-])?\s*(?P<amp>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"(?:\s*\*\s*(?P<phase>cos|sin)\(\s*(?P<k1>-?\d+)\s*,\s*(?P<k2>-?\d+)\s*\))?\s*"
)


@dataclass(frozen=True)
class ScalarRecipe:
    """Finite trigonometric polynomial: sum of amp * {cos,sin}(k . x) terms.

    A bare constant is stored as amp * cos(0.x).
    """

    terms: tuple[tuple[float, int, int, str], ...] = ()

    @staticmethod
    def parse(text: str) -> "ScalarRecipe":
        s = text.strip()
        if not s:
            return ScalarRecipe(())
        terms = []
        pos = 0
        while pos < len(s):
            m = _TERM_RE.match(s, pos)
            if m is None:
                raise ValueError(f"cannot parse recipe at {s[pos:]!r}")
            if pos > 0 and m.group("sign") is None:
                raise ValueError(f"missing +/- before {s[pos:]!r}")
            amp = float((m.group("sign") or "") + m.group("amp"))
            if m.group("phase") is None:
                terms.append((amp, 0, 0, "cos"))
            else:
                terms.append((amp, int(m.group("k1")), int(m.group("k2")), m.group("phase")))
            pos = m.end()
        return ScalarRecipe(tuple(terms))

    def format(self) -> str:
        """Canonical text form; parse(format()) returns the same terms."""
        if not self.terms:
            return "0"
        out = ""
        for i, (amp, k1, k2, phase) in enumerate(self.terms):
            body = repr(abs(amp))
            if (k1, k2, phase) != (0, 0, "cos"):
                body += f"*{phase}({k1},{k2})"
            if i == 0:
                out = ("-" if amp < 0 else "") + body
            else:
                out += (" - " if amp < 0 else " + ") + body
        return out

    def evaluate(self, grid: TorusGrid) -> np.ndarray:
        x1 = grid.x1[:, None]
        x2 = grid.x2[None, :]
        out = np.zeros((grid.n1, grid.n2))
        for amp, k1, k2, phase in self.terms:
            angle = k1 * x1 + k2 * x2
            out += amp * (np.cos(angle) if phase == "cos" else np.sin(angle))
        return out

    @property
    def is_zero(self) -> bool:
        return all(amp == 0.0 for amp, *_ in self.terms)

    def sup_bound(self) -> float:
        """Rigorous bound on sup |recipe|: sum of |amplitudes|."""
        return float(sum(abs(a) for a, *_ in self.terms))

    def sup_bound_d(self, axis: int) -> float:
        return float(sum(abs(a * (k1 if axis == 1 else k2))
                         for a, k1, k2, _ in self.terms))


def _g_funcs(kind: str):
    table = {
        "one": (lambda x: np.ones_like(x), 1.0, 0.0),
        "zero": (lambda x: np.zeros_like(x), 0.0, 0.0),
        "tanh": (np.tanh, 1.0, 1.0),
        "sin": (np.sin, 1.0, 1.0),
    }
    if kind not in table:
        raise ValueError(f"unknown g kind {kind!r}; choose from {sorted(table)}")
    return table[kind]


@dataclass(frozen=True)
class NoiseModel:
    """Coefficient recipes plus declared smoothness budgets."""

    c: tuple[ScalarRecipe, ...]
    b: tuple[ScalarRecipe, ...]
    g_kind: str = "one"
    m1: float = 0.0
    m2: float = 0.0
    cg: float = 1.0

    def __post_init__(self):
        if len(self.c) != len(self.b):
            raise ValueError("c and b must list the same number of channels")
        _, g_sup, g_lip = _g_funcs(self.g_kind)
        if self.cg < max(g_sup, g_lip) - 1e-12:
            raise ValueError(
                f"declared Cg={self.cg} below actual bound {max(g_sup, g_lip)} for g={self.g_kind!r}"
            )
        sum_c = sum((r.sup_bound() + r.sup_bound_d(1) + r.sup_bound_d(2)) ** 2 for r in self.c)
        if sum_c > self.m1 * (1.0 + 1e-12) + 1e-300:
            raise ValueError(f"c recipes need M1 >= {sum_c:.6g}, declared {self.m1:.6g}")
        sum_b0 = sum(r.sup_bound() ** 2 for r in self.b)
        sum_b2 = sum(r.sup_bound_d(2) ** 2 for r in self.b)
        if max(sum_b0, sum_b2) > self.m2 * (1.0 + 1e-12) + 1e-300:
            raise ValueError(
                f"b recipes need M2 >= {max(sum_b0, sum_b2):.6g}, declared {self.m2:.6g}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.c)

    @property
    def is_additive(self) -> bool:
        """True when sigma does not depend on the state."""
        return all(r.is_zero for r in self.c) and self.g_kind in ("one", "zero")

    @property
    def is_zero(self) -> bool:
        return (all(r.is_zero for r in self.c)
                and (self.g_kind == "zero" or all(r.is_zero for r in self.b)))

    def g_eval(self, x: np.ndarray) -> np.ndarray:
        return _g_funcs(self.g_kind)[0](x)

    def coefficient_fields(self, grid: TorusGrid) -> tuple[np.ndarray, np.ndarray]:
        """Sampled (n_modes, n1, n2) arrays of the c and b recipes."""
        c_arr = np.stack([r.evaluate(grid) for r in self.c]) if self.c else \
            np.zeros((0, grid.n1, grid.n2))
        b_arr = np.stack([r.evaluate(grid) for r in self.b]) if self.b else \
            np.zeros((0, grid.n1, grid.n2))
        return c_arr, b_arr


def make_model(c_recipes: Sequence[str], b_recipes: Sequence[str], g_kind: str = "one",
               margin: float = 1.0) -> NoiseModel:
    """Model from recipe strings with budgets set to the computed sums x margin."""
    c = tuple(ScalarRecipe.parse(s) for s in c_recipes)
    b = tuple(ScalarRecipe.parse(s) for s in b_recipes)
    n = max(len(c), len(b))
    c = c + tuple(ScalarRecipe(()) for _ in range(n - len(c)))
    b = b + tuple(ScalarRecipe(()) for _ in range(n - len(b)))
    _, g_sup, g_lip = _g_funcs(g_kind)
    m1 = margin * sum((r.sup_bound() + r.sup_bound_d(1) + r.sup_bound_d(2)) ** 2 for r in c)
    m2 = margin * max(
        sum(r.sup_bound() ** 2 for r in b),
        sum(r.sup_bound_d(2) ** 2 for r in b),
    )
    return NoiseModel(c=c, b=b, g_kind=g_kind, m1=m1, m2=m2,
                      cg=max(g_sup, g_lip, 1e-12))


def sample_wiener_increment(n_modes: int, n_steps: int, dt: float,
                            base_seed: int, traj_index: int = 0) -> np.ndarray:
    """Pregenerated increments, shape (n_steps, n_modes), entries N(0, dt).

    Counter-based stream: each (base_seed, traj_index) pair keys an
    independent Philox generator, so paths are reproducible individually.
    """
    key = np.array([base_seed % 2 ** 64, traj_index % 2 ** 64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal((n_steps, n_modes)) * np.sqrt(dt)


def _sigma_raw(model: NoiseModel, coeffs: np.ndarray, grid: TorusGrid,
               y: np.ndarray, c_arr: np.ndarray, b_arr: np.ndarray) -> np.ndarray:
    """sigma(u) y before projection; supports batch axes on coeffs and y.

    coeffs: (..., 2, n1, n2); y: (..., n_modes).  Returns physical samples.
    """
    cf = np.tensordot(y, c_arr, axes=([-1], [0]))  # (..., n1, n2)
    bf = np.tensordot(y, b_arr, axes=([-1], [0]))
    lead = np.broadcast_shapes(coeffs.shape[:-3], y.shape[:-1])
    out = np.zeros(lead + (2, grid.n1, grid.n2))
    if np.any(cf != 0.0):
        k1 = grid.k1.astype(np.float64)
        d1u = spectral._phys(coeffs * (1j * k1), grid.n_points)
        out += cf[..., None, :, :] * d1u
    if np.any(bf != 0.0):
        u_phys = spectral._phys(coeffs, grid.n_points)
        out += bf[..., None, :, :] * model.g_eval(u_phys)
    return out


def apply_sigma(model: NoiseModel, u: SpectralField, y: np.ndarray) -> SpectralField:
    """Field sigma(u) y: composed channels, dealiased, projected, mean-free."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.n_modes,):
        raise ValueError(f"y must have shape ({model.n_modes},), got {y.shape}")
    grid = u.grid
    c_arr, b_arr = model.coefficient_fields(grid)
    phys = _sigma_raw(model, u.coeffs, grid, y, c_arr, b_arr)
    coeffs = spectral._spec(phys, grid.n_points) * grid.dealias_mask
    coeffs = spectral._leray_raw(coeffs, grid)
    coeffs[..., :, 0, 0] = 0.0
    return SpectralField(grid, coeffs)


def sigma_channels(model: NoiseModel, u: SpectralField) -> np.ndarray:
    """All projected channel fields sigma(u) psi_j, shape (n_modes, 2, n1, n2)."""
    grid = u.grid
    c_arr, b_arr = model.coefficient_fields(grid)
    eye = np.eye(model.n_modes)
    phys = _sigma_raw(model, u.coeffs[None], grid, eye, c_arr, b_arr)
    coeffs = spectral._spec(phys, grid.n_points) * grid.dealias_mask
    coeffs = spectral._leray_raw(coeffs, grid)
    coeffs[..., :, 0, 0] = 0.0
    return coeffs


def hs_norm_sq(model: NoiseModel, u: SpectralField, weight: np.ndarray | None = None,
               galerkin_n: int | None = None) -> float:
    """Squared Hilbert-Schmidt norm sum_j ||sigma(u) psi_j||^2.

    weight is an optional diagonal spectral weight (default L2); galerkin_n
    additionally truncates each channel to the first n basis elements.
    """
    chans = sigma_channels(model, u)
    if galerkin_n is not None:
        from .basis import galerkin_project_raw

        chans = galerkin_project_raw(chans, u.grid, galerkin_n)
    w = 1.0 if weight is None else weight
    return float(MEASURE * np.sum(w * np.abs(chans) ** 2))


@dataclass(frozen=True)
class ConditionCConstants:
    """Growth and Lipschitz constants derived from the declared budgets."""

    k0p: float
    k1p: float
    k0: float
    k1: float
    k2: float
    kt0: float
    kt1: float
    kt2: float
    l1: float
    l2: float
    eta: float

    def as_dict(self) -> dict[str, float]:
        return {
            "K0_prime": self.k0p, "K1_prime": self.k1p,
            "K0": self.k0, "K1": self.k1, "K2": self.k2,
            "Kt0": self.kt0, "Kt1": self.kt1, "Kt2": self.kt2,
            "L1": self.l1, "L2": self.l2, "eta": self.eta,
        }


def condition_c_bounds(model: NoiseModel, eta: float = 0.1) -> ConditionCConstants:
    """Constants for the three growth bounds and the Lipschitz bound.

    With budgets M1, M2, Cg and split weight eta:
        H^{-1}:  ||sigma||^2 <= K0' + K1' ||u||^2
        L^2:     ||sigma||^2 <= K0 + K1 ||u||^2 + K2 ||d1 u||^2
        H^{0,1}: ||sigma||^2 <= Kt0 + Kt1 (||u||^2 + ||d2 u||^2)
                                + Kt2 (||d1 u||^2 + ||d1 d2 u||^2)
        Lip:     ||sigma(u)-sigma(v)||^2 <= L1 ||u-v||^2 + L2 ||d1(u-v)||^2
    """
    if not 0.0 < eta:
        raise ValueError("eta must be positive")
    m1, m2, cg = model.m1, model.m2, model.cg
    pp = 1.0 + 1.0 / eta
    return ConditionCConstants(
        k0p=32.0 * np.pi ** 2 * m2 * cg ** 2,
        k1p=6.0 * m1 + 4.0 * m2 * cg ** 2,
        k0=16.0 * np.pi ** 2 * pp * m2 * cg ** 2,
        k1=2.0 * pp * m2 * cg ** 2,
        k2=(1.0 + eta) * m1,
        kt0=128.0 * np.pi ** 2 * pp * m2 * cg ** 2,
        kt1=16.0 * pp * m2 * cg ** 2,
        kt2=2.0 * (1.0 + eta) * m1,
        l1=pp * m2 * cg ** 2,
        l2=(1.0 + eta) * m1,
        eta=eta,
    )


@dataclass(frozen=True)
class GateResult:
    k2: float
    kt2: float
    l2: float
    existence_ok: bool
    uniqueness_ok: bool

    def describe(self) -> str:
        return (
            f"K2={self.k2:.6g} (<{EXISTENCE_K2_LIMIT:.6g}: {self.k2 < EXISTENCE_K2_LIMIT}), "
            f"Kt2={self.kt2:.6g} (<{EXISTENCE_KT2_LIMIT:.6g}: {self.kt2 < EXISTENCE_KT2_LIMIT}), "
            f"L2={self.l2:.6g} (<{UNIQUENESS_L2_LIMIT:.6g}: {self.l2 < UNIQUENESS_L2_LIMIT})"
        )


def condition_c_gate(constants: ConditionCConstants) -> GateResult:
    """Strict thresholds: existence needs K2 < 2/11 and Kt2 < 2/5;
    uniqueness additionally needs L2 < 2/5."""
    existence = constants.k2 < EXISTENCE_K2_LIMIT and constants.kt2 < EXISTENCE_KT2_LIMIT
    uniqueness = existence and constants.l2 < UNIQUENESS_L2_LIMIT
    return GateResult(k2=constants.k2, kt2=constants.kt2, l2=constants.l2,
                      existence_ok=bool(existence), uniqueness_ok=bool(uniqueness))


def _diag_norm_sq(coeffs: np.ndarray, w: np.ndarray) -> float:
    return float(MEASURE * np.sum(w * np.abs(coeffs) ** 2))


def condition_c_empirical_check(model: NoiseModel, fields: Sequence[SpectralField],
                                eta: float = 0.1,
                                report: NormReport | None = None) -> NormReport:
    """Audit every growth/Lipschitz inequality on sample fields.

    Channel norms are computed exactly (spectrally); the derived constants
    must dominate them for arbitrary solenoidal input.  Lipschitz rows pair
    consecutive fields.
    """
    if report is None:
        report = NormReport()
    cc = condition_c_bounds(model, eta=eta)
    for idx, u in enumerate(fields):
        grid = u.grid
        k1sq = grid.k1.astype(np.float64) ** 2
        k2sq = grid.k2.astype(np.float64) ** 2
        p = np.abs(u.coeffs) ** 2
        l2 = float(MEASURE * p.sum())
        d1 = float(MEASURE * (k1sq * p).sum())
        d2 = float(MEASURE * (k2sq * p).sum())
        d1d2 = float(MEASURE * (k1sq * k2sq * p).sum())
        chans = sigma_channels(model, u)
        hm1_w = 1.0 / (1.0 + grid.ksq)
        h01_w = 1.0 + k2sq
        hs_l2 = _diag_norm_sq(chans, np.ones_like(hm1_w))
        hs_hm1 = _diag_norm_sq(chans, hm1_w)
        hs_h01 = _diag_norm_sq(chans, h01_w)
        report.add(f"growth_hminus1[{idx}]", hs_hm1, cc.k0p + cc.k1p * l2, cc.k1p)
        report.add(f"growth_l2[{idx}]", hs_l2, cc.k0 + cc.k1 * l2 + cc.k2 * d1, cc.k2)
        report.add(f"growth_h01[{idx}]", hs_h01,
                   cc.kt0 + cc.kt1 * (l2 + d2) + cc.kt2 * (d1 + d1d2), cc.kt2)
    for idx in range(len(fields) - 1):
        u, v = fields[idx], fields[idx + 1]
        w = SpectralField(u.grid, u.coeffs - v.coeffs)
        pw = np.abs(w.coeffs) ** 2
        wl2 = float(MEASURE * pw.sum())
        wd1 = float(MEASURE * (u.grid.k1.astype(np.float64) ** 2 * pw).sum())
        diff = sigma_channels(model, u) - sigma_channels(model, v)
        hs_diff = float(MEASURE * np.sum(np.abs(diff) ** 2))
        report.add(f"lipschitz[{idx}]", hs_diff, cc.l1 * wl2 + cc.l2 * wd1, cc.l2)
    return report
