"""Sobolev, anisotropic, and mixed Lebesgue norms plus inequality checks.

All norms include the physical measure of the torus: the L2 norm of a
field is sqrt((2pi)^2 sum_k |u_hat(k)|^2), so || sin x2 ||_{L2}^2 = 2 pi^2.
Mixed norms L^p_h(L^q_v) iterate outer in x1 and inner in x2 (and the
transposed order for L^q_v(L^p_h)); they are evaluated by grid quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralField, TorusGrid

MEASURE = (2.0 * np.pi) ** 2


def weighted_coeff_sum_sq(u: SpectralField, w: np.ndarray) -> float:
    """(2pi)^2 * sum_k w(k) |u_hat(k)|^2 over both components."""
    return float(MEASURE * np.sum(w * np.abs(u.coeffs) ** 2))


def sobolev_norm(u: SpectralField, s1: float, s2: float,
                 homogeneous: bool = False) -> float:
    """Anisotropic Sobolev norm H^{s1,s2} (or its homogeneous variant).

    Inhomogeneous weight (1 + k1^2)^s1 (1 + k2^2)^s2; homogeneous weight
    |k1|^{2 s1} |k2|^{2 s2} with 0^0 = 1 so a zero exponent drops the factor.
    """
    k1 = u.grid.k1.astype(np.float64)
    k2 = u.grid.k2.astype(np.float64)
    if homogeneous:
        w = np.abs(k1) ** (2.0 * s1) if s1 != 0.0 else np.ones_like(k1)
        w = w * (np.abs(k2) ** (2.0 * s2) if s2 != 0.0 else np.ones_like(k2))
    else:
        w = (1.0 + k1 ** 2) ** s1 * (1.0 + k2 ** 2) ** s2
    return float(np.sqrt(weighted_coeff_sum_sq(u, w)))


def l2_norm_sq(u: SpectralField) -> float:
    return float(MEASURE * np.sum(np.abs(u.coeffs) ** 2))


def l2_inner(u: SpectralField, v: SpectralField) -> float:
    return float(MEASURE * np.sum(u.coeffs * np.conj(v.coeffs)).real)


def h01_inner(u: SpectralField, v: SpectralField) -> float:
    """Inner product (u, v) + (d2 u, d2 v), i.e. weight 1 + k2^2."""
    w = 1.0 + u.grid.k2.astype(np.float64) ** 2
    return float(MEASURE * np.sum(w * u.coeffs * np.conj(v.coeffs)).real)


def _lp_along(samples: np.ndarray, p: float, axis: int, h: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(np.abs(samples), axis=axis)
    return (np.sum(np.abs(samples) ** p, axis=axis) * h) ** (1.0 / p)


def mixed_norm(grid: TorusGrid, samples: np.ndarray, p_h: float, q_v: float,
               h_outer: bool = True) -> float:
    """Iterated norm of a scalar sample array (n1, n2).

    h_outer=True gives L^{p_h}_h(L^{q_v}_v): inner norm over x2 for each x1,
    outer norm over x1.  h_outer=False gives the transposed order
    L^{q_v}_v(L^{p_h}_h).
    """
    if samples.shape != (grid.n1, grid.n2):
        raise ValueError(f"expected scalar samples {(grid.n1, grid.n2)}, got {samples.shape}")
    h1 = 2.0 * np.pi / grid.n1
    h2 = 2.0 * np.pi / grid.n2
    if h_outer:
        inner = _lp_along(samples, q_v, axis=1, h=h2)
        return float(_lp_along(inner, p_h, axis=0, h=h1))
    inner = _lp_along(samples, p_h, axis=0, h=h1)
    return float(_lp_along(inner, q_v, axis=0, h=h2))


@dataclass
class NormReport:
    """Rows of inequality checks: (name, lhs, rhs, constant, passed)."""

    rows: list[tuple[str, float, float, float, bool]] = field(default_factory=list)

    def add(self, name: str, lhs: float, rhs: float, constant: float,
            slack: float = 0.0) -> bool:
        ok = bool(lhs <= rhs * (1.0 + slack) + 1e-300)
        self.rows.append((name, float(lhs), float(rhs), float(constant), ok))
        return ok

    @property
    def all_passed(self) -> bool:
        return all(r[4] for r in self.rows)

    def failures(self) -> list[tuple[str, float, float, float, bool]]:
        return [r for r in self.rows if not r[4]]


def _scalar_d1(grid: TorusGrid, samples: np.ndarray) -> np.ndarray:
    c = np.fft.fft2(samples)
    return np.fft.ifft2(1j * grid.k1.astype(np.float64) * c).real


def _scalar_d2(grid: TorusGrid, samples: np.ndarray) -> np.ndarray:
    c = np.fft.fft2(samples)
    return np.fft.ifft2(1j * grid.k2.astype(np.float64) * c).real


def check_anisotropic_embedding(grid: TorusGrid, samples: np.ndarray,
                                report: NormReport | None = None,
                                slack: float = 1e-9) -> NormReport:
    """Periodic sup-trace bounds in both axis orientations.

    For scalar f on the torus:
        ||f||_{L2_v(L^inf_h)}^2 <= (1/2pi) ||f||^2 + 2 ||f|| ||d1 f||
        ||f||_{L2_h(L^inf_v)}^2 <= (1/2pi) ||f||^2 + 2 ||f|| ||d2 f||
    The (1/2pi) mean term is what periodicity adds over the whole-space
    two-factor bound; the whole-space ratio is recorded unasserted.
    """
    if report is None:
        report = NormReport()
    h1 = 2.0 * np.pi / grid.n1
    h2 = 2.0 * np.pi / grid.n2
    l2 = float(np.sqrt(np.sum(samples ** 2) * h1 * h2))
    d1 = _scalar_d1(grid, samples)
    d2 = _scalar_d2(grid, samples)
    l2_d1 = float(np.sqrt(np.sum(d1 ** 2) * h1 * h2))
    l2_d2 = float(np.sqrt(np.sum(d2 ** 2) * h1 * h2))

    # sup over x1 (inner inf-norm along axis 0), L2 over x2 -- and transposed
    sup_h = float(np.sqrt(np.sum(np.max(samples ** 2, axis=0)) * h2))
    sup_v = float(np.sqrt(np.sum(np.max(samples ** 2, axis=1)) * h1))

    rhs_h = l2 ** 2 / (2.0 * np.pi) + 2.0 * l2 * l2_d1
    rhs_v = l2 ** 2 / (2.0 * np.pi) + 2.0 * l2 * l2_d2
    report.add("embedding_sup_x1", sup_h ** 2, rhs_h, 2.0, slack=slack)
    report.add("embedding_sup_x2", sup_v ** 2, rhs_v, 2.0, slack=slack)

    # whole-space form, reported only: ratio of lhs^2 to 2 ||f|| ||d f||
    for name, sup, prod in (("wholespace_ratio_x1", sup_h, l2 * l2_d1),
                            ("wholespace_ratio_x2", sup_v, l2 * l2_d2)):
        ratio = sup ** 2 / (2.0 * prod) if prod > 0 else np.inf
        report.rows.append((name, sup ** 2, 2.0 * prod, float(ratio), True))
    return report


def check_minkowski(grid: TorusGrid, samples: np.ndarray, p: float, q: float,
                    report: NormReport | None = None,
                    slack: float = 1e-9) -> NormReport:
    """Iterated-norm ordering: for q <= p, the outer-p order is the smaller."""
    if report is None:
        report = NormReport()
    if q > p:
        raise ValueError(f"ordering needs q <= p, got q={q} > p={p}")
    lhs = mixed_norm(grid, samples, p, q, h_outer=True)
    rhs = mixed_norm(grid, samples, p, q, h_outer=False)
    report.add(f"minkowski_p{p:g}_q{q:g}", lhs, rhs, 1.0, slack=slack)
    return report
