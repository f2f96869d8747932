"""Spectral core for vector fields on the 2-pi periodic torus.

Fields are velocity fields u = (u1, u2) sampled on a uniform n1 x n2 grid
over [0, 2pi)^2.  Spectral coefficients use the amplitude convention: the
function exp(i k.x) has coefficient 1 at mode k, so Parseval reads
int |u|^2 dx = (2pi)^2 * sum_k |u_hat(k)|^2.  Wavevectors run over
k_i in {-n_i/2 + 1, ..., n_i/2} with the Nyquist column labelled +n_i/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BlowUpError

HERMITIAN_TOL = 1e-10


def _wavenumbers(n: int) -> np.ndarray:
    k = ((np.arange(n) + n // 2) % n) - n // 2
    k[n // 2] = n // 2  # Nyquist labelled positive
    return k.astype(np.int64)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on [0, 2pi)^2 with n1 x n2 points (both even, >= 4)."""

    n1: int
    n2: int

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"grid size must be even and >= 4, got {n}")

    @cached_property
    def x1(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n1) / self.n1

    @cached_property
    def x2(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n2) / self.n2

    @cached_property
    def k1(self) -> np.ndarray:
        """Wavevector component along axis 1, FFT layout, shape (n1, 1)."""
        return _wavenumbers(self.n1)[:, None]

    @cached_property
    def k2(self) -> np.ndarray:
        """Wavevector component along axis 2, FFT layout, shape (1, n2)."""
        return _wavenumbers(self.n2)[None, :]

    @cached_property
    def ksq(self) -> np.ndarray:
        return (self.k1 ** 2 + self.k2 ** 2).astype(np.float64)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep |k1| <= n1//3 and |k2| <= n2//3."""
        return (np.abs(self.k1) <= self.n1 // 3) & (np.abs(self.k2) <= self.n2 // 3)

    @property
    def n_points(self) -> int:
        return self.n1 * self.n2

    @property
    def cell_area(self) -> float:
        return (2.0 * np.pi) ** 2 / self.n_points

    def index_of(self, k: tuple[int, int]) -> tuple[int, int]:
        """FFT-layout array index of wavevector k (k may be any alias)."""
        return (int(k[0]) % self.n1, int(k[1]) % self.n2)


@dataclass
class PhysicalField:
    """Real velocity samples, shape (2, n1, n2); x1 index slow, x2 fast."""

    grid: TorusGrid
    samples: np.ndarray

    def __post_init__(self):
        expected = (2, self.grid.n1, self.grid.n2)
        if self.samples.shape != expected:
            raise ValueError(f"samples shape {self.samples.shape}, expected {expected}")

    def copy(self) -> "PhysicalField":
        return PhysicalField(self.grid, self.samples.copy())


@dataclass
class SpectralField:
    """Complex Fourier coefficients, shape (2, n1, n2), FFT layout."""

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        expected = (2, self.grid.n1, self.grid.n2)
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs shape {self.coeffs.shape}, expected {expected}")

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def mode(self, k: tuple[int, int]) -> np.ndarray:
        """Coefficient 2-vector at wavevector k."""
        i, j = self.grid.index_of(k)
        return self.coeffs[:, i, j]

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[:, 0, 0]


def zeros_spectral(grid: TorusGrid) -> SpectralField:
    return SpectralField(grid, np.zeros((2, grid.n1, grid.n2), dtype=np.complex128))


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max deviation from conjugate symmetry c(-k) = conj(c(k))."""
    flipped = np.conj(np.roll(coeffs[..., ::-1, ::-1], shift=(1, 1), axis=(-2, -1)))
    return float(np.max(np.abs(coeffs - flipped)))


def forward_transform(f: PhysicalField) -> SpectralField:
    """FFT of real samples into amplitude-normalized coefficients."""
    coeffs = np.fft.fft2(f.samples, axes=(-2, -1)) / f.grid.n_points
    return SpectralField(f.grid, coeffs)


def inverse_transform(u: SpectralField, check: bool = True) -> PhysicalField:
    """Synthesis back to real samples.

    Raises ValueError when the coefficients break conjugate symmetry by
    more than HERMITIAN_TOL relative to the largest coefficient.
    """
    if check:
        scale = max(float(np.max(np.abs(u.coeffs))), 1.0)
        defect = hermitian_defect(u.coeffs)
        if defect > HERMITIAN_TOL * scale:
            raise ValueError(
                f"coefficients are not conjugate-symmetric: defect {defect:.3e} "
                f"exceeds {HERMITIAN_TOL:.1e} x scale {scale:.3e}"
            )
    samples = np.fft.ifft2(u.coeffs, axes=(-2, -1)).real * u.grid.n_points
    return PhysicalField(u.grid, samples)


def _phys(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    # unchecked synthesis for internal pipelines; supports leading batch axes
    return np.fft.ifft2(coeffs, axes=(-2, -1)).real * n_points


def _spec(samples: np.ndarray, n_points: int) -> np.ndarray:
    return np.fft.fft2(samples, axes=(-2, -1)) / n_points


def derivative(u: SpectralField, axis: int, order: int = 1) -> SpectralField:
    """Partial derivative along axis 1 or 2: multiply mode k by (i k_axis)^order."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    k = u.grid.k1 if axis == 1 else u.grid.k2
    return SpectralField(u.grid, u.coeffs * (1j * k.astype(np.float64)) ** order)


def dealias(u: SpectralField) -> SpectralField:
    return SpectralField(u.grid, u.coeffs * u.grid.dealias_mask)


def _leray_raw(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    k1 = grid.k1.astype(np.float64)
    k2 = grid.k2.astype(np.float64)
    ksq = np.where(grid.ksq == 0.0, 1.0, grid.ksq)  # k=0 handled by zero-mean rule
    div = k1 * coeffs[..., 0, :, :] + k2 * coeffs[..., 1, :, :]
    div = div / ksq
    out = coeffs.copy()
    out[..., 0, :, :] -= k1 * div
    out[..., 1, :, :] -= k2 * div
    out[..., :, 0, 0] = coeffs[..., :, 0, 0]  # only k=(0,0) has |k|=0
    return out


def leray_project(u: SpectralField) -> SpectralField:
    """Remove the gradient part: u_hat(k) -> u_hat(k) - k (k.u_hat(k)) / |k|^2.

    The k = 0 mode is left untouched; solvers pin it to zero separately.
    """
    return SpectralField(u.grid, _leray_raw(u.coeffs, u.grid))


def divergence_defect(u: SpectralField) -> float:
    """Max |k . u_hat(k)| over modes; zero for solenoidal fields."""
    k1 = u.grid.k1.astype(np.float64)
    k2 = u.grid.k2.astype(np.float64)
    return float(np.max(np.abs(k1 * u.coeffs[0] + k2 * u.coeffs[1])))


def zero_mean(u: SpectralField) -> SpectralField:
    out = u.copy()
    out.coeffs[:, 0, 0] = 0.0
    return out


def _advection_raw(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Dealiased spectral u.grad(u) for (..., 2, n1, n2) coefficient arrays."""
    n = grid.n_points
    k1 = grid.k1.astype(np.float64)
    k2 = grid.k2.astype(np.float64)
    # one batched synthesis call: per-call FFT overhead dominates small grids
    u, d1u, d2u = _phys(np.stack((coeffs, coeffs * (1j * k1), coeffs * (1j * k2))), n)
    adv = u[..., 0:1, :, :] * d1u + u[..., 1:2, :, :] * d2u
    out = _spec(adv, n) * grid.dealias_mask
    out[..., :, 0, 0] = 0.0  # advection of a solenoidal field has zero mean
    return out


def nonlinear_term(u: SpectralField) -> SpectralField:
    """Dealiased pseudospectral advection term u.grad(u).

    Products are formed in physical space and transformed back; the 2/3-rule
    mask makes the result exact on band-limited input (band <= n//3).  The
    output is not Leray-projected.
    """
    return SpectralField(u.grid, _advection_raw(u.coeffs, u.grid))


def nonlinear_term_oracle(u: SpectralField, backend: str | None = None) -> SpectralField:
    """Advection term by direct truncated convolution, no FFT in the product.

    Quadratic in the mode count per output mode, so guarded to grids with
    n1*n2 <= 1024.  Backend 'numba' or 'numpy' may be forced; default follows
    the ANS2D_ORACLE_BACKEND environment variable.
    """
    from . import kernels

    grid = u.grid
    if grid.n_points > 1024:
        raise ValueError(f"oracle limited to n1*n2 <= 1024, got {grid.n_points}")
    centered = to_centered(u.coeffs, grid)
    out_centered = kernels.direct_advection(centered, grid.n1, grid.n2, backend=backend)
    return SpectralField(grid, from_centered(out_centered, grid))


def to_centered(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Reorder FFT layout to ascending k: index a holds k = a - (n//2 - 1)."""
    out = np.roll(coeffs, shift=(grid.n1 // 2 - 1, grid.n2 // 2 - 1), axis=(-2, -1))
    return out


def from_centered(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.roll(coeffs, shift=(-(grid.n1 // 2 - 1), -(grid.n2 // 2 - 1)), axis=(-2, -1))


def check_finite(coeffs: np.ndarray, l2_sq: float, l2_sq_initial: float,
                 t_last: float, guard: float = 1e6) -> None:
    """Raise BlowUpError on non-finite values or runaway norm growth."""
    if not np.all(np.isfinite(coeffs)):
        raise BlowUpError("non-finite coefficients", last_finite_time=t_last)
    if l2_sq_initial > 0.0 and l2_sq > guard ** 2 * l2_sq_initial:
        raise BlowUpError(
            f"L2 norm exceeded {guard:.1e} x initial", last_finite_time=t_last
        )


# ---------------------------------------------------------------------------
# ready-made initial fields


def shear_field(grid: TorusGrid, axis: int = 1, amplitude: float = 1.0) -> SpectralField:
    """Unidirectional shear: axis=1 gives (0, A sin x1), axis=2 gives (A sin x2, 0)."""
    f = zeros_spectral(grid)
    if axis == 1:
        # sin x1 = (e^{ix1} - e^{-ix1}) / (2i) in component 2
        f.coeffs[1, grid.index_of((1, 0))[0], 0] = amplitude / 2j
        f.coeffs[1, grid.index_of((-1, 0))[0], 0] = -amplitude / 2j
    elif axis == 2:
        f.coeffs[0, 0, grid.index_of((0, 1))[1]] = amplitude / 2j
        f.coeffs[0, 0, grid.index_of((0, -1))[1]] = -amplitude / 2j
    else:
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    return f


def taylor_green(grid: TorusGrid, amplitude: float = 1.0) -> SpectralField:
    """Cellular field A (sin x1 cos x2, -cos x1 sin x2); solenoidal."""
    x1 = grid.x1[:, None]
    x2 = grid.x2[None, :]
    samples = np.stack([
        amplitude * np.sin(x1) * np.cos(x2),
        -amplitude * np.cos(x1) * np.sin(x2),
    ])
    return forward_transform(PhysicalField(grid, samples))


def random_solenoidal_field(grid: TorusGrid, band: int, amplitude: float,
                            rng: np.random.Generator) -> SpectralField:
    """Random mean-zero solenoidal field supported on 0 < max|k_i| <= band."""
    if band > min(grid.n1, grid.n2) // 3:
        raise ValueError(f"band {band} exceeds dealiased range of {grid.n1}x{grid.n2} grid")
    raw = rng.standard_normal((2, grid.n1, grid.n2))
    coeffs = _spec(raw, grid.n_points)
    keep = (np.abs(grid.k1) <= band) & (np.abs(grid.k2) <= band)
    coeffs *= keep
    f = zero_mean(leray_project(SpectralField(grid, coeffs)))
    norm = np.sqrt((2.0 * np.pi) ** 2 * np.sum(np.abs(f.coeffs) ** 2))
    if norm > 0.0:
        f.coeffs *= amplitude / norm
    return f
