"""Real Fourier basis on the torus and exact spectral calculus.

The basis on a torus of length L is

    e_0 = 1/sqrt(L),
    e_k = sqrt(2/L) cos(2 pi k x / L)   for k >= 1,
    e_k = sqrt(2/L) sin(2 pi k x / L)   for k <= -1  (note the signed k),

so that d/dx e_k = (2 pi k / L) e_{-k} and -d^2/dx^2 e_k = lam_k e_k with
lam_k = (2 pi k / L)^2.  Coefficient vectors are real and indexed
k = -N..N (length 2N+1).  Derivatives are exact index/sign operations on
coefficients; transforms to uniform grids go through rfft/irfft.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigError

__all__ = [
    "SpectralBasis",
    "SpectralField",
    "GridSamples",
    "build_basis",
    "derivative",
    "project",
    "synthesize",
    "analyze",
    "quad_integral",
    "lambda_inner",
    "dealiased_grid_size",
    "grid_points",
]


@dataclass(frozen=True)
class SpectralBasis:
    """Torus length, truncation order and the associated eigenvalues."""

    L: float
    N: int

    def __post_init__(self):
        if not (self.L > 0):
            raise InvalidConfigError(f"torus length must be positive, got L={self.L}")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise InvalidConfigError(f"truncation order must be an integer >= 1, got N={self.N}")

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    @property
    def modes(self) -> np.ndarray:
        """Mode indices k = -N..N in coefficient-vector order."""
        return np.arange(-self.N, self.N + 1)

    @property
    def omega(self) -> np.ndarray:
        """First-derivative factors 2 pi k / L, ordered like the coefficients."""
        return 2.0 * np.pi * self.modes / self.L

    @property
    def lam(self) -> np.ndarray:
        """Laplacian eigenvalues lam_k = (2 pi k / L)^2."""
        w = self.omega
        return w * w

    def lambda_of(self, k: int) -> float:
        w = 2.0 * np.pi * k / self.L
        return w * w

    def index(self, k: int) -> int:
        """Position of mode k in the coefficient vector."""
        if abs(k) > self.N:
            raise InvalidArgumentError(f"mode {k} outside truncation N={self.N}")
        return k + self.N


@dataclass
class SpectralField:
    """A real trigonometric polynomial given by its basis coefficients."""

    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.dim,):
            raise InvalidArgumentError(
                f"expected {self.basis.dim} coefficients, got shape {self.coeffs.shape}"
            )

    def coeff(self, k: int) -> float:
        return float(self.coeffs[self.basis.index(k)])

    def mean_value(self) -> float:
        """Average over the torus: coefficient of e_0 divided by sqrt(L)."""
        return float(self.coeffs[self.basis.N]) / np.sqrt(self.basis.L)

    def copy(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs.copy())


@dataclass
class GridSamples:
    """Values at M uniformly spaced points x_j = j L / M on [0, L)."""

    values: np.ndarray
    L: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidArgumentError("grid samples must be a 1-d array with M >= 2")

    @property
    def M(self) -> int:
        return self.values.size


def build_basis(L: float, N: int) -> SpectralBasis:
    """Create the basis bookkeeping for a torus of length L with modes |k| <= N."""
    return SpectralBasis(float(L), int(N))


def unit_mode(basis: SpectralBasis, k: int, amplitude: float = 1.0) -> SpectralField:
    """The field amplitude * e_k."""
    y = np.zeros(basis.dim)
    y[basis.index(k)] = amplitude
    return SpectralField(basis, y)


def dealiased_grid_size(N: int, oversample: int = 4) -> int:
    """Grid size for evaluating nonlinear terms: oversample*(2N+1), rounded up to even."""
    M = oversample * (2 * N + 1)
    return M + (M % 2)


def grid_points(L: float, M: int) -> np.ndarray:
    return np.arange(M) * (L / M)


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Exact derivative of the given order (1..4) on coefficients.

    Closed forms per order, so that order 2 is exactly mode-wise
    multiplication by -lam_k and mode 0 vanishes for every order.
    """
    if order not in (1, 2, 3, 4):
        raise InvalidArgumentError(f"derivative order must be in 1..4, got {order}")
    b = f.basis
    y = f.coeffs
    w = b.omega
    lam = b.lam
    if order == 1:
        d = -w * y[::-1]
    elif order == 2:
        d = -lam * y
    elif order == 3:
        d = lam * w * y[::-1]
    else:
        d = lam * lam * y
    return SpectralField(b, d)


def project(f: SpectralField, N: int) -> SpectralField:
    """Orthogonal projection onto the span of modes |k| <= N."""
    b = f.basis
    if N > b.N:
        raise InvalidArgumentError(f"target truncation {N} exceeds source truncation {b.N}")
    target = SpectralBasis(b.L, int(N))
    lo = b.index(-N)
    hi = b.index(N) + 1
    return SpectralField(target, f.coeffs[lo:hi].copy())


def embed(f: SpectralField, N: int) -> SpectralField:
    """Zero-padded inclusion into a larger truncation N >= the field's own."""
    b = f.basis
    if N < b.N:
        raise InvalidArgumentError(f"target truncation {N} below source truncation {b.N}")
    target = SpectralBasis(b.L, int(N))
    y = np.zeros(target.dim)
    y[target.index(-b.N) : target.index(b.N) + 1] = f.coeffs
    return SpectralField(target, y)


def synthesize(f: SpectralField, M: int) -> GridSamples:
    """Evaluate the field at M uniform grid points via an inverse FFT."""
    b = f.basis
    if M < 2 * b.N + 1:
        raise InvalidArgumentError(f"grid size {M} undersamples truncation N={b.N}")
    return GridSamples(_synth_values(b, f.coeffs, M), b.L)


def _synth_values(basis: SpectralBasis, coeffs: np.ndarray, M: int) -> np.ndarray:
    N, L = basis.N, basis.L
    spec = np.zeros(M // 2 + 1, dtype=complex)
    spec[0] = M * coeffs[N] / np.sqrt(L)
    k = np.arange(1, N + 1)
    spec[1 : N + 1] = (M / np.sqrt(2.0 * L)) * (coeffs[N + k] + 1j * coeffs[N - k])
    return np.fft.irfft(spec, n=M)


def analyze(g: GridSamples, basis: SpectralBasis, N: int | None = None) -> SpectralField:
    """Recover coefficients of modes |k| <= N from uniform grid samples.

    Inverse of `synthesize` on band-limited fields up to round-off.
    """
    if N is None:
        N = basis.N
    if N > basis.N:
        raise InvalidArgumentError(f"requested truncation {N} exceeds basis N={basis.N}")
    if g.M < 2 * N + 1:
        raise InvalidArgumentError(f"grid size {g.M} undersamples truncation N={N}")
    target = basis if N == basis.N else SpectralBasis(basis.L, int(N))
    return SpectralField(target, _analyze_coeffs(g.values, basis.L, N))


def _analyze_coeffs(values: np.ndarray, L: float, N: int) -> np.ndarray:
    M = values.size
    spec = np.fft.rfft(values)
    y = np.empty(2 * N + 1)
    y[N] = np.sqrt(L) * spec[0].real / M
    k = np.arange(1, N + 1)
    y[N + k] = np.sqrt(2.0 * L) * spec[1 : N + 1].real / M
    y[N - k] = np.sqrt(2.0 * L) * spec[1 : N + 1].imag / M
    return y


def quad_integral(g: GridSamples) -> float:
    """Integral over the torus by the periodic rectangle rule (spectrally accurate)."""
    return float(g.L * np.mean(g.values))


def lambda_inner(f1: SpectralField, f2: SpectralField) -> float:
    """Weighted inner product sum_j lam_j y1^j y2^j = <d/dx v1, d/dx v2>_{L^2}."""
    if f1.basis != f2.basis:
        raise InvalidArgumentError("lambda_inner requires fields on the same basis")
    return float(np.sum(f1.basis.lam * f1.coeffs * f2.coeffs))


def grid_derivative(values: np.ndarray, L: float, order: int = 1) -> np.ndarray:
    """Spectral derivative of grid samples at the grid's own resolution.

    Used for derivatives of non-band-limited products; the Nyquist mode is
    zeroed for odd orders.
    """
    M = values.shape[-1]
    k_ang = 2.0 * np.pi * np.fft.rfftfreq(M, d=L / M)
    mult = (1j * k_ang) ** order
    if order % 2 == 1 and M % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values, axis=-1) * mult, n=M, axis=-1)
