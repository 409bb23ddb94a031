"""Assembly of the finite-dimensional SDE right-hand side.

For the coefficient vector y of v = sum_j y^j e_j the components are

    drift1^i      = < F^2(v) d^3/dx^3 v, d/dx e_i >,
    drift2^i      = -(1/2) gR^2(||v||_inf) < sum_k sigma_k F'(v) d/dx(sigma_k F(v)), d/dx e_i >,
    diffusion_k^i = - gR(||v||_inf) < sigma_k F(v), d/dx e_i >,

all in divergence form, so mode 0 of every output vanishes exactly and the
mean value is conserved by any explicit step.  Nonlinear terms are sampled
on an oversampled grid (default 4x), multiplied pointwise, re-analyzed and
truncated; that fixed order of operations *defines* the discrete operator.
The inner derivative in drift2 is applied spectrally at the grid's own
resolution.  Contractions use <w, d/dx e_i> = omega_i * what^{-i}.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgumentError
from .mobility import MobilityParams, f_eps, f_eps_d1, fsq
from .noise import NoiseModel
from .spectral import (
    SpectralBasis,
    SpectralField,
    _analyze_coeffs,
    _synth_values,
    dealiased_grid_size,
    grid_derivative,
)

__all__ = ["cutoff_value", "smooth_cutoff", "a1", "a2", "bk", "rhs_bundle", "RhsContext"]


def _psi(t):
    """exp(-1/t) for t > 0, 0 otherwise; the standard smooth bump ingredient."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_cutoff(s):
    """Smooth transition g with g = 1 on [0, 1] and g = 0 on [2, inf)."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    a = _psi(2.0 - s)
    b = _psi(s - 1.0)
    out = np.ones_like(s)
    mid = (s > 1.0) & (s < 2.0)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[s >= 2.0] = 0.0
    return float(out[0]) if scalar else out


def cutoff_value(v: SpectralField, R: float, oversample: int = 4) -> float:
    """gR(||v||_inf) with the sup norm estimated on the oversampled grid."""
    if R == math.inf:
        return 1.0
    if not (R > 0):
        raise InvalidArgumentError(f"cutoff level must be positive, got R={R}")
    M = dealiased_grid_size(v.basis.N, oversample)
    sup = float(np.max(np.abs(_synth_values(v.basis, v.coeffs, M))))
    return float(smooth_cutoff(sup / R))


class RhsContext:
    """Precomputed grids and mode samples for repeated right-hand-side evaluation.

    Pure given (params, noise, R); every evaluation method only reads the
    precomputed arrays, so one context can be shared across threads.
    """

    def __init__(
        self,
        basis: SpectralBasis,
        params: MobilityParams,
        noise: NoiseModel | None,
        R: float = math.inf,
        oversample: int = 4,
        M: int | None = None,
    ):
        if noise is not None and noise.basis != basis:
            raise InvalidArgumentError("noise model and state live on different bases")
        if not (R == math.inf or R > 0):
            raise InvalidArgumentError(f"cutoff level must be positive or inf, got R={R}")
        self.basis = basis
        self.params = params
        self.noise = noise
        self.R = R
        self.M = int(M) if M is not None else dealiased_grid_size(basis.N, oversample)
        if self.M < 2 * basis.N + 1:
            raise InvalidArgumentError(f"grid size {self.M} undersamples N={basis.N}")
        self.omega = basis.omega
        self.lam = basis.lam
        self.dx_weight = basis.L / self.M
        if noise is not None and noise.n_modes > 0:
            self.active = noise.active_modes()
            self.sigma_grid = np.stack(
                [_synth_values(basis, noise.sigma_field(k).coeffs, self.M) for k in self.active]
            ) if self.active.size else np.zeros((0, self.M))
        else:
            self.active = np.array([], dtype=int)
            self.sigma_grid = np.zeros((0, self.M))

    # -- small helpers ---------------------------------------------------

    def values(self, y: np.ndarray) -> np.ndarray:
        return _synth_values(self.basis, y, self.M)

    def d3_values(self, y: np.ndarray) -> np.ndarray:
        lam, w = self.lam, self.omega
        return _synth_values(self.basis, lam * w * y[::-1], self.M)

    def contract_dx(self, w_grid: np.ndarray) -> np.ndarray:
        """<w, d/dx e_i> for all i: analyze, reverse, scale by omega."""
        what = _analyze_coeffs(w_grid, self.basis.L, self.basis.N)
        return self.omega * what[::-1]

    def gamma(self, v_grid: np.ndarray) -> float:
        if self.R == math.inf:
            return 1.0
        return float(smooth_cutoff(float(np.max(np.abs(v_grid))) / self.R))

    # -- right-hand side pieces -------------------------------------------

    def drift1(self, y: np.ndarray, v_grid=None, d3_grid=None) -> np.ndarray:
        v = self.values(y) if v_grid is None else v_grid
        d3 = self.d3_values(y) if d3_grid is None else d3_grid
        return self.contract_dx(fsq(v, self.params) * d3)

    def evaluate(self, y: np.ndarray, with_correction: bool = True):
        """Full right-hand side at state y.

        Returns (drift, diffusion, stats) where drift includes the Itô
        correction iff `with_correction`, diffusion has one row per active
        noise mode, and stats carries dissipation, gamma, grid min/max of v
        (all byproducts of arrays already in hand).
        """
        v = self.values(y)
        d3 = self.d3_values(y)
        flux = f_eps(v, self.params) * d3
        dissipation = self.dx_weight * float(np.sum(flux * flux))
        drift = self.contract_dx(f_eps(v, self.params) * flux)
        gamma = self.gamma(v)
        n_act = self.active.size
        diffusion = np.zeros((n_act, self.basis.dim))
        if n_act and gamma > 0.0:
            fv = f_eps(v, self.params)
            w1 = self.sigma_grid * fv[None, :]
            what1 = np.stack([_analyze_coeffs(row, self.basis.L, self.basis.N) for row in w1])
            diffusion = -gamma * self.omega[None, :] * what1[:, ::-1]
            if with_correction:
                dw1 = grid_derivative(w1, self.basis.L, 1)
                s = np.sum(self.sigma_grid * dw1, axis=0) * f_eps_d1(v, self.params)
                drift = drift - 0.5 * gamma * gamma * self.contract_dx(s)
        stats = {
            "dissipation": dissipation,
            "gamma": gamma,
            "min_value": float(np.min(v)),
            "sup_value": float(np.max(np.abs(v))),
            "max_mobility": float(np.max(fsq(v, self.params))),
        }
        return drift, diffusion, stats


def a1(y: SpectralField, params: MobilityParams, oversample: int = 4, M: int | None = None) -> SpectralField:
    """Thin-film drift < F^2(v) d^3 v, d/dx e_i >; mode 0 is exactly zero."""
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, None, math.inf, oversample, M)
    return SpectralField(y.basis, ctx.drift1(y.coeffs))


def a2(
    y: SpectralField,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    oversample: int = 4,
    M: int | None = None,
) -> SpectralField:
    """Correction drift with prefactor -(1/2) gR^2(||v||_inf)."""
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, noise, R, oversample, M)
    v = ctx.values(y.coeffs)
    gamma = ctx.gamma(v)
    out = np.zeros(y.basis.dim)
    if ctx.active.size and gamma > 0.0:
        fv = f_eps(v, params)
        w1 = ctx.sigma_grid * fv[None, :]
        dw1 = grid_derivative(w1, y.basis.L, 1)
        s = np.sum(ctx.sigma_grid * dw1, axis=0) * f_eps_d1(v, params)
        out = -0.5 * gamma * gamma * ctx.contract_dx(s)
    return SpectralField(y.basis, out)


def bk(
    y: SpectralField,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    k: int = 0,
    oversample: int = 4,
    M: int | None = None,
) -> SpectralField:
    """Diffusion coefficient vector for mode k; zero field for inactive modes."""
    params.require_positive_eps()
    if abs(k) > noise.K or noise.nu_of(k) == 0.0:
        return SpectralField(y.basis, np.zeros(y.basis.dim))
    ctx = RhsContext(y.basis, params, noise, R, oversample, M)
    v = ctx.values(y.coeffs)
    gamma = ctx.gamma(v)
    sig = _synth_values(y.basis, noise.sigma_field(k).coeffs, ctx.M)
    return SpectralField(y.basis, -gamma * ctx.contract_dx(sig * f_eps(v, params)))


def rhs_bundle(
    y: SpectralField,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    oversample: int = 4,
):
    """All pieces at once: (a1 field, a2 field, {k: B^k field})."""
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, noise, R, oversample)
    drift_full, diffusion, _ = ctx.evaluate(y.coeffs, with_correction=True)
    drift1 = ctx.drift1(y.coeffs)
    b_fields = {
        int(k): SpectralField(y.basis, diffusion[j].copy()) for j, k in enumerate(ctx.active)
    }
    return (
        SpectralField(y.basis, drift1),
        SpectralField(y.basis, drift_full - drift1),
        b_fields,
    )
