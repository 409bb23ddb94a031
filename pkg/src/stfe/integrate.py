"""Time discretization of the spectral SDE system.

Three steppers share the drift/diffusion assembly from `rhs`:

  * euler_maruyama    explicit Ito step including the correction drift,
  * heun_stratonovich midpoint predictor-corrector on the thin-film drift
                      plus Stratonovich-interpreted noise (no correction
                      term); used for cross-validation of the correction,
  * imex              Euler-Maruyama with the stiff constant-coefficient
                      fourth-derivative shift solved implicitly, which is a
                      diagonal division per mode.

Every stepper leaves the mode-0 coefficient untouched (divergence form), so
the mean value is conserved to round-off along any trajectory.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, InvalidArgumentError, InvalidConfigError
from .mobility import MobilityParams, fsq, g_eps
from .noise import NoiseModel, WienerPath, sample_increments
from .rhs import RhsContext
from .spectral import SpectralBasis, SpectralField, _synth_values

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "step_em",
    "step_heun_stratonovich",
    "step_imex",
    "simulate",
]

SCHEMES = ("euler_maruyama", "heun_stratonovich", "imex")
STABILITY_SAFETY = 0.25  # explicit-step bound dt <= safety / (lam_N^2 * max F^2)


@dataclass(frozen=True)
class IntegratorConfig:
    T: float
    dt: float
    scheme: str = "euler_maruyama"
    c_imex: float = 0.0
    record_every: int = 1

    def __post_init__(self):
        if not (self.T >= 0):
            raise InvalidConfigError(f"horizon must be >= 0, got T={self.T}")
        if self.T > 0 and not (0 < self.dt <= self.T):
            raise InvalidConfigError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        if self.scheme not in SCHEMES:
            raise InvalidConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.c_imex < 0:
            raise InvalidConfigError(f"c_imex must be >= 0, got {self.c_imex}")
        if self.record_every < 1:
            raise InvalidConfigError(f"record_every must be >= 1, got {self.record_every}")

    @property
    def n_steps(self) -> int:
        if self.T == 0:
            return 0
        n = round(self.T / self.dt)
        if not math.isclose(n * self.dt, self.T, rel_tol=1e-9, abs_tol=0.0):
            raise InvalidConfigError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        return n


@dataclass
class Trajectory:
    """Recorded states and functionals of one realization."""

    basis: SpectralBasis
    times: np.ndarray
    coeffs: np.ndarray  # shape (n_records, 2N+1)
    functionals: dict  # name -> array over records
    path: WienerPath | None = None
    record_every: int = 1
    # time integrals accumulated every step with the left-endpoint rule
    h2_time_integral: float = 0.0
    dissipation_time_integral: float = 0.0
    stability_violations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_records(self) -> int:
        return len(self.times)

    def state(self, i: int) -> SpectralField:
        return SpectralField(self.basis, self.coeffs[i].copy())

    def final_state(self) -> SpectralField:
        return self.state(self.n_records - 1)

    def grid_values(self, M: int) -> np.ndarray:
        """All recorded states sampled on an M-point grid, shape (n_records, M)."""
        return np.stack([_synth_values(self.basis, row, M) for row in self.coeffs])


def _em_increment(ctx: RhsContext, y: np.ndarray, dt: float, dW: np.ndarray):
    drift, diffusion, stats = ctx.evaluate(y, with_correction=True)
    dy = drift * dt
    if diffusion.shape[0]:
        dy = dy + diffusion.T @ dW
    return dy, stats


def step_em(
    y: SpectralField,
    dt: float,
    dW: np.ndarray,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    oversample: int = 4,
) -> SpectralField:
    """One explicit Ito step y + (drift1 + drift2) dt + sum_k B^k dW^k."""
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, noise, R, oversample)
    dy, _ = _em_increment(ctx, y.coeffs, dt, _active_increments(ctx, dW))
    out = y.coeffs + dy
    _check_finite(out, 0, 0.0, y.coeffs)
    return SpectralField(y.basis, out)


def _heun_increment(ctx: RhsContext, y: np.ndarray, dt: float, dW: np.ndarray):
    drift0, diff0, stats = ctx.evaluate(y, with_correction=False)
    pred = y + drift0 * dt
    if diff0.shape[0]:
        pred = pred + diff0.T @ dW
    drift1, diff1, _ = ctx.evaluate(pred, with_correction=False)
    dy = 0.5 * (drift0 + drift1) * dt
    if diff0.shape[0]:
        dy = dy + 0.5 * (diff0 + diff1).T @ dW
    return dy, stats


def step_heun_stratonovich(
    y: SpectralField,
    dt: float,
    dW: np.ndarray,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    oversample: int = 4,
) -> SpectralField:
    """Midpoint predictor-corrector step; the noise is read in the Stratonovich sense."""
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, noise, R, oversample)
    dy, _ = _heun_increment(ctx, y.coeffs, dt, _active_increments(ctx, dW))
    out = y.coeffs + dy
    _check_finite(out, 0, 0.0, y.coeffs)
    return SpectralField(y.basis, out)


def _imex_increment(ctx: RhsContext, y: np.ndarray, dt: float, dW: np.ndarray, c: float):
    drift, diffusion, stats = ctx.evaluate(y, with_correction=True)
    lam2 = ctx.lam * ctx.lam
    rhs = y + dt * (drift + c * lam2 * y)
    if diffusion.shape[0]:
        rhs = rhs + diffusion.T @ dW
    return rhs / (1.0 + dt * c * lam2) - y, stats


def step_imex(
    y: SpectralField,
    dt: float,
    dW: np.ndarray,
    params: MobilityParams,
    noise: NoiseModel,
    R: float = math.inf,
    c_imex: float = 0.0,
    oversample: int = 4,
) -> SpectralField:
    """Semi-implicit step: (I + dt c d^4/dx^4) y' = y + dt (drift + c d^4/dx^4 y) + noise.

    The shift is diagonal in the basis, so the solve is a division by
    1 + dt c lam_k^2 per mode.  c_imex = 0 reduces to the explicit step.
    """
    params.require_positive_eps()
    ctx = RhsContext(y.basis, params, noise, R, oversample)
    dy, _ = _imex_increment(ctx, y.coeffs, dt, _active_increments(ctx, dW), c_imex)
    out = y.coeffs + dy
    _check_finite(out, 0, 0.0, y.coeffs)
    return SpectralField(y.basis, out)


def _active_increments(ctx: RhsContext, dW: np.ndarray) -> np.ndarray:
    """Restrict a full per-mode increment row (k = -K..K) to the active modes."""
    if ctx.noise is None or ctx.noise.n_modes == 0:
        return np.zeros(0)
    dW = np.asarray(dW, dtype=float)
    if dW.shape != (ctx.noise.n_modes,):
        raise InvalidArgumentError(
            f"expected {ctx.noise.n_modes} increments, got shape {dW.shape}"
        )
    return dW[ctx.noise.nu != 0.0]


def _check_finite(y: np.ndarray, step: int, t: float, last):
    if not np.all(np.isfinite(y)):
        raise BlowUpError(step, t, last_state=np.array(last, copy=True))


def _entropy_on_grid(v: np.ndarray, params: MobilityParams, dx_weight: float) -> float:
    if params.eps == 0.0 and np.min(v) <= 0.0:
        return math.inf
    return float(dx_weight * np.sum(g_eps(v, params)))


def simulate(
    u0: SpectralField,
    config: IntegratorConfig,
    params: MobilityParams,
    noise: NoiseModel | None,
    R: float = math.inf,
    seed: int = 0,
    trajectory_id: int = 0,
    path: WienerPath | None = None,
    oversample: int = 4,
    record_functionals: bool = True,
) -> Trajectory:
    """Integrate the full system from u0 and record states plus functionals.

    Deterministic given (config, seed, trajectory_id); a pre-built Wiener
    path overrides on-the-fly sampling (used by refinement studies that
    couple levels through a common path).  Non-finite states abort with a
    BlowUpError carrying the last finite snapshot.
    """
    params.require_positive_eps()
    basis = u0.basis
    ctx = RhsContext(basis, params, noise, R, oversample)
    n_steps = config.n_steps
    if noise is not None and noise.n_modes > 0:
        if path is None:
            path = sample_increments(noise, n_steps, config.dt, seed, trajectory_id)
        elif path.n_steps < n_steps:
            raise InvalidArgumentError(
                f"supplied path has {path.n_steps} steps, need {n_steps}"
            )
        increments = path.increments[:, ctx.noise.nu != 0.0] if noise.n_modes else None
    else:
        increments = None
    zero_dw = np.zeros(0)

    record_idx = list(range(0, n_steps + 1, config.record_every))
    if record_idx[-1] != n_steps:
        record_idx.append(n_steps)
    record_set = set(record_idx)

    y = u0.coeffs.copy()
    times, states = [], []
    func = {k: [] for k in ("mass", "energy", "entropy", "dissipation", "min_value")}
    h2_int = 0.0
    diss_int = 0.0
    violations = 0
    sqrt_L = np.sqrt(basis.L)
    lam2 = ctx.lam * ctx.lam
    scheme = config.scheme
    c = config.c_imex

    def record(t: float):
        times.append(t)
        states.append(y.copy())
        if record_functionals:
            v = ctx.values(y)
            d3 = ctx.d3_values(y)
            func["mass"].append(y[basis.N] / sqrt_L)
            func["energy"].append(0.5 * float(np.sum(ctx.lam * y * y)))
            func["entropy"].append(_entropy_on_grid(v, params, ctx.dx_weight))
            func["dissipation"].append(ctx.dx_weight * float(np.sum(fsq(v, params) * d3 * d3)))
            func["min_value"].append(float(np.min(v)))

    record(0.0)
    dt = config.dt
    for step in range(n_steps):
        dW = increments[step] if increments is not None else zero_dw
        if scheme == "euler_maruyama":
            dy, stats = _em_increment(ctx, y, dt, dW)
        elif scheme == "heun_stratonovich":
            dy, stats = _heun_increment(ctx, y, dt, dW)
        else:
            dy, stats = _imex_increment(ctx, y, dt, dW, c)
        if scheme != "imex":
            lam_top2 = lam2[-1]
            if dt * lam_top2 * stats["max_mobility"] > STABILITY_SAFETY:
                violations += 1
                if violations == 1:
                    warnings.warn(
                        f"explicit step dt={dt:g} exceeds the stability bound "
                        f"{STABILITY_SAFETY:g}/(lam_N^2 max F^2) at step {step}",
                        RuntimeWarning,
                        stacklevel=2,
                    )
        h2_int += dt * float(np.sum(lam2 * y * y))
        diss_int += dt * stats["dissipation"]
        y = y + dy
        _check_finite(y, step + 1, (step + 1) * dt, states[-1])
        if (step + 1) in record_set:
            record((step + 1) * dt)

    return Trajectory(
        basis=basis,
        times=np.asarray(times),
        coeffs=np.stack(states),
        functionals={k: np.asarray(v) for k, v in func.items()},
        path=path,
        record_every=config.record_every,
        h2_time_integral=h2_int,
        dissipation_time_integral=diss_int,
        stability_violations=violations,
        meta={"scheme": scheme, "dt": dt, "T": config.T, "seed": seed, "trajectory_id": trajectory_id},
    )
