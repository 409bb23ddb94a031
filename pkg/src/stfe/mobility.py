"""Regularized mobility family and the scalar functions derived from it.

The square-root mobility is F(r) = (r^2 + eps^2)^(n/4); its derivatives and
the derivatives of F^2 and (F')^2 are analytic closed forms (no numerical
differentiation anywhere).  The entropy weights

    G(r) = int_r^inf int_{r'}^inf F(r'')^-2 dr'' dr'
         = int_r^inf (s - r) F(s)^-2 ds,
    H(r) = int_r^inf F(s)^-1 ds,

are evaluated by adaptive quadrature on [r, r_cut] plus the tail integral
mapped to [0, 1] by s -> r_cut/t, which is exact and inherits the quadrature
tolerance.  For eps = 0 (and for G at n = 3) closed forms are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, InvalidConfigError

__all__ = [
    "MobilityParams",
    "f_eps",
    "f_eps_d1",
    "f_eps_d2",
    "fsq",
    "fsq_d1",
    "fsq_d2",
    "fsq_d3",
    "fp_sq",
    "fp_sq_d1",
    "fp_sq_d2",
    "g0",
    "g_eps",
    "h_eps",
    "int_fpp_sq",
]

QUAD_RTOL = 1e-11
QUAD_ATOL = 1e-13


@dataclass(frozen=True)
class MobilityParams:
    """Mobility exponent n and regularization level eps >= 0.

    eps = 0 is allowed for pure function evaluation only; time integration
    requires eps > 0 (enforced where the dynamics are assembled).
    """

    n: float
    eps: float = 0.0

    def __post_init__(self):
        if not (self.n > 0):
            raise InvalidConfigError(f"mobility exponent must be positive, got n={self.n}")
        if not (self.eps >= 0):
            raise InvalidConfigError(f"regularization must be >= 0, got eps={self.eps}")

    def require_positive_eps(self):
        if self.eps <= 0:
            raise InvalidConfigError("eps > 0 is required for time integration")

    def require_entropy_exponent(self):
        if self.n <= 2:
            raise DomainError(f"entropy weights require n > 2, got n={self.n}")


def _eval_terms(r, n, eps, terms):
    """Evaluate sum_i c_i * r^m_i * (r^2+eps^2)^p_i with correct r=0 limits.

    Each function below is a sum of such terms.  For eps = 0 the value at
    r = 0 is the limit c_i when m_i + 2 p_i = 0, zero when positive, and a
    DomainError when any term diverges.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    w = r * r + eps * eps
    out = np.zeros_like(r)
    singular = eps == 0.0 and np.any(r == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        for c, m, p in terms:
            if c == 0.0:
                continue
            if singular:
                total = m + 2.0 * p
                if total < 0:
                    raise DomainError(
                        f"singular at r=0 for eps=0 (term exponent {total:g}, n={n:g})"
                    )
            term = c * np.power(w, p)
            if m:
                term = term * r**m
            out += term
    if singular:
        at0 = 0.0
        for c, m, p in terms:
            if m + 2.0 * p == 0.0:
                at0 += c
        out[r == 0.0] = at0
    return float(out[0]) if scalar else out


def f_eps(r, params: MobilityParams):
    """F(r) = (r^2 + eps^2)^(n/4)."""
    n = params.n
    return _eval_terms(r, n, params.eps, [(1.0, 0, n / 4)])


def f_eps_d1(r, params: MobilityParams):
    """F'(r) = (n/2) r (r^2+eps^2)^(n/4-1)."""
    n = params.n
    return _eval_terms(r, n, params.eps, [(n / 2, 1, n / 4 - 1)])


def f_eps_d2(r, params: MobilityParams):
    """F''(r) = (n/2)(r^2+eps^2)^(n/4-1) + n(n/4-1) r^2 (r^2+eps^2)^(n/4-2)."""
    n = params.n
    return _eval_terms(
        r, n, params.eps, [(n / 2, 0, n / 4 - 1), (n * (n / 4 - 1), 2, n / 4 - 2)]
    )


def fsq(r, params: MobilityParams):
    """F^2(r) = (r^2 + eps^2)^(n/2), the regularized mobility."""
    n = params.n
    return _eval_terms(r, n, params.eps, [(1.0, 0, n / 2)])


def fsq_d1(r, params: MobilityParams):
    """(F^2)'(r) = n r (r^2+eps^2)^(n/2-1)."""
    n = params.n
    return _eval_terms(r, n, params.eps, [(n, 1, n / 2 - 1)])


def fsq_d2(r, params: MobilityParams):
    """(F^2)''(r) = n (r^2+eps^2)^(n/2-1) + n(n-2) r^2 (r^2+eps^2)^(n/2-2)."""
    n = params.n
    return _eval_terms(
        r, n, params.eps, [(n, 0, n / 2 - 1), (n * (n - 2), 2, n / 2 - 2)]
    )


def fsq_d3(r, params: MobilityParams):
    """(F^2)'''(r) = 3n(n-2) r (.)^(n/2-2) + n(n-2)(n-4) r^3 (.)^(n/2-3)."""
    n = params.n
    return _eval_terms(
        r,
        n,
        params.eps,
        [(3 * n * (n - 2), 1, n / 2 - 2), (n * (n - 2) * (n - 4), 3, n / 2 - 3)],
    )


def fp_sq(r, params: MobilityParams):
    """(F')^2(r) = (n^2/4) r^2 (r^2+eps^2)^(n/2-2)."""
    n = params.n
    return _eval_terms(r, n, params.eps, [(n * n / 4, 2, n / 2 - 2)])


def fp_sq_d1(r, params: MobilityParams):
    """((F')^2)'(r) = (n^2/2) r (.)^(n/2-2) + (n^3/4 - n^2) r^3 (.)^(n/2-3)."""
    n = params.n
    return _eval_terms(
        r, n, params.eps, [(n * n / 2, 1, n / 2 - 2), (n**3 / 4 - n * n, 3, n / 2 - 3)]
    )


def fp_sq_d2(r, params: MobilityParams):
    """Second derivative of (F')^2, differentiating the closed form once more."""
    n = params.n
    a = n / 2 - 2
    A = n * n / 2
    B = n**3 / 4 - n * n
    return _eval_terms(
        r,
        n,
        params.eps,
        [(A, 0, a), (2 * a * A + 3 * B, 2, a - 1), (2 * (a - 1) * B, 4, a - 2)],
    )


def g0(r, n: float):
    """Unregularized entropy weight r^(2-n)/((2-n)(1-n)) for r > 0, +inf otherwise."""
    if n <= 2:
        raise DomainError(f"entropy weight requires n > 2, got n={n}")
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.full_like(r, np.inf)
    pos = r > 0
    out[pos] = r[pos] ** (2.0 - n) / ((2.0 - n) * (1.0 - n))
    return float(out[0]) if scalar else out


def _breakpoints(lo: float, hi: float, eps: float) -> list[float]:
    """Geometric breakpoints resolving the |s| ~ eps peak of F^-2 inside (lo, hi)."""
    if eps <= 0:
        return []
    pts = []
    s = eps
    while s < max(abs(lo), abs(hi)):
        for p in (-s, s):
            if lo < p < hi:
                pts.append(p)
        s *= 10.0
    if lo < 0.0 < hi:
        pts.append(0.0)
    return sorted(set(pts))


def _quad(fun, lo, hi, eps):
    val, _ = quad(
        fun,
        lo,
        hi,
        epsabs=QUAD_ATOL,
        epsrel=QUAD_RTOL,
        limit=400,
        points=_breakpoints(lo, hi, eps) or None,
    )
    return val


def _tail_scaled(rc: float, eps: float, expo: float) -> float:
    """int_rc^inf (s^2+eps^2)^(-expo) ds via s -> rc/t, exact on [0, 1]."""
    ratio2 = (eps / rc) ** 2
    val, _ = quad(
        lambda t: t ** (2.0 * expo - 2.0) * (1.0 + ratio2 * t * t) ** (-expo),
        0.0,
        1.0,
        epsabs=QUAD_ATOL,
        epsrel=QUAD_RTOL,
        limit=200,
    )
    return rc ** (1.0 - 2.0 * expo) * val


def _g_eps_scalar(r: float, n: float, eps: float) -> float:
    if eps == 0.0:
        return g0(r, n)
    if n == 3.0:
        # closed form: int_r^inf (s-r)(s^2+eps^2)^(-3/2) ds
        s = math.sqrt(r * r + eps * eps)
        return 1.0 / s - (r / eps**2) * (1.0 - r / s)
    rc = max(r, 10.0 * max(1.0, eps))
    finite = _quad(lambda s: (s - r) / (s * s + eps * eps) ** (n / 2.0), r, rc, eps)
    # tail: int_rc^inf (s - r)(s^2+eps^2)^(-n/2) ds; the s-part is elementary
    tail_s = (rc * rc + eps * eps) ** (1.0 - n / 2.0) / (n - 2.0)
    tail = tail_s - r * _tail_scaled(rc, eps, n / 2.0)
    return finite + tail


def _h_eps_scalar(r: float, n: float, eps: float) -> float:
    if eps == 0.0:
        if r <= 0:
            return np.inf
        return 2.0 * r ** (1.0 - n / 2.0) / (n - 2.0)
    rc = max(r, 10.0 * max(1.0, eps))
    finite = _quad(lambda s: (s * s + eps * eps) ** (-n / 4.0), r, rc, eps)
    return finite + _tail_scaled(rc, eps, n / 4.0)


def g_eps(r, params: MobilityParams):
    """Entropy weight G(r); decreasing in r, bounded by the eps = 0 closed form."""
    params.require_entropy_exponent()
    n, eps = params.n, params.eps
    if np.ndim(r) == 0:
        return _g_eps_scalar(float(r), n, eps)
    if eps == 0.0:
        return g0(r, n)
    if n == 3.0:
        r = np.asarray(r, dtype=float)
        s = np.sqrt(r * r + eps * eps)
        return 1.0 / s - (r / eps**2) * (1.0 - r / s)
    return np.array([_g_eps_scalar(float(ri), n, eps) for ri in np.asarray(r).ravel()]).reshape(
        np.shape(r)
    )


def h_eps(r, params: MobilityParams):
    """Companion weight H(r) = int_r^inf F(s)^-1 ds."""
    params.require_entropy_exponent()
    n, eps = params.n, params.eps
    if np.ndim(r) == 0:
        return _h_eps_scalar(float(r), n, eps)
    return np.array([_h_eps_scalar(float(ri), n, eps) for ri in np.asarray(r).ravel()]).reshape(
        np.shape(r)
    )


def int_fpp_sq(r: float, params: MobilityParams) -> float:
    """Signed integral int_1^r (F'')^2(s) ds by adaptive quadrature."""
    params.require_positive_eps()

    def integrand(s):
        return f_eps_d2(s, params) ** 2

    lo, hi = (1.0, float(r)) if r >= 1.0 else (float(r), 1.0)
    val = _quad(integrand, lo, hi, params.eps)
    return val if r >= 1.0 else -val
