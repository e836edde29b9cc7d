"""Mittag-Leffler functions and the kernel identities built on them.

The two-parameter Mittag-Leffler function

    E_{a,b}(z) = sum_k z**k / Gamma(a*k + b)

is evaluated by its Taylor series for ``z >= -1`` and by a Hankel contour
integral of its Laplace transform for ``z < -1``, where the series suffers
catastrophic cancellation.  All routines are vectorised over ``z`` (or ``t``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma, gamma

__all__ = [
    "KernelParams",
    "MittagLefflerError",
    "ml_eval",
    "kernel_e",
    "convolve_monomial",
    "ml_resolvent_drop",
]

SERIES_LIMIT = 1.0
# Parabolic Hankel contour s(u) = MU*(1 + i*u)**2, trapezoid step H, u in [0, M*H].
# Tuned against an extended-precision Talbot inversion: <5e-15 absolute on
# alpha in [0.05, 1], beta in [0.05, 11], z in [-1e4, -0.01].
_CONTOUR_M = 32
_CONTOUR_H = 0.1
_CONTOUR_MU = 3.5
_MAX_TERMS = 20000


class MittagLefflerError(ArithmeticError):
    """Raised when an evaluation cannot reach the requested tolerance."""


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the kernel ``t**(beta-1) * E_{alpha,beta}(-lam * t**alpha)``.

    ``beta`` defaults to ``alpha``, the memory kernel of the Cole-Cole model.
    """

    alpha: float
    lam: float
    beta: float | None = None

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", self.alpha)
        _check_index(self.alpha, self.beta)
        if not self.lam > 0:
            raise ValueError(f"kernel decay lam must be positive, got {self.lam}")

    def shifted(self, dbeta):
        return KernelParams(self.alpha, self.lam, self.beta + dbeta)


def _check_index(alpha, beta):
    if not (np.isfinite(alpha) and alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")


def _series(z, alpha, beta, tol):
    """Kahan-compensated Taylor sum; terms formed in log space."""
    total = np.zeros_like(z)
    comp = np.zeros_like(z)
    logabs = np.log(np.abs(z), where=z != 0, out=np.full_like(z, -np.inf))
    sign = np.where(z < 0, -1.0, 1.0)
    peaked = np.zeros(z.shape, dtype=bool)
    prev = np.full_like(z, np.inf)
    for k in range(_MAX_TERMS):
        if k == 0:
            term = np.full_like(z, rgamma(beta))
        else:
            term = sign**k * np.exp(k * logabs - gammaln(alpha * k + beta))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        mag = np.abs(term)
        peaked |= mag < prev
        prev = mag
        if k > 2 and np.all(peaked & (mag <= tol * np.maximum(np.abs(total), 1e-300))):
            return total
    raise MittagLefflerError(
        f"Taylor series for E_{{{alpha},{beta}}} did not converge in {_MAX_TERMS} terms"
    )


def _contour(z, alpha, beta):
    """Hankel-contour inversion of s**(alpha-beta)/(s**alpha - z) at t=1, z < 0."""
    u = np.arange(_CONTOUR_M + 1) * _CONTOUR_H
    w = np.full(u.size, 2.0)
    w[0] = 1.0
    s = _CONTOUR_MU * (1.0 + 1j * u) ** 2
    ds = _CONTOUR_MU * (1.0 + 1j * u) / np.pi
    num = np.exp(s) * s ** (alpha - beta) * ds
    g = num[None, :] / (s[None, :] ** alpha - z[:, None])
    return _CONTOUR_H * (g.real @ w)


def ml_eval(z, alpha, beta=1.0, tol=1e-16):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    Absolute accuracy is better than 1e-13 for ``z <= 1``; for larger positive
    ``z`` every series term is positive and the sum is relatively accurate.
    """
    _check_index(alpha, beta)
    za = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(za)):
        raise ValueError("Mittag-Leffler argument must be finite")
    flat = np.atleast_1d(za).ravel()
    out = np.empty_like(flat)
    near = flat >= -SERIES_LIMIT
    if np.any(near):
        out[near] = _series(flat[near], alpha, beta, tol)
    if np.any(~near):
        out[~near] = _contour(flat[~near], alpha, beta)
    if np.any(np.isnan(out)):
        raise MittagLefflerError("Mittag-Leffler evaluation produced NaN")
    return out.reshape(za.shape) if za.ndim else float(out[0])


def kernel_e(params, t):
    """Evaluate e_{alpha,beta}(-lam t^alpha) = t^(beta-1) E_{alpha,beta}(-lam t^alpha)."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise ValueError("kernel evaluated at negative time")
    if params.beta < 1 and np.any(ta == 0):
        raise ZeroDivisionError("kernel is singular at t = 0 when beta < 1")
    a, b = params.alpha, params.beta
    ml = ml_eval(-params.lam * ta**a, a, b)
    with np.errstate(divide="ignore"):
        out = np.where(ta > 0, ta ** (b - 1.0), 1.0 if b == 1 else 0.0) * ml
    return out if ta.ndim else float(out)


def convolve_monomial(params, r, t):
    """Exact value of int_0^t e_{alpha,beta}(-lam (t-s)^alpha) s^r ds, r > -1."""
    if not r > -1:
        raise ValueError(f"monomial exponent must exceed -1, got {r}")
    return gamma(r + 1.0) * kernel_e(params.shifted(r + 1.0), t)


def ml_resolvent_drop(params, t1, t2):
    """int_{t1}^{t2} e_{alpha,alpha}(-lam s^alpha) ds, from the antiderivative
    -(1/lam) E_{alpha,1}(-lam s^alpha)."""
    t1a, t2a = np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    if np.any(t1a > t2a) or np.any(t1a < 0):
        raise ValueError("need 0 <= t1 <= t2")
    a, lam = params.alpha, params.lam
    drop = (ml_eval(-lam * t1a**a, a, 1.0) - ml_eval(-lam * t2a**a, a, 1.0)) / lam
    return np.maximum(drop, 0.0)
