"""Legendre/Chebyshev evaluation, scaled interval bases and the Birkhoff
integration matrix used for well-conditioned first-order collocation."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import cgl_points


def _check_unit(x):
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1 + 1e-14):
        raise ValueError("argument outside [-1, 1]")
    return xa


def legendre_eval(k, x):
    """L_k(x) by the three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = _check_unit(x)
    p0, p1 = np.ones_like(x), x
    if k == 0:
        return p0 if x.ndim else float(p0)
    for n in range(1, k):
        p0, p1 = p1, ((2 * n + 1) * x * p1 - n * p0) / (n + 1)
    return p1 if x.ndim else float(p1)


def chebyshev_eval(k, x):
    """T_k(x) by the three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = _check_unit(x)
    t0, t1 = np.ones_like(x), x
    if k == 0:
        return t0 if x.ndim else float(t0)
    for _ in range(1, k):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1 if x.ndim else float(t1)


def chebyshev_antideriv(k, x):
    """int_{-1}^x T_k(y) dy."""
    x = _check_unit(x)
    if k == 0:
        out = 1.0 + x
    elif k == 1:
        out = (x**2 - 1.0) / 2.0
    else:
        out = (chebyshev_eval(k + 1, x) / (2 * (k + 1))
               - chebyshev_eval(k - 1, x) / (2 * (k - 1))
               - (-1) ** k / (k**2 - 1.0))
    return out


def chebyshev_vandermonde(x, n):
    """Matrix V[i, k] = T_k(x_i) for k = 0..n."""
    x = _check_unit(x)
    return np.polynomial.chebyshev.chebvander(x, n)


@dataclass(frozen=True)
class IntervalBasis:
    t_prev: float
    t_cur: float
    N: int

    def __post_init__(self):
        if not self.t_prev < self.t_cur:
            raise ValueError("interval must have positive length")
        if self.N < 1:
            raise ValueError("degree must be at least 1")

    @property
    def length(self):
        return self.t_cur - self.t_prev

    def to_reference(self, t):
        ta = np.asarray(t, dtype=float)
        tol = 1e-13 * max(1.0, abs(self.t_cur))
        if np.any(ta < self.t_prev - tol) or np.any(ta > self.t_cur + tol):
            raise ValueError("time outside the interval")
        x = (2 * ta - self.t_prev - self.t_cur) / self.length
        return np.clip(x, -1.0, 1.0)

    def nodes(self):
        x = cgl_points(self.N)
        return 0.5 * (self.t_prev + self.t_cur) + 0.5 * self.length * x


def scaled_chebyshev(basis, n, t):
    """T_n evaluated at the affine image of t in [-1, 1]."""
    return chebyshev_eval(n, basis.to_reference(t))


@lru_cache(maxsize=32)
def cgl_values_to_coeffs(N):
    """Matrix taking values at ascending CGL points to Chebyshev coefficients."""
    x = cgl_points(N)
    cbar = np.ones(N + 1)
    cbar[[0, N]] = 2.0
    V = chebyshev_vandermonde(x, N)  # V[j, k] = T_k(x_j)
    C = (2.0 / N) * V.T / cbar[None, :] / cbar[:, None]
    C.setflags(write=False)
    return C


def _birkhoff_formula(N):
    """B[i, j] = B_j(x_i), i, j = 1..N, from the Chebyshev expansion of the
    degree N-1 polynomial that is 1 at x_j and 0 at the other x_1..x_N."""
    x = cgl_points(N)
    k = np.arange(N)
    cbar_k = np.where(k == 0, 2.0, 1.0)
    TN = chebyshev_eval(N, x)
    B = np.empty((N, N))
    anti = np.stack([chebyshev_antideriv(kk, x[1:]) for kk in k], axis=1)  # (N, N)
    for j in range(1, N + 1):
        w_j = 2.0 / (N * (2.0 if j == N else 1.0))
        Tk = chebyshev_eval_all(N - 1, x[j])
        coef = w_j * (Tk - TN[j] * (-1.0) ** (N + k)) / cbar_k
        B[:, j - 1] = anti @ coef
    return B


def chebyshev_eval_all(n, x):
    """Vector (T_0(x), ..., T_n(x)) at a scalar x."""
    return np.polynomial.chebyshev.chebvander(np.array([x]), n)[0]


def _birkhoff_solve(N):
    """Direct construction: B_j(-1) = 0, B_j'(x_i) = delta_ij in the T_k basis."""
    x = cgl_points(N)
    # derivative of sum_k a_k antideriv(T_k) is sum_k a_k T_k, degree N-1
    D = chebyshev_vandermonde(x[1:], N - 1)
    coef = np.linalg.solve(D, np.eye(N))
    anti = np.stack([chebyshev_antideriv(kk, x[1:]) for kk in range(N)], axis=1)
    return anti @ coef


def birkhoff_residual(B):
    """Max violation of q(x_i) = q(-1) + sum_j B_ij q'(x_j) over T_0..T_N."""
    N = B.shape[0]
    x = cgl_points(N)
    worst = 0.0
    for n in range(N + 1):
        c = np.zeros(n + 1)
        c[n] = 1.0
        q = np.polynomial.chebyshev.chebval(x, c)
        dq = np.polynomial.chebyshev.chebval(x[1:], np.polynomial.chebyshev.chebder(c))
        worst = max(worst, np.max(np.abs(q[1:] - q[0] - B @ dq)))
    return worst


@lru_cache(maxsize=32)
def birkhoff_matrix(N, tol=1e-10):
    """N x N Birkhoff integration matrix on the ascending CGL points x_1..x_N.

    Row i gives q(x_i) - q(-1) as a combination of q'(x_1), ..., q'(x_N)
    for every q of degree <= N.
    """
    if N < 1:
        raise ValueError("Birkhoff matrix needs N >= 1")
    B = _birkhoff_formula(N)
    if birkhoff_residual(B) > tol:
        B = _birkhoff_solve(N)
    B.setflags(write=False)
    return B
