"""Gauss-Legendre rules, Chebyshev-Gauss-Lobatto points and the one-sided
singular map that clusters quadrature nodes at a boundary layer."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_MAP_ORDER = 3
DEFAULT_QUAD_N = 64


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [-1, 1] (exact to degree 2n-1)."""
    if n < 1:
        raise ValueError(f"need at least one Gauss point, got {n}")
    return QuadratureRule(*_leggauss(int(n)))


def cgl_points(n):
    """Ascending Chebyshev-Gauss-Lobatto points -cos(pi j/n), j = 0..n."""
    if n < 1:
        raise ValueError(f"need n >= 1 for CGL points, got {n}")
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    # exact symmetry/zero at the centre
    x = 0.5 * (x - x[::-1])
    return x


@dataclass(frozen=True)
class SingularMap:
    """t = t_r + (t_l - t_r) ((1 - y)/2)**(1 + r): clusters nodes at t_r."""

    t_l: float
    t_r: float
    r: int = DEFAULT_MAP_ORDER

    def __post_init__(self):
        if not self.t_l < self.t_r:
            raise ValueError(f"need t_l < t_r, got ({self.t_l}, {self.t_r})")
        if self.r < 0:
            raise ValueError(f"map order must be non-negative, got {self.r}")

    def __call__(self, y):
        return map_point(self, y)

    def rule(self, n=DEFAULT_QUAD_N):
        """Mapped nodes in (t_l, t_r) and weights including the Jacobian."""
        y, w = _leggauss(int(n))
        g = 0.5 * (1.0 - y)
        t = self.t_r + (self.t_l - self.t_r) * g ** (1 + self.r)
        c_r = (self.r + 1) * (self.t_r - self.t_l) / 2.0
        return t, c_r * w * g**self.r

    def distances(self, n=DEFAULT_QUAD_N):
        """t_r - t at the mapped nodes, formed without cancellation, and the weights.

        Near the clustered end the nodes t round to t_r in floating point while
        the distances stay accurate; singular integrands should use these.
        """
        y, w = _leggauss(int(n))
        g = 0.5 * (1.0 - y)
        c_r = (self.r + 1) * (self.t_r - self.t_l) / 2.0
        return (self.t_r - self.t_l) * g ** (1 + self.r), c_r * w * g**self.r


def map_point(m, y):
    ya = np.asarray(y, dtype=float)
    if np.any(np.abs(ya) > 1):
        raise ValueError("map_point needs y in [-1, 1]")
    return m.t_r + (m.t_l - m.t_r) * (0.5 * (1.0 - ya)) ** (1 + m.r)


def mapped_integrate(f, m, n=DEFAULT_QUAD_N):
    """Integrate f over (t_l, t_r) with the n-point mapped Gauss-Legendre rule.

    ``f`` is called once on the array of mapped nodes.
    """
    t, w = m.rule(n)
    vals = np.asarray(f(t), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand is not finite at a mapped node")
    return float(np.dot(w, vals))
