"""Singular (Type-I) and nearly singular (Type-II) kernel integrals.

Type-I:  int_{a}^{t} e(t-s) g(s) ds  with the kernel singularity at s = t.
Type-II: int_{a}^{b} e(t-s) g(s) ds  with t > b, singular layer near s = b.

Both use the one-sided map clustering Gauss-Legendre nodes at the right end.
The distance t - s is formed directly from the map so that it keeps full
relative precision next to the singularity.
"""

import math

import numpy as np
from scipy.special import gamma

from ..polybasis import cgl_values_to_coeffs, chebyshev_vandermonde
from ..quadrature import DEFAULT_MAP_ORDER, DEFAULT_QUAD_N, _leggauss, cgl_points
from ..special_fn import kernel_e

TYPE2_SWITCH = 1.0  # in units of the interval length
LAYER_SMOOTHNESS = 2.4  # (1 + r) * beta reached by the default r = 3 at alpha = 0.6


def layer_order(kernel, r):
    """Map order actually used next to the kernel singularity.

    After the map the integrand behaves like g**((1 + r) beta - 1), so a fixed
    r leaves it singular for small beta.  ``r`` is raised until
    (1 + r) beta >= LAYER_SMOOTHNESS; it is never lowered.
    """
    if kernel.beta >= LAYER_SMOOTHNESS:
        return int(r)
    return max(int(r), math.ceil(LAYER_SMOOTHNESS / kernel.beta - 1 - 1e-12))


def _layer_rule(length, offset, r, n):
    """Mapped rule on [b - length, b] for targets t = b + offset.

    Returns (sigma, back, w): sigma = t - s, back = b - s, weights.
    Shapes broadcast over leading axes of ``length``/``offset``.
    """
    y, w = _leggauss(int(n))
    g = 0.5 * (1.0 - y)
    length = np.asarray(length, dtype=float)[..., None]
    offset = np.asarray(offset, dtype=float)[..., None]
    back = length * g ** (1 + r)
    weights = (r + 1) * length / 2.0 * w * g**r
    return offset + back, back, weights


def _check_monomial(degree, exponent):
    if (degree is None) == (exponent is None):
        raise ValueError("give exactly one of degree (Chebyshev) or exponent (monomial)")


def history_integral_typeI(kernel, t, interval, degree=None, exponent=None,
                           r=DEFAULT_MAP_ORDER, n=DEFAULT_QUAD_N):
    """int_a^t e(t-s) g(s) ds for t in (a, b].

    ``g`` is T_degree scaled to ``interval = (a, b)``, or (s - a)**exponent,
    which is integrated in closed form.
    """
    _check_monomial(degree, exponent)
    a, b = interval
    t = np.asarray(t, dtype=float)
    if np.any(t <= a) or np.any(t > b * (1 + 1e-14)):
        raise ValueError("Type-I target must lie in (a, b]")
    if exponent is not None:
        return gamma(exponent + 1.0) * kernel_e(kernel.shifted(exponent + 1.0), t - a)
    sigma, back, w = _layer_rule(t - a, 0.0, layer_order(kernel, r), n)
    x = np.clip(2 * (t[..., None] - back - a) / (b - a) - 1.0, -1, 1)
    Tn = np.cos(degree * np.arccos(x))
    out = np.sum(w * kernel_e(kernel, sigma) * Tn, axis=-1)
    return out if out.ndim else float(out)


def history_integral_typeII(kernel, t, interval, degree=None, exponent=None,
                            r=DEFAULT_MAP_ORDER, n=DEFAULT_QUAD_N, switch=TYPE2_SWITCH):
    """int_a^b e(t-s) g(s) ds for t > b; plain Gauss once t - b >= switch*(b - a)."""
    _check_monomial(degree, exponent)
    a, b = interval
    t = np.asarray(t, dtype=float)
    if np.any(t <= b):
        raise ValueError("Type-II target must lie beyond the interval")
    L = b - a
    far = (t - b) >= switch * L
    rr = np.where(far, 0, layer_order(kernel, r))
    out = np.empty(t.shape)
    for order in np.unique(rr):
        sel = rr == order
        sigma, back, w = _layer_rule(L, t[sel] - b, int(order), n)
        s = b - back
        if exponent is not None:
            g = np.abs(s - a) ** exponent
        else:
            g = np.cos(degree * np.arccos(np.clip(2 * (s - a) / L - 1, -1, 1)))
        out[sel] = np.sum(w * kernel_e(kernel, sigma) * g, axis=-1)
    return out if out.ndim else float(out)


def typeI_matrix(kernel, h, N, r=DEFAULT_MAP_ORDER, n=DEFAULT_QUAD_N):
    """W[i-1, m] = int_0^{tau_i} e(tau_i - s) l_m(s) ds on [0, h], i = 1..N.

    l_m is the Lagrange polynomial of the CGL nodes tau_m = h (x_m + 1)/2, so
    W @ values gives the current-interval memory at the collocation nodes.
    """
    tau = 0.5 * h * (cgl_points(N)[1:] + 1.0)
    sigma, back, w = _layer_rule(tau, 0.0, layer_order(kernel, r), n)
    x = np.clip(2 * (tau[:, None] - back) / h - 1.0, -1, 1)
    V = chebyshev_vandermonde(x.ravel(), N).reshape(N, -1, N + 1)
    J = np.einsum("iq,iqk->ik", w * kernel_e(kernel, sigma), V)
    return J @ cgl_values_to_coeffs(N)


def typeII_matrix(kernel, h, N, delta, r=DEFAULT_MAP_ORDER, n=DEFAULT_QUAD_N,
                  switch=TYPE2_SWITCH):
    """V[i-1, m] = int over the interval ``delta`` steps back of e(t_i - s) l_m(s) ds.

    Targets are the CGL nodes i = 1..N of the current interval [0, h]; the
    source interval is [-delta h, -(delta-1) h].
    """
    tau = 0.5 * h * (cgl_points(N)[1:] + 1.0)
    offset = tau + (delta - 1) * h
    order = layer_order(kernel, r) if (delta - 1) * h < switch * h else 0
    sigma, back, w = _layer_rule(h, offset, order, n)
    x = np.clip(1.0 - 2 * back / h, -1, 1)
    V = chebyshev_vandermonde(x.ravel(), N).reshape(x.shape + (N + 1,))
    V = np.broadcast_to(V, (N,) + V.shape[-2:])
    J = np.einsum("iq,iqk->ik", w * kernel_e(kernel, sigma), V)
    return J @ cgl_values_to_coeffs(N)


def monomial_tail_matrix(kernel, exponents, t1, targets, r=DEFAULT_MAP_ORDER, n=DEFAULT_QUAD_N,
                         switch=TYPE2_SWITCH):
    """A[e, i] = int_0^{t1} e(t_i - s) s**mu_e ds for targets t_i > t1.

    Near targets: closed-form convolution over [0, t_i] minus a Type-I
    quadrature over [t1, t_i], where s**mu is smooth.  Far targets
    (t_i - t1 >= switch * t1), where that difference would cancel badly:
    direct quadrature over [0, t1] with nodes clustered at s = 0.
    """
    targets = np.asarray(targets, dtype=float)
    flat = targets.ravel()
    far = flat - t1 >= switch * t1
    out = np.empty((len(exponents), flat.size))
    if np.any(~far):
        tn = flat[~far]
        sigma, back, w = _layer_rule(tn - t1, 0.0, layer_order(kernel, r), n)
        s = tn[:, None] - back
        ker = w * kernel_e(kernel, sigma)
        for e, mu in enumerate(exponents):
            full = gamma(mu + 1.0) * kernel_e(kernel.shifted(mu + 1.0), tn)
            out[e, ~far] = full - np.sum(ker * s**mu, axis=-1)
    if np.any(far):
        tf = flat[far]
        _, s, w = _layer_rule(t1, 0.0, r, n)  # s = t1 * g**(1+r), dense near 0
        ker = w * kernel_e(kernel, tf[:, None] - s)
        for e, mu in enumerate(exponents):
            out[e, far] = ker @ s**mu
    return out.reshape((len(exponents),) + targets.shape)
