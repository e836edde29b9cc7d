"""Reference solver built on the second-kind Volterra form of the IDE.

With z = u'' the problem becomes

    z(t) = int_0^t K(t-s) z(s) ds + f(t),   K(s) = d e_{a,a+2}(s) - c s,
    f(t) = d u0 e_{a,a+1}(t) + d u1 e_{a,a+2}(t) - c u1 t - c u0 + g(t),

whose kernel is continuous.  z is approximated by a piecewise-linear function
on a uniform mesh and each panel integral of K against the hat functions is
evaluated exactly through the antiderivatives of K.  Finally
u(t) = u0 + u1 t + int_0^t (t-s) z(s) ds, integrated exactly for linear z.
"""

import numpy as np

from ..special_fn import KernelParams, kernel_e


def _panel_weights(K1, K2, H, m):
    """Weights (far, near) of the two panel endpoints at distances (m+1)H, mH."""
    a, b = m * H, (m + 1) * H
    K1a, K1b, K2a, K2b = K1(a), K1(b), K2(a), K2(b)
    far = (H * K1b - K2b + K2a) / H
    near = (K2b - K2a - H * K1a) / H
    return far, near


def _convolve_linear(far, near, z, n):
    """int_0^{t_n} K(t_n - s) z_lin(s) ds given values z_0..z_n."""
    j = np.arange(n)
    return far[n - 1 - j] @ z[:n] + near[n - 1 - j] @ z[1:n + 1]


def integral_form_oracle(prob, M=8192):
    """Values of u on the uniform mesh t_n = n T / M.  Returns (t, u)."""
    if M < 16:
        raise ValueError("oracle needs at least 16 panels")
    c, d, u0, u1, T = prob.c, prob.d, prob.u0, prob.u1, prob.T
    base = KernelParams(prob.alpha, prob.lam)
    H = T / M
    t = np.linspace(0.0, T, M + 1)

    def e(shift, s):
        return kernel_e(base.shifted(shift), np.asarray(s, dtype=float))

    K1 = lambda s: d * e(3.0, s) - c * s**2 / 2  # noqa: E731
    K2 = lambda s: d * e(4.0, s) - c * s**3 / 6  # noqa: E731
    m = np.arange(M)
    far, near = _panel_weights(K1, K2, H, m)

    f = d * u0 * e(1.0, t) + d * u1 * e(2.0, t) - c * u1 * t - c * u0
    if prob.forcing is not None:
        f = f + np.asarray(prob.forcing(t), dtype=float)

    z = np.zeros(M + 1)
    z[0] = f[0]
    diag = 1.0 - near[0]
    for n in range(1, M + 1):
        j = np.arange(n)
        acc = far[n - 1 - j] @ z[:n] + near[n - 1 - j[:-1]] @ z[1:n]
        z[n] = (f[n] + acc) / diag

    # kernel (t - s) for the double integral: antiderivatives s^2/2, s^3/6
    lfar, lnear = _panel_weights(lambda s: s**2 / 2, lambda s: s**3 / 6, H, m)
    u = np.empty(M + 1)
    u[0] = u0
    for n in range(1, M + 1):
        u[n] = u0 + u1 * t[n] + _convolve_linear(lfar, lnear, z, n)
    return t, u


def oracle_at(prob, times, M=8192):
    """Oracle values at ``times``; these should be mesh points for full accuracy."""
    t, u = integral_form_oracle(prob, M)
    return np.interp(times, t, u)
