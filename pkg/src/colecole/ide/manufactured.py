"""Manufactured solution with singular powers and a knot at t = 1:

    u(t) = t^(2+alpha) + t^(3+2alpha) + sign(1 - t) (t - 1)^5,

together with the source g(t) that makes it solve the forced IDE.  All memory
integrals are closed forms built from the monomial convolution identity.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gamma

from ..special_fn import KernelParams, kernel_e
from .ansatz import explicit_ansatz
from .march import IDEProblem


@dataclass(frozen=True)
class Manufactured:
    alpha: float
    c: float = 4.0
    d: float = 3.0
    lam: float = 1.5

    @property
    def powers(self):
        return ((2 + self.alpha, 1.0), (3 + 2 * self.alpha, 1.0))

    def _kernel(self, shift):
        return KernelParams(self.alpha, self.lam).shifted(shift)

    def u(self, t, order=0):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for mu, g in self.powers:
            fall = np.prod([mu - i for i in range(order)])
            out += g * fall * t ** (mu - order)
        sign = np.where(t <= 1, 1.0, -1.0)
        out += sign * np.prod([5 - i for i in range(order)]) * (t - 1) ** (5 - order)
        return out

    def memory(self, t):
        """int_0^t e_{a,a}(t-s) u(s) ds."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for mu, g in self.powers:
            out += g * gamma(mu + 1) * kernel_e(self._kernel(mu + 1), t)
        for k in range(6):
            out += comb(5, k) * (-1.0) ** (5 - k) * gamma(k + 1) * kernel_e(self._kernel(k + 1), t)
        late = t > 1
        if np.any(late):
            out[late] -= 2 * gamma(6) * kernel_e(self._kernel(6), t[late] - 1)
        return out

    def forcing(self, t):
        return self.u(t, 2) + self.c * self.u(t) - self.d * self.memory(t)

    def problem(self, T=2.0):
        return IDEProblem(self.c, self.d, self.lam, self.alpha, float(self.u(0.0)),
                          float(self.u(0.0, 1)), T, self.forcing)

    def ansatz(self, tau):
        """The singular terms below ``tau`` (tau = 2 gives none)."""
        return explicit_ansatz([(mu, g) for mu, g in self.powers if mu < tau], tau)
