"""Leading singular terms t**(i + j*alpha) of the prototype IDE solution.

Substituting u(t) = sum_mu g_mu t**mu into

    u'' + c u = d int_0^t e_{alpha,alpha}(-lam (t-s)^alpha) u(s) ds

and using the monomial convolution identity gives, for every exponent mu >= 2
on the lattice {i + j*alpha},

    mu (mu-1) g_mu = -c g_{mu-2}
                     + d sum_{mu' + (k+1) alpha = mu-2} g_mu' Gamma(mu'+1) (-lam)^k
                                                    / Gamma(mu' + (k+1) alpha + 1)

with g_0 = u0, g_1 = u1 and no non-integer powers below 2.  Below mu = 4 this
reproduces the four coefficient families used for enrichment; above it the
same recursion keeps going, so any extraction threshold tau is admissible.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ..special_fn import convolve_monomial

MERGE_TOL = 1e-10


def _is_integer(mu):
    return abs(mu - round(mu)) < MERGE_TOL


def exponent_lattice(alpha, tau):
    """Sorted exponents i + j*alpha < tau (i, j >= 0), near-duplicates merged."""
    raw = []
    for i in range(int(np.ceil(tau)) + 1):
        j = 0
        while i + j * alpha < tau - MERGE_TOL:
            raw.append(i + j * alpha)
            j += 1
    raw.sort()
    merged = []
    for mu in raw:
        if merged and abs(mu - merged[-1]) < MERGE_TOL:
            continue
        merged.append(float(round(mu)) if _is_integer(mu) else mu)
    return np.array(merged)


def _find(lattice, mu):
    k = np.searchsorted(lattice, mu - MERGE_TOL)
    if k < lattice.size and abs(lattice[k] - mu) < MERGE_TOL:
        return int(k)
    return None


def lattice_coefficients(lattice, alpha, lam, c, d, u0, u1):
    """Formal-series coefficients on ``lattice``; c, d, u0, u1 may be arrays
    (broadcast together), giving an array of shape (..., len(lattice))."""
    c, d, u0, u1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (c, d, u0, u1)))
    g = np.zeros(c.shape + (lattice.size,))
    for n, mu in enumerate(lattice):
        if mu < 2 - MERGE_TOL:
            if abs(mu) < MERGE_TOL:
                g[..., n] = u0
            elif abs(mu - 1) < MERGE_TOL:
                g[..., n] = u1
            continue
        acc = np.zeros(c.shape)
        m2 = _find(lattice, mu - 2)
        if m2 is not None:
            acc -= c * g[..., m2]
        for m, mup in enumerate(lattice[:n]):
            kk = (mu - 2 - mup) / alpha - 1
            if kk < -MERGE_TOL or abs(kk - round(kk)) > 1e-8:
                continue
            kk = int(round(kk))
            w = (-lam) ** kk * np.exp(gammaln(mup + 1) - gammaln(mu - 1))
            acc += d * w * g[..., m]
        g[..., n] = acc / (mu * (mu - 1))
    return g


@dataclass(frozen=True)
class AnsatzExpansion:
    """Singular part u_*(t) = sum coeffs[n] * t**exponents[n].

    ``coeffs`` may carry leading batch axes (one row per modal problem).
    """

    exponents: np.ndarray
    coeffs: np.ndarray
    tau: float = 2.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        e = np.asarray(self.exponents, dtype=float)
        if e.size and (np.any(np.diff(e) <= 0) or np.any(e < 2)):
            raise ValueError("ansatz exponents must be ascending and >= 2")
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def __len__(self):
        return self.exponents.size

    @property
    def terms(self):
        return list(zip(self.exponents.tolist(), np.atleast_1d(self.coeffs).tolist()))

    def _powers(self, t, shift, factor):
        t = np.asarray(t, dtype=float)
        if not len(self):
            return np.zeros(self.coeffs.shape[:-1] + t.shape)
        mu = self.exponents
        tt = t[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            basis = np.where(tt > 0, np.abs(tt) ** (mu - shift), 0.0) * factor
        return np.einsum("...n,tn->...t", self.coeffs, basis.reshape(-1, mu.size)).reshape(
            self.coeffs.shape[:-1] + t.shape)

    def value(self, t):
        return self._powers(t, 0, 1.0)

    def derivative(self, t):
        mu = self.exponents
        return self._powers(t, 1, mu)

    def second_derivative(self, t):
        mu = self.exponents
        return self._powers(t, 2, mu * (mu - 1))

    def memory(self, kernel, t):
        """int_0^t e(t-s) u_*(s) ds, exactly."""
        t = np.asarray(t, dtype=float)
        if not len(self):
            return np.zeros(self.coeffs.shape[:-1] + t.shape)
        cols = np.stack([convolve_monomial(kernel, mu, t.ravel()) for mu in self.exponents], axis=-1)
        return np.einsum("...n,tn->...t", self.coeffs, cols).reshape(self.coeffs.shape[:-1] + t.shape)


def build_ansatz(prob, tau=4.0, keep_zero=False):
    """Extract the non-integer powers 2 < mu < tau of the solution of ``prob``.

    ``prob`` needs attributes c, d, lam, alpha, u0, u1 (arrays allowed, in
    which case every row shares the exponent lattice and ``keep_zero`` is
    implied).
    """
    if tau < 2:
        raise ValueError(f"extraction threshold must be >= 2, got {tau}")
    lattice = exponent_lattice(prob.alpha, tau)
    g = lattice_coefficients(lattice, prob.alpha, prob.lam, prob.c, prob.d, prob.u0, prob.u1)
    keep = np.array([mu > 2 + MERGE_TOL and not _is_integer(mu) for mu in lattice], dtype=bool)
    if g.ndim == 1 and not keep_zero:
        keep &= g != 0
    return AnsatzExpansion(lattice[keep], g[..., keep], tau)


def explicit_ansatz(terms, tau=None):
    """Ansatz from given (exponent, coefficient) pairs, e.g. a manufactured solution."""
    terms = sorted(terms)
    mus = [m for m, _ in terms]
    return AnsatzExpansion(np.array(mus), np.array([g for _, g in terms]),
                           tau if tau is not None else (max(mus) + 1 if mus else 2.0))

