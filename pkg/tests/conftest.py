"""Shared extended-precision oracles."""

import mpmath as mp
import numpy as np
import pytest


def ml_reference(alpha, beta, z, dps=40):
    """E_{alpha,beta}(z) in extended precision, independent of the package.

    Direct series for |z| <= 3; for larger negative z the series cancels, so
    the Laplace transform s^(alpha-beta)/(s^alpha - z) is inverted at t = 1
    with mpmath's Talbot contour.
    """
    with mp.workdps(dps):
        a, b, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        if abs(z) <= 3:
            return float(mp.nsum(lambda k: zz**k / mp.gamma(a * k + b), [0, mp.inf]))
        return float(mp.invertlaplace(lambda s: s ** (a - b) / (s**a - zz), 1, method="talbot"))


def kernel_reference(alpha, beta, lam, t):
    return float(mp.mpf(t) ** (beta - 1)) * ml_reference(alpha, beta, -lam * t**alpha)


@pytest.fixture
def ml_ref():
    return ml_reference


def cheb_monomials(n, a, b):
    """Coefficients of T_n scaled to (a, b), in powers of (s - a)."""
    p = np.polynomial.chebyshev.cheb2poly(np.eye(n + 1)[n])
    lin = np.array([-1.0, 2.0 / (b - a)])
    out = np.zeros(1)
    for c in p[::-1]:
        out = np.polynomial.polynomial.polymul(out, lin)
        out[0] += c
    return out


def kernel_poly_integral(alpha, beta, lam, coeffs, a, b, t):
    """int_a^min(b,t) e_{alpha,beta}(t-s) sum_j c_j (s-a)^j ds in closed form.

    Each monomial convolves to Gamma(j+1) e_{alpha,beta+j+1}; for t > b the
    part over [b, t] is removed after re-expanding (s-a)^j about s = b.
    """
    from math import comb, factorial
    e = lambda shift, x: kernel_reference(alpha, beta + shift, lam, x)  # noqa: E731
    total = 0.0
    for j, cj in enumerate(coeffs):
        part = factorial(j) * e(j + 1, t - a)
        if t > b:
            part -= sum(comb(j, i) * (b - a) ** (j - i) * factorial(i) * e(i + 1, t - b) for i in range(j + 1))
        total += cj * part
    return total


ACCEPTANCE = {}


def record(number, ok, detail):
    """Store one acceptance line; returns ``ok`` so tests can assert on it."""
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
