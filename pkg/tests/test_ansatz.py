import numpy as np
import pytest
from scipy.special import gamma

from colecole.ide.ansatz import (AnsatzExpansion, build_ansatz, exponent_lattice, explicit_ansatz,
                                 lattice_coefficients)
from colecole.ide.march import IDEProblem
from colecole.ide.oracle import integral_form_oracle
from colecole.special_fn import KernelParams


def prob(**kw):
    base = dict(c=4.0, d=3.0, lam=1.5, alpha=0.6, u0=0.0, u1=2.0, T=1.0)
    base.update(kw)
    return IDEProblem(**base)


def test_zero_data_gives_empty_expansion():
    assert len(build_ansatz(prob(u0=0.0, u1=0.0))) == 0


def test_single_term_example():
    a = build_ansatz(prob(), tau=4.0)
    assert a.exponents.tolist() == pytest.approx([3.6])
    assert a.coeffs[0] == pytest.approx(6 / gamma(4.6), rel=1e-14)


def test_half_order_example():
    a = build_ansatz(prob(alpha=0.5, u0=1.0, u1=0.0, d=3.0), tau=3.0)
    assert a.exponents.tolist() == pytest.approx([2.5])
    assert a.coeffs[0] == pytest.approx(3.0 / gamma(3.5), rel=1e-14)


def test_tau_two_is_empty_and_low_tau_rejected():
    assert len(build_ansatz(prob(u0=1.0), tau=2.0)) == 0
    with pytest.raises(ValueError):
        build_ansatz(prob(), tau=1.5)


def test_exponents_are_non_integer_and_ascending():
    a = build_ansatz(prob(alpha=0.25, u0=1.0, u1=1.0), tau=6.0, keep_zero=True)
    assert np.all(np.diff(a.exponents) > 0)
    assert np.all(a.exponents > 2)
    assert np.all(np.abs(a.exponents - np.round(a.exponents)) > 1e-10)


def test_lattice_merges_coincident_points():
    lat = exponent_lattice(0.5, 5.0)
    assert np.all(np.diff(lat) > 1e-10)
    assert 3.5 in lat.tolist()


def test_four_families_below_four():
    # explicit low-order formulas of the four families for 1/alpha not an integer
    al, lam, c, d, u0, u1 = 0.7, 1.3, 2.0, 0.9, 0.8, -1.1
    a = build_ansatz(prob(alpha=al, lam=lam, c=c, d=d, u0=u0, u1=u1), tau=4.0)
    expect = {2 + al: d * u0 / gamma(al + 3),
              2 + 2 * al: -d * lam * u0 / gamma(2 * al + 3),
              3 + al: d * u1 / gamma(al + 4),
              2 + 3 * al: d * lam**2 * u0 / gamma(3 * al + 3)}
    for mu, g in expect.items():
        if mu < 4:
            n = int(np.argmin(np.abs(a.exponents - mu)))
            assert a.exponents[n] == pytest.approx(mu)
            assert a.coeffs[n] == pytest.approx(g, rel=1e-13)


@pytest.mark.parametrize("alpha,u0,u1", [(0.6, 0.0, 2.0), (0.5, 1.0, 0.5), (0.35, -0.7, 1.2)])
def test_formal_series_solves_the_equation(alpha, u0, u1):
    """Summing the lattice series far beyond tau reproduces the independent
    integral-form solution, so every coefficient (integer powers included)
    satisfies the equation."""
    p = prob(alpha=alpha, u0=u0, u1=u1, T=0.4)
    lat = exponent_lattice(alpha, 30.0)
    g = lattice_coefficients(lat, alpha, p.lam, p.c, p.d, u0, u1)
    gaps = []
    for M in (4096, 8192):
        t, u = integral_form_oracle(p, M)
        series = (g[None, :] * t[:, None] ** lat[None, :]).sum(axis=1)
        gaps.append(np.max(np.abs(series - u)))
    # the oracle is first order plus alpha; the gap must shrink with it
    assert gaps[1] < 1e-6
    assert gaps[1] < 0.75 * gaps[0] or gaps[1] < 1e-9


def test_expansion_derivatives_and_memory():
    a = explicit_ansatz([(2.6, 1.5), (3.2, -0.5)])
    t = np.array([0.3, 0.9])
    h = 1e-6
    np.testing.assert_allclose(a.derivative(t), (a.value(t + h) - a.value(t - h)) / (2 * h), rtol=1e-8)
    np.testing.assert_allclose(a.second_derivative(t), (a.derivative(t + h) - a.derivative(t - h)) / (2 * h),
                               rtol=1e-7)
    kp = KernelParams(0.6, 1.0)
    from colecole.special_fn import convolve_monomial
    exact = 1.5 * convolve_monomial(kp, 2.6, 0.9) - 0.5 * convolve_monomial(kp, 3.2, 0.9)
    assert a.memory(kp, np.array([0.9]))[0] == pytest.approx(exact)


def test_invalid_expansion_rejected():
    with pytest.raises(ValueError):
        AnsatzExpansion(np.array([3.0, 2.5]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        AnsatzExpansion(np.array([1.5]), np.array([1.0]))


def test_batched_coefficients():
    c = np.array([1.0, 4.0, 9.0])
    g = lattice_coefficients(exponent_lattice(0.6, 4.0), 0.6, 1.0, c, 0.5 * c, 1.0, 0.0)
    assert g.shape == (3, exponent_lattice(0.6, 4.0).size)
    for i in range(3):
        single = lattice_coefficients(exponent_lattice(0.6, 4.0), 0.6, 1.0, c[i], 0.5 * c[i], 1.0, 0.0)
        np.testing.assert_allclose(g[i], single)
