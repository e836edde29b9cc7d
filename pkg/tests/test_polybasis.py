import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre as L

from colecole.polybasis import (IntervalBasis, _birkhoff_formula, _birkhoff_solve, birkhoff_matrix,
                                birkhoff_residual, cgl_values_to_coeffs, chebyshev_antideriv,
                                chebyshev_eval, legendre_eval, scaled_chebyshev)
from colecole.quadrature import cgl_points

X = np.linspace(-1, 1, 37)


@pytest.mark.parametrize("k", [0, 1, 2, 7, 30])
def test_recurrences_match_numpy(k):
    e = np.eye(k + 1)[k]
    np.testing.assert_allclose(legendre_eval(k, X), L.legval(X, e), atol=1e-13)
    np.testing.assert_allclose(chebyshev_eval(k, X), C.chebval(X, e), atol=1e-13)


def test_endpoint_values():
    assert legendre_eval(5, 1.0) == pytest.approx(1.0)
    assert chebyshev_eval(6, -1.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        chebyshev_eval(2, 1.5)
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.0)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 8])
def test_antiderivative(k):
    ref = C.chebval(X, C.chebint(np.eye(k + 1)[k], lbnd=-1))
    np.testing.assert_allclose(chebyshev_antideriv(k, X), ref, atol=1e-14)
    assert chebyshev_antideriv(k, -1.0) == pytest.approx(0.0, abs=1e-15)


def test_interval_basis():
    b = IntervalBasis(1.0, 3.0, 8)
    assert b.length == 2.0
    nodes = b.nodes()
    assert nodes[0] == 1.0 and nodes[-1] == 3.0
    assert scaled_chebyshev(b, 2, 2.0) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        b.to_reference(3.5)
    with pytest.raises(ValueError):
        IntervalBasis(2.0, 2.0, 4)


def test_values_to_coefficients_roundtrip():
    N = 12
    x = cgl_points(N)
    c = np.random.default_rng(1).normal(size=N + 1)
    np.testing.assert_allclose(cgl_values_to_coeffs(N) @ C.chebval(x, c), c, atol=1e-13)


@pytest.mark.parametrize("N", range(2, 65))
def test_birkhoff_exactness_invariant(N):
    assert birkhoff_residual(birkhoff_matrix(N)) <= 1e-11


@pytest.mark.parametrize("N", [4, 16, 48])
def test_closed_form_matches_direct_solve(N):
    np.testing.assert_allclose(_birkhoff_formula(N), _birkhoff_solve(N), atol=1e-13)


def test_birkhoff_small_cases():
    assert birkhoff_matrix(1)[0, 0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        birkhoff_matrix(0)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(2, 30), seed=st.integers(0, 10_000))
def test_birkhoff_integrates_random_polynomials(N, seed):
    c = np.random.default_rng(seed).normal(size=N + 1)
    x = cgl_points(N)
    q = C.chebval(x, c)
    dq = C.chebval(x[1:], C.chebder(c))
    np.testing.assert_allclose(q[1:] - q[0], birkhoff_matrix(N) @ dq, atol=1e-11 * (1 + np.abs(c).sum()))
