"""Shen-Legendre spectral Galerkin discretisation in space and its reduction
to independent modal integro-differential equations.

Basis on the reference interval: phi_k = (L_k - L_{k+2}) / sqrt(4k+6),
k = 0..N-2.  Stiffness is the identity and the mass matrix B is symmetric
pentadiagonal.  A physical interval [x_a, x_b] of length L is handled by an
affine map; the Laplacian then scales by s = (2/L)^2, which is folded into the
modal coefficients.  Galerkin coefficients are always stored with respect to
reference-interval inner products.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import eigh_tridiagonal

from .quadrature import gauss_legendre


@dataclass(frozen=True)
class ShenBasis:
    N: int
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"Shen basis needs N >= 2, got {self.N}")
        xa, xb = self.domain
        if not xa < xb:
            raise ValueError("domain must be an increasing interval")

    @property
    def size(self):
        return self.N - 1

    @property
    def scale(self):
        k = np.arange(self.size)
        return 1.0 / np.sqrt(4 * k + 6)

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    @property
    def laplace_scale(self):
        return (2.0 / self.length) ** 2

    def to_reference(self, x):
        x = np.asarray(x, dtype=float)
        xa, xb = self.domain
        tol = 1e-12 * max(1.0, abs(xa), abs(xb))
        if np.any(x < xa - tol) or np.any(x > xb + tol):
            raise ValueError("point outside the physical domain")
        return np.clip((2 * x - xa - xb) / self.length, -1.0, 1.0)

    def from_reference(self, xi):
        xa, xb = self.domain
        return 0.5 * (xa + xb) + 0.5 * self.length * np.asarray(xi, dtype=float)

    def eval_reference(self, xi, deriv=0):
        """Matrix Phi[p, k] = phi_k^(deriv)(xi_p)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty((xi.size, self.size))
        for k in range(self.size):
            c = np.zeros(k + 3)
            c[k], c[k + 2] = 1.0, -1.0
            if deriv:
                c = npleg.legder(c, deriv)
            out[:, k] = npleg.legval(xi, c) * self.scale[k]
        return out

    def eval(self, x):
        return self.eval_reference(self.to_reference(x))


def shen_mass_matrix(N):
    """(N-1) x (N-1) mass matrix (phi_k, phi_j) on [-1, 1], from Legendre norms."""
    if N < 2:
        raise ValueError(f"mass matrix needs N >= 2, got {N}")
    n = N - 1
    k = np.arange(n)
    norm = lambda m: 2.0 / (2 * m + 1)  # noqa: E731  (L_m, L_m)
    diag = (norm(k) + norm(k + 2)) / (4 * k + 6)
    off = -norm(k[:-2] + 2) / np.sqrt((4 * k[:-2] + 6) * (4 * k[:-2] + 14))
    B = np.diag(diag)
    if n > 2:
        B += np.diag(off, 2) + np.diag(off, -2)
    return B


def shen_stiffness_check(N, tol=1e-12):
    """Assemble (phi_k', phi_j') by Gauss quadrature; returns (passed, deviation)."""
    basis = ShenBasis(N)
    rule = gauss_legendre(N + 2)
    D = basis.eval_reference(rule.nodes, deriv=1)
    S = D.T @ (rule.weights[:, None] * D)
    dev = float(np.max(np.abs(S - np.eye(basis.size))))
    return dev <= tol, dev


@dataclass(frozen=True)
class ModalDecomposition:
    eigenvalues: np.ndarray
    eigvecs: np.ndarray
    dim: int = 1

    def orthogonality_error(self):
        E = self.eigvecs
        return float(np.max(np.abs(E.T @ E - np.eye(E.shape[1]))))


def sym_eigen(B, dim=1, tol=1e-11):
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending.

    A matrix with nonzeros only at |k-j| in {0, 2} splits into two
    tridiagonal blocks (even and odd indices), each solved on its own.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("sym_eigen needs a square matrix")
    if np.max(np.abs(B - B.T), initial=0.0) > tol * max(1.0, np.max(np.abs(B), initial=0.0)):
        raise ValueError("matrix is not symmetric")
    n = B.shape[0]
    i, j = np.indices(B.shape)
    if n > 2 and not np.any(B[(np.abs(i - j) % 2 == 1) | (np.abs(i - j) > 2)]):
        lam = np.empty(n)
        E = np.zeros((n, n))
        pos = 0
        for parity in (0, 1):
            idx = np.arange(parity, n, 2)
            if not idx.size:
                continue
            blk = B[np.ix_(idx, idx)]
            w, v = eigh_tridiagonal(np.diag(blk).copy(), np.diag(blk, 1).copy())
            lam[pos:pos + idx.size] = w
            E[idx, pos:pos + idx.size] = v
            pos += idx.size
        order = np.argsort(lam, kind="stable")
        lam, E = lam[order], E[:, order]
    else:
        lam, E = np.linalg.eigh(B)
    dec = ModalDecomposition(lam, E, dim)
    if np.any(lam <= 0):
        raise np.linalg.LinAlgError("mass matrix is not positive definite")
    if dec.orthogonality_error() > tol or np.max(np.abs(E * lam @ E.T - B)) > tol * max(1.0, lam.max()):
        raise np.linalg.LinAlgError("eigen-decomposition failed its invariants")
    return dec


def _panels(basis, breaks):
    """Reference-coordinate panel edges with the declared breakpoints inserted."""
    cuts = [-1.0, 1.0]
    for b in breaks:
        xi = float(basis.to_reference(b))
        if -1.0 < xi < 1.0:
            cuts.append(xi)
    return np.unique(cuts)


def _composite_rule(basis, breaks, n):
    edges = _panels(basis, breaks)
    rule = gauss_legendre(n)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    xi = (mid[:, None] + half[:, None] * rule.nodes).ravel()
    w = (half[:, None] * rule.weights).ravel()
    return xi, w


def _quad_points(basis):
    return basis.N + 32


def project_initial(u, basis, breaks=(), n=None):
    """Vector (u o map, phi_k) on the reference interval.

    ``u`` is a vectorised function of the physical coordinate; ``breaks``
    lists physical points where u may jump, which become panel edges of the
    composite Gauss rule.
    """
    xi, w = _composite_rule(basis, breaks, n or _quad_points(basis))
    vals = np.asarray(u(basis.from_reference(xi)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("initial data is not finite at a quadrature node")
    return basis.eval_reference(xi).T @ (w * vals)


def project_initial_2d(u, basis_x, basis_y, breaks_x=(), breaks_y=(), n=None):
    """Matrix F[k, l] = (u o map, phi_k(xi) phi_l(eta)) on the reference square."""
    xi, wx = _composite_rule(basis_x, breaks_x, n or _quad_points(basis_x))
    eta, wy = _composite_rule(basis_y, breaks_y, n or _quad_points(basis_y))
    X, Y = np.meshgrid(basis_x.from_reference(xi), basis_y.from_reference(eta), indexing="ij")
    vals = np.asarray(u(X, Y), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("initial data is not finite at a quadrature node")
    Px = basis_x.eval_reference(xi) * wx[:, None]
    Py = basis_y.eval_reference(eta) * wy[:, None]
    return Px.T @ vals @ Py


@dataclass(frozen=True)
class ModalSet:
    """Independent modal problems v'' + c v = d int e v, stored as arrays.

    ``weight`` is the factor turning a modal quadratic form into its share of
    the physical L^2 / energy norm (lambda_i in 1D, lambda_i lambda_j in 2D).
    """

    c: np.ndarray
    d: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    weight: np.ndarray
    lam: float
    alpha: float
    T: float

    @property
    def shape(self):
        return self.c.shape

    def problems(self):
        from .ide.march import IDEProblem
        return [IDEProblem(c, d, self.lam, self.alpha, u0, u1, self.T)
                for c, d, u0, u1 in zip(self.c.ravel(), self.d.ravel(), self.u0.ravel(), self.u1.ravel())]


def decouple_1d(a, b, lam, alpha, f0, f1, decomp, T, laplace_scale=1.0):
    """Modes of B u'' + a s u = b s int e u with B u(0) = f0, B u'(0) = f1."""
    lam_i = decomp.eigenvalues
    f0, f1 = np.asarray(f0, dtype=float), np.asarray(f1, dtype=float)
    if f0.shape != lam_i.shape or f1.shape != lam_i.shape:
        raise ValueError("projection length does not match the decomposition")
    E = decomp.eigvecs
    return ModalSet(a * laplace_scale / lam_i, b * laplace_scale / lam_i,
                    (E.T @ f0) / lam_i, (E.T @ f1) / lam_i, lam_i.copy(), lam, alpha, T)


def decouple_2d(a, b, lam, alpha, F0, F1, decomp, T, laplace_scale=(1.0, 1.0)):
    """Modes of the tensor system; mode (i, j) pairs x-eigenvalue i with y-eigenvalue j."""
    lam_i = decomp.eigenvalues
    n = lam_i.size
    F0, F1 = np.asarray(F0, dtype=float), np.asarray(F1, dtype=float)
    if F0.shape != (n, n) or F1.shape != (n, n):
        raise ValueError("coefficient matrices do not match the decomposition")
    sx, sy = laplace_scale
    E = decomp.eigvecs
    ratio = sx / lam_i[:, None] + sy / lam_i[None, :]
    prod = np.outer(lam_i, lam_i)
    return ModalSet(a * ratio, b * ratio, E.T @ F0 @ E / prod, E.T @ F1 @ E / prod,
                    prod, lam, alpha, T)


def modal_to_galerkin(v, decomp):
    """u_hat = E v (1D, last axis) or E W E' (2D, last two axes)."""
    E = decomp.eigvecs
    v = np.asarray(v, dtype=float)
    if decomp.dim == 1:
        return v @ E.T
    return E @ v @ E.T


def reconstruct(coeffs, basis, points):
    """Field values of a Galerkin expansion.

    1D: ``points`` is an array of x.  2D: ``points`` is (x, y) grid vectors
    and ``basis`` a pair; returns values on the tensor grid.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if isinstance(basis, tuple):
        bx, by = basis
        x, y = points
        if coeffs.shape != (bx.size, by.size):
            raise ValueError("2D coefficient matrix has the wrong shape")
        return bx.eval(x) @ coeffs @ by.eval(y).T
    if coeffs.shape[-1] != basis.size:
        raise ValueError("coefficient vector has the wrong length")
    return coeffs @ basis.eval(points).T
