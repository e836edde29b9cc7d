"""Enriched multistep Chebyshev collocation for

    p' + c q = d int_0^t e_{alpha,alpha}(-lam (t-s)^alpha) q(s) ds + g(t),   q' = p,

with q(0) = u0, p(0) = u1.  On each of K equal intervals p and q are degree-N
polynomials collocated at the N CGL nodes right of the left knot.  The
unknowns are the derivative values at those nodes; node values follow from the
Birkhoff matrix, so the linear system is a bounded perturbation of the
identity.  On the first interval the leading singular powers of the solution
(an AnsatzExpansion) are carried exactly and only the remainder is polynomial.

Problems sharing (alpha, lam, mesh) are solved together: kernel tables depend
only on those, so a batch of modal problems costs one table build.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..polybasis import birkhoff_matrix, cgl_values_to_coeffs
from ..quadrature import cgl_points
from ..special_fn import KernelParams
from .ansatz import AnsatzExpansion, build_ansatz
from .history import (TYPE2_SWITCH, history_integral_typeI, history_integral_typeII,
                      monomial_tail_matrix, typeI_matrix, typeII_matrix)

log = logging.getLogger(__name__)

DEFAULT_TAU = 4.0
SOLVER_MAP_ORDER = 3
SOLVER_QUAD_N = 256


@dataclass(frozen=True)
class IDEProblem:
    c: float
    d: float
    lam: float
    alpha: float
    u0: float
    u1: float
    T: float
    forcing: object = None  # callable g(t), vectorised

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.d < 0:
            raise ValueError(f"memory coefficient d must be non-negative, got {self.d}")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive, got {self.T}")

    @property
    def kernel(self):
        return KernelParams(self.alpha, self.lam)

    @property
    def damping_margin(self):
        return self.c - self.d / self.lam


@dataclass(frozen=True)
class TimeMesh:
    T: float
    K: int
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("time mesh needs T > 0")
        if self.K < 1 or self.N < 1:
            raise ValueError("time mesh needs K >= 1 and N >= 1")

    @property
    def h(self):
        return self.T / self.K

    @property
    def knots(self):
        return np.linspace(0.0, self.T, self.K + 1)

    def nodes(self, k=None):
        """CGL nodes t_j^k; all intervals as a (K, N+1) array when k is None."""
        x = cgl_points(self.N)
        knots = self.knots
        t = knots[:-1, None] + 0.5 * self.h * (x + 1.0)
        t[:, -1] = knots[1:]
        return t if k is None else t[k]


@dataclass(frozen=True)
class KernelTables:
    W: np.ndarray        # (N, N+1) current-interval memory weights
    V: tuple             # V[delta-1] (N, N+1) for the interval delta steps back
    B: np.ndarray        # (N, N) Birkhoff matrix on [-1, 1]


@lru_cache(maxsize=16)
def kernel_tables(alpha, lam, h, N, K, r=SOLVER_MAP_ORDER, nq=SOLVER_QUAD_N, switch=TYPE2_SWITCH):
    kernel = KernelParams(alpha, lam)
    W = typeI_matrix(kernel, h, N, r=r, n=nq)
    V = tuple(typeII_matrix(kernel, h, N, delta, r=r, n=nq, switch=switch) for delta in range(1, K))
    return KernelTables(W, V, birkhoff_matrix(N))


@dataclass
class PiecewiseSolution:
    """Node values of the polynomial parts on every interval.

    Arrays have shape (M, K, N+1) for M simultaneously solved problems.  On
    interval 0 ``qhat``/``phat`` exclude the ansatz; ``memory`` holds
    int_0^t e(t-s) q(s) ds at every node.
    """

    mesh: TimeMesh
    kernel: KernelParams
    qhat: np.ndarray
    phat: np.ndarray
    memory: np.ndarray
    ansatz: AnsatzExpansion
    cond: float = float("nan")
    quad: tuple = (SOLVER_MAP_ORDER, SOLVER_QUAD_N, TYPE2_SWITCH)

    @property
    def batch(self):
        return self.qhat.shape[0]

    def node_times(self):
        return self.mesh.nodes()

    def q_nodes(self):
        """Total q at all nodes, (M, K, N+1)."""
        q = self.qhat.copy()
        q[:, 0, :] += self._ansatz_rows(self.ansatz.value, self.mesh.nodes(0))
        return q

    def p_nodes(self):
        p = self.phat.copy()
        p[:, 0, :] += self._ansatz_rows(self.ansatz.derivative, self.mesh.nodes(0))
        return p

    def _ansatz_rows(self, fn, t):
        v = fn(t)
        return np.broadcast_to(v, (self.batch,) + np.shape(t))

    def _evaluate(self, vals, fn, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0) or np.any(t > self.mesh.T * (1 + 1e-12)):
            raise ValueError("evaluation time outside [0, T]")
        k = np.clip(np.searchsorted(self.mesh.knots, t, side="right") - 1, 0, self.mesh.K - 1)
        x = np.clip(2 * (t - self.mesh.knots[k]) / self.mesh.h - 1.0, -1, 1)
        coef = np.einsum("kn,mjn->mjk", cgl_values_to_coeffs(self.mesh.N), vals)  # (M, K, N+1)
        Tx = np.polynomial.chebyshev.chebvander(x, self.mesh.N)  # (nt, N+1)
        out = np.einsum("mtk,tk->mt", coef[:, k, :], Tx)
        first = k == 0
        if np.any(first):
            out[:, first] += self._ansatz_rows(fn, t[first])
        return out

    def q(self, t):
        return self._evaluate(self.qhat, self.ansatz.value, t)

    def memory_at(self, t):
        """int_0^t e(t-s) q(s) ds at arbitrary times, shape (M, nt).

        Node times can use the stored ``memory`` array instead; this path
        rebuilds the integral from the interval polynomials and the ansatz.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < 0) or np.any(t > self.mesh.T * (1 + 1e-12)):
            raise ValueError("evaluation time outside [0, T]")
        r, nq, switch = self.quad
        knots, K = self.mesh.knots, self.mesh.K
        coef = np.einsum("kn,mjn->mjk", cgl_values_to_coeffs(self.mesh.N), self.qhat)
        k_of = np.clip(np.searchsorted(knots, t, side="left") - 1, 0, K - 1)
        out = np.zeros((self.batch, t.size))
        for k in np.unique(k_of):
            sel = (k_of == k) & (t > 0)
            if not np.any(sel):
                continue
            tt = t[sel]
            J = np.array([history_integral_typeI(self.kernel, tt, (knots[k], knots[k + 1]), degree=n,
                                                 r=r, n=nq) for n in range(self.mesh.N + 1)])
            acc = coef[:, k, :] @ J.reshape(self.mesh.N + 1, -1)
            for l in range(k):
                J = np.array([history_integral_typeII(self.kernel, tt, (knots[l], knots[l + 1]), degree=n,
                                                      r=r, n=nq, switch=switch)
                              for n in range(self.mesh.N + 1)])
                acc += coef[:, l, :] @ J.reshape(self.mesh.N + 1, -1)
            if len(self.ansatz):
                if k == 0:
                    acc += self.ansatz.memory(self.kernel, tt)
                else:
                    acc += self.ansatz.coeffs @ monomial_tail_matrix(
                        self.kernel, self.ansatz.exponents, knots[1], tt, r=r, n=nq, switch=switch)
            out[:, sel] = acc
        return out

    def p(self, t):
        return self._evaluate(self.phat, self.ansatz.derivative, t)

    def dense_times(self, per_interval=64):
        x = np.linspace(-1, 1, per_interval + 1)[:-1]
        t = (self.mesh.knots[:-1, None] + 0.5 * self.mesh.h * (x + 1)).ravel()
        return np.append(t, self.mesh.T)

    def mode(self, i):
        """Single-problem view of batch member ``i``."""
        coeffs = self.ansatz.coeffs
        a = AnsatzExpansion(self.ansatz.exponents, coeffs[i:i + 1] if coeffs.ndim > 1 else coeffs[None],
                            self.ansatz.tau)
        return PiecewiseSolution(self.mesh, self.kernel, self.qhat[i:i + 1], self.phat[i:i + 1],
                                 self.memory[i:i + 1], a, self.cond, self.quad)


def _as_batch(x, M):
    return np.broadcast_to(np.asarray(x, dtype=float), (M,)).copy()


def march_batch(c, d, u0, u1, alpha, lam, mesh, tau=DEFAULT_TAU, ansatz=None, forcing=None,
                r=SOLVER_MAP_ORDER, nq=SOLVER_QUAD_N, switch=TYPE2_SWITCH):
    """Solve M problems sharing (alpha, lam, mesh); c, d, u0, u1 broadcast to (M,).

    ``ansatz`` overrides the automatically extracted singular part (its
    ``coeffs`` must be (M, n) or (n,)).  ``forcing(t)`` returns shape (M, nt)
    or (nt,).
    """
    M = max(np.size(v) for v in (c, d, u0, u1))
    c, d, u0, u1 = (_as_batch(v, M) for v in (c, d, u0, u1))
    if not (0 < alpha <= 1 and lam > 0) or np.any(d < 0):
        raise ValueError("need alpha in (0, 1], lam > 0 and d >= 0")
    N, K, h = mesh.N, mesh.K, mesh.h
    kernel = KernelParams(alpha, lam)

    if ansatz is None:
        ansatz = build_ansatz(_Batch(c, d, lam, alpha, u0, u1), tau, keep_zero=True)
    coeffs = ansatz.coeffs if ansatz.coeffs.ndim > 1 else np.broadcast_to(ansatz.coeffs, (M, len(ansatz)))
    ansatz = AnsatzExpansion(ansatz.exponents, np.array(coeffs), ansatz.tau)

    tables = kernel_tables(float(alpha), float(lam), float(h), N, K, r, nq, switch)
    B, W = tables.B, tables.W
    half = 0.5 * h
    I = np.eye(N)
    upper = half * (c[:, None, None] * I - d[:, None, None] * W[None, :, 1:]) @ B
    A = np.zeros((M, 2 * N, 2 * N))
    A[:, :N, :N] = I
    A[:, :N, N:] = upper
    A[:, N:, :N] = -half * B
    A[:, N:, N:] = I
    cond = float(np.linalg.cond(A[0]))
    log.debug("collocation system: 2N=%d, cond=%.3e (first problem)", 2 * N, cond)
    wsum = W.sum(axis=1)

    nodes = mesh.nodes()
    tail = None
    if K > 1 and len(ansatz):
        tail = monomial_tail_matrix(kernel, ansatz.exponents, mesh.knots[1], nodes[1:, 1:], r=r, n=nq)

    qhat = np.zeros((M, K, N + 1))
    phat = np.zeros((M, K, N + 1))
    memory = np.zeros((M, K, N + 1))
    t1 = np.array([mesh.knots[1]])
    for k in range(K):
        colloc = nodes[k, 1:]
        extra = np.zeros((M, N))
        hist = np.zeros((M, N))
        if k == 0:
            # ansatz exponents exceed 2, so it vanishes with its slope at t = 0
            q0, p0 = u0.copy(), u1.copy()
            extra = (-ansatz.second_derivative(colloc) - c[:, None] * ansatz.value(colloc)
                     + d[:, None] * ansatz.memory(kernel, colloc))
        else:
            q0, p0 = qhat[:, k - 1, -1].copy(), phat[:, k - 1, -1].copy()
            if k == 1:
                q0 += ansatz.value(t1)[:, 0]
                p0 += ansatz.derivative(t1)[:, 0]
            for l in range(k):
                hist += qhat[:, l, :] @ tables.V[k - l - 1].T
            if tail is not None:
                hist += coeffs @ tail[:, k - 1, :]
        if forcing is not None:
            extra = extra + np.broadcast_to(forcing(colloc), (M, N))
        rhs = np.concatenate([
            extra + d[:, None] * hist - c[:, None] * q0[:, None] + d[:, None] * q0[:, None] * wsum,
            np.broadcast_to(p0[:, None], (M, N)),
        ], axis=1)
        X = np.linalg.solve(A, rhs[..., None])[..., 0]
        P, Q = X[:, :N], X[:, N:]
        qhat[:, k, 0], phat[:, k, 0] = q0, p0
        qhat[:, k, 1:] = q0[:, None] + half * Q @ B.T
        phat[:, k, 1:] = p0[:, None] + half * P @ B.T
        mem = qhat[:, k, :] @ W.T + hist
        if k == 0 and len(ansatz):
            mem = mem + ansatz.memory(kernel, colloc)
        memory[:, k, 1:] = mem
        memory[:, k, 0] = memory[:, k - 1, -1] if k else 0.0
    return PiecewiseSolution(mesh, kernel, qhat, phat, memory, ansatz, cond, (r, nq, switch))


@dataclass(frozen=True)
class _Batch:
    c: np.ndarray
    d: np.ndarray
    lam: float
    alpha: float
    u0: np.ndarray
    u1: np.ndarray


def march(prob, mesh, tau=DEFAULT_TAU, ansatz=None, **kw):
    """Solve a single IDEProblem on ``mesh``; returns a batch-of-one solution."""
    if abs(mesh.T - prob.T) > 1e-12 * max(1.0, prob.T):
        raise ValueError("mesh horizon differs from problem horizon")
    forcing = prob.forcing
    return march_batch(prob.c, prob.d, prob.u0, prob.u1, prob.alpha, prob.lam, mesh,
                       tau=tau, ansatz=ansatz, forcing=forcing, **kw)


def solve_first_interval(prob, mesh, ansatz=None, tau=DEFAULT_TAU, **kw):
    """Collocation solution on I_1 only, as a one-interval PiecewiseSolution."""
    one = TimeMesh(mesh.h, 1, mesh.N)
    p1 = IDEProblem(prob.c, prob.d, prob.lam, prob.alpha, prob.u0, prob.u1, mesh.h, prob.forcing)
    return march(p1, one, tau=tau, ansatz=ansatz, **kw)


def hamiltonian(prob, sol, t):
    """p(t)^2 + (c - d/lam) q(t)^2."""
    return sol.p(t) ** 2 + prob.damping_margin * sol.q(t) ** 2


def solve_interval_k(prob, mesh, k, ansatz=None, tau=DEFAULT_TAU, **kw):
    """Node values (t, q, p) on interval ``k`` (1-based) after marching through it.

    The history of intervals 1..k-1 is recomputed, since the batched march
    keeps its shared weight tables internally.
    """
    if not 1 <= k <= mesh.K:
        raise ValueError(f"interval index must lie in 1..{mesh.K}, got {k}")
    part = TimeMesh(k * mesh.h, k, mesh.N)
    pk = IDEProblem(prob.c, prob.d, prob.lam, prob.alpha, prob.u0, prob.u1, part.T, prob.forcing)
    sol = march(pk, part, tau=tau, ansatz=ansatz, **kw)
    return part.nodes(k - 1), sol.q_nodes()[0, k - 1], sol.p_nodes()[0, k - 1]
