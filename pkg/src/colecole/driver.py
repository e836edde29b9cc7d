"""End-to-end runs: physical constants to PIDE coefficients, 1D/2D Cole-Cole
simulations through modal decoupling, standalone IDE studies, electric-field
recovery and file export."""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import galerkin as gk
from .ide.manufactured import Manufactured
from .ide.march import IDEProblem, TimeMesh, hamiltonian, march, march_batch
from .quadrature import SingularMap
from .special_fn import KernelParams, convolve_monomial, kernel_e

log = logging.getLogger(__name__)

DIGITS = 17


@dataclass(frozen=True)
class PhysicalConfig:
    eps0: float
    eps_inf: float
    eps_s: float
    tau_relax: float
    mu0: float
    alpha: float

    def __post_init__(self):
        if not self.eps_inf >= 1:
            raise ValueError("eps_inf must be >= 1")
        if not self.eps_s >= self.eps_inf:
            raise ValueError("eps_s must not be below eps_inf")
        for name in ("eps0", "tau_relax", "mu0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("Cole-Cole exponent must lie in (0, 1)")


@dataclass(frozen=True)
class Coefficients:
    a: float
    b: float
    lam: float
    alpha: float
    mu0: float

    @property
    def margin(self):
        return self.a - self.b / self.lam


def derive_coefficients(cfg):
    """(a, b, lam) of the reformulated model, bundled with alpha and mu0."""
    a = 1.0 / (cfg.mu0 * cfg.eps0 * cfg.eps_inf)
    b = (cfg.eps_s - cfg.eps_inf) / (cfg.mu0 * cfg.tau_relax**cfg.alpha * cfg.eps0 * cfg.eps_inf**2)
    lam = cfg.eps_s / (cfg.eps_inf * cfg.tau_relax**cfg.alpha)
    return Coefficients(a, b, lam, cfg.alpha, cfg.mu0)


def direct_coefficients(c, d, lam, alpha):
    """Coefficients given directly; mu0 = 1/a makes E(0) equal the initial field."""
    if not c > 0:
        raise ValueError("reaction coefficient must be positive")
    if not (d >= 0 and lam > 0 and 0 < alpha <= 1):
        raise ValueError("need d >= 0, lam > 0 and alpha in (0, 1]")
    return Coefficients(c, d, lam, alpha, 1.0 / c)


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True)
class Profile:
    fn: object
    breaks: tuple = ()


def square_impulse(dim, center=1.0, width=0.2, height=1.0):
    lo, hi = center - width / 2, center + width / 2
    ind = lambda x: ((x >= lo) & (x <= hi)).astype(float)  # noqa: E731
    if dim == 1:
        return Profile(lambda x: height * ind(x), (lo, hi))
    return Profile(lambda x, y: height * ind(x) * ind(y), (lo, hi))


def sine_product(dim, kx=2 * math.pi, ky=math.pi / 2):
    if dim == 1:
        return Profile(lambda x: np.sin(kx * x))
    return Profile(lambda x, y: np.sin(kx * x) * np.sin(ky * y))


def custom_table(dim, path):
    """Piecewise-linear data from a CSV: columns x,u (1D) or x,y,u on a grid (2D)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if dim == 1:
        x, u = data[:, 0], data[:, 1]
        order = np.argsort(x)
        x, u = x[order], u[order]
        return Profile(lambda s: np.interp(s, x, u, left=0.0, right=0.0), tuple(x))
    from scipy.interpolate import RegularGridInterpolator
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    grid = np.full((xs.size, ys.size), np.nan)
    grid[np.searchsorted(xs, data[:, 0]), np.searchsorted(ys, data[:, 1])] = data[:, 2]
    if np.isnan(grid).any():
        raise ValueError("2D table must cover a full tensor grid")
    interp = RegularGridInterpolator((xs, ys), grid, bounds_error=False, fill_value=0.0)
    return Profile(lambda x, y: interp(np.stack([x, y], axis=-1)), tuple(xs))


def zero_profile(dim):
    return Profile((lambda x: np.zeros_like(x)) if dim == 1 else (lambda x, y: np.zeros_like(x)))


# ---------------------------------------------------------------- simulation

@dataclass
class RunSpec:
    dim: int = 1
    domain: tuple = (0.0, 2.0)
    spatial_n: int = 200
    T: float = 1.5
    intervals: int = 5
    colloc: int = 20
    tau: float = 4.0
    map_order: int = 3
    quad_n: int = 256
    profile: Profile = None
    velocity: Profile = None
    grid_n: int = 401
    every: int = 1
    dense_output: int = 0  # points per interval; 0 = knots only

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        for name in ("spatial_n", "intervals", "colloc", "grid_n", "every", "quad_n"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.intervals % self.every:
            raise ValueError("output cadence must divide the number of intervals")
        if self.profile is None:
            self.profile = square_impulse(self.dim)
        if self.velocity is None:
            self.velocity = zero_profile(self.dim)

    def output_times(self):
        knots = np.linspace(0.0, self.T, self.intervals + 1)
        if self.dense_output:
            x = np.linspace(0.0, 1.0, self.dense_output + 1)[:-1]
            h = self.T / self.intervals
            return np.append((knots[:-1, None] + h * x).ravel(), self.T)
        return knots[::self.every]


@dataclass
class EnergyTrace:
    times: np.ndarray
    l2_norm: np.ndarray
    hamiltonian: np.ndarray
    modal_h: np.ndarray = field(repr=False, default=None)


@dataclass
class SimulationResult:
    spec: RunSpec
    coeffs: Coefficients
    times: np.ndarray
    grid: tuple
    u: np.ndarray     # (nt, *grid)
    E: np.ndarray
    energy: EnergyTrace
    modes: gk.ModalSet
    solution: object = field(repr=False, default=None)


def _grid(spec):
    xa, xb = spec.domain
    x = np.linspace(xa, xb, spec.grid_n)
    return (x,) if spec.dim == 1 else (x, x.copy())


def run_simulation(coeffs, spec):
    """Project, decouple, march every mode and reconstruct u and E."""
    basis = gk.ShenBasis(spec.spatial_n, tuple(spec.domain))
    decomp = gk.sym_eigen(gk.shen_mass_matrix(spec.spatial_n), dim=spec.dim)
    s = basis.laplace_scale
    if spec.dim == 1:
        f0 = gk.project_initial(spec.profile.fn, basis, spec.profile.breaks)
        f1 = gk.project_initial(spec.velocity.fn, basis, spec.velocity.breaks)
        modes = gk.decouple_1d(coeffs.a, coeffs.b, coeffs.lam, coeffs.alpha, f0, f1, decomp, spec.T, s)
    else:
        f0 = gk.project_initial_2d(spec.profile.fn, basis, basis, spec.profile.breaks, spec.profile.breaks)
        f1 = gk.project_initial_2d(spec.velocity.fn, basis, basis, spec.velocity.breaks, spec.velocity.breaks)
        modes = gk.decouple_2d(coeffs.a, coeffs.b, coeffs.lam, coeffs.alpha, f0, f1, decomp, spec.T, (s, s))

    mesh = TimeMesh(spec.T, spec.intervals, spec.colloc)
    sol = march_batch(modes.c.ravel(), modes.d.ravel(), modes.u0.ravel(), modes.u1.ravel(),
                      coeffs.alpha, coeffs.lam, mesh, tau=spec.tau, r=spec.map_order, nq=spec.quad_n)
    bad = np.flatnonzero(~np.all(np.isfinite(sol.qhat), axis=(1, 2)))
    if bad.size:
        raise FloatingPointError(f"mode {int(bad[0])} produced non-finite values")

    times = spec.output_times()
    v, dv = sol.q(times), sol.p(times)              # (modes, nt)
    mem = _memory_at(sol, mesh, times)
    E_modal = coeffs.a * coeffs.mu0 * v - coeffs.b * coeffs.mu0 * mem

    grid = _grid(spec)
    shape = modes.shape
    if spec.dim == 1:
        Phi = basis.eval(grid[0])
        field_of = lambda w: (w.T @ decomp.eigvecs.T) @ Phi.T  # noqa: E731
    else:
        Phi = basis.eval(grid[0])

        def field_of(w):
            W = w.T.reshape((-1,) + shape)
            U = decomp.eigvecs @ W @ decomp.eigvecs.T
            return Phi @ U @ Phi.T
    u, E = field_of(v), field_of(E_modal)

    jac = (basis.length / 2) ** spec.dim
    weight = modes.weight.ravel()[:, None]
    margin = (modes.c - modes.d / coeffs.lam).ravel()[:, None]
    modal_h = dv**2 + margin * v**2
    energy = EnergyTrace(times, np.sqrt(jac * np.sum(weight * v**2, axis=0)),
                         jac * np.sum(weight * modal_h, axis=0), modal_h)
    return SimulationResult(spec, coeffs, times, grid, u, E, energy, modes, sol)


def _memory_at(sol, mesh, times):
    """Memory integrals at output times, from stored node data where possible."""
    knots = mesh.knots
    out = np.empty((sol.batch, times.size))
    at_knot = np.isclose(times[:, None], knots[None, :], rtol=0, atol=1e-13 * max(1.0, mesh.T))
    hit = at_knot.any(axis=1)
    idx = at_knot.argmax(axis=1)
    for i in np.flatnonzero(hit):
        k = idx[i]
        out[:, i] = 0.0 if k == 0 else sol.memory[:, k - 1, -1]
    if np.any(~hit):
        out[:, ~hit] = sol.memory_at(times[~hit])
    return out


def recover_E(sol, coeffs, times):
    """Modal electric field a mu0 V - b mu0 int e V at ``times``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times > sol.mesh.T * (1 + 1e-12)):
        raise ValueError("requested time beyond the horizon")
    mem = _memory_at(sol, sol.mesh, times)
    return coeffs.a * coeffs.mu0 * sol.q(times) - coeffs.b * coeffs.mu0 * mem


# ---------------------------------------------------------------- IDE studies

@dataclass
class IDEStudy:
    problem: IDEProblem
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    solution: object = field(repr=False, default=None)

    @property
    def exceeds_initial(self):
        return bool(np.max(self.H) > self.H[0])


def run_ide_study(prob, mesh, tau=4.0, dense=64, **kw):
    sol = march(prob, mesh, tau=tau, **kw)
    t = np.unique(np.concatenate([sol.dense_times(dense), mesh.knots]))
    return IDEStudy(prob, t, sol.q(t)[0], sol.p(t)[0], hamiltonian(prob, sol, t)[0], sol)


def convergence_table(alpha=0.6, Ns=(8, 12, 16, 20, 24), taus=(2, 3, 5), K=2, T=2.0, **kw):
    """Max-node errors on the manufactured problem; returns (Ns, {tau: errors}, {tau: slope})."""
    m = Manufactured(alpha)
    prob = m.problem(T)
    errs = {}
    for tau in taus:
        row = []
        for N in Ns:
            mesh = TimeMesh(T, K, N)
            sol = march(prob, mesh, ansatz=m.ansatz(tau), **kw)
            row.append(float(np.max(np.abs(sol.q_nodes()[0] - m.u(mesh.nodes())))))
        errs[tau] = row
    slopes = {tau: float(np.polyfit(np.log(Ns), np.log(np.maximum(errs[tau], 1e-300)), 1)[0])
              for tau in taus}
    return list(Ns), errs, slopes


def _compose(p, inner):
    """Coefficients of p(inner(s)) for polynomial coefficient arrays."""
    out = np.zeros(1)
    for coef in p[::-1]:
        out = np.polynomial.polynomial.polymul(out, inner)
        out[0] += coef
    return out


def quadrature_study(ns=(16, 32, 64, 128), degrees=(1, 2), orders=(0, 3), alpha=0.6, lam=1.0):
    """Mapped-rule errors for the singular (t = 0.7) and nearly singular
    (t = 1.01) kernel integrands against closed forms."""
    kp = KernelParams(alpha, lam)
    rows = []
    for case, t, (a, b) in (("singular", 0.7, (0.0, 0.7)), ("near", 1.01, (0.0, 1.0))):
        for n_deg in degrees:
            mono = _compose(np.polynomial.chebyshev.cheb2poly(np.eye(n_deg + 1)[n_deg]),
                            [-1.0, 2.0 / (b - a)])
            # int_a^b e(t - s) (s-a)^j ds = closed form over [a, t] minus [b, t] for t > b
            exact = 0.0
            for j, cj in enumerate(mono):
                full = convolve_monomial(kp, j, t - a)
                if t > b:
                    full -= _tail(kp, j, t, a, b)
                exact += cj * full
            for n in ns:
                errs = {}
                for r in orders:
                    back, w = SingularMap(a, b, r).distances(n)
                    vals = kernel_e(kp, (t - b) + back) * np.polynomial.polynomial.polyval(b - back - a, mono)
                    errs[r] = abs(float(w @ vals) - exact)
                rows.append((case, n_deg, n, errs))
    return rows


def _tail(kp, j, t, a, b):
    """int_b^t e(t - s) (s - a)^j ds, expanded about s = b (polynomial in s - b)."""
    total = 0.0
    for i in range(j + 1):
        total += math.comb(j, i) * (b - a) ** (j - i) * convolve_monomial(kp, i, t - b)
    return total


# ---------------------------------------------------------------- export

def _fmt(x):
    return format(float(x), f".{DIGITS}g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def time_label(t):
    return f"{t:.6f}"


def export_simulation(result, out, config, derived=None):
    """field_<t>.csv per output time, energy.csv and run.json under ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if result is not None:
        for n, t in enumerate(result.times):
            path = out / f"field_{time_label(t)}.csv"
            if result.spec.dim == 1:
                x = result.grid[0]
                rows = zip(x, result.u[n], result.E[n])
                _write_csv(path, ["x", "u", "E"], rows)
            else:
                X, Y = np.meshgrid(*result.grid, indexing="ij")
                rows = zip(X.ravel(), Y.ravel(), result.u[n].ravel(), result.E[n].ravel())
                _write_csv(path, ["x", "y", "u", "E"], rows)
            files.append(path.name)
        tr = result.energy
        rows = zip(tr.times, tr.l2_norm, tr.hamiltonian)
    else:
        rows = []
    _write_csv(out / "energy.csv", ["t", "l2_norm", "hamiltonian"], rows)
    files.append("energy.csv")
    write_run_json(out, config, files, derived)
    return files


def write_run_json(out, config, files, extra=None):
    doc = {"config": config, "files": files}
    if extra:
        doc["report"] = extra
    with open(Path(out) / "run.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def export_ide(study, out, config, extra=None):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "ide.csv", ["t", "q", "p", "H"], zip(study.times, study.q, study.p, study.H))
    report = {"H0": study.H[0], "H_max": float(np.max(study.H)),
              "exceeds_initial": study.exceeds_initial, "cond": study.solution.cond}
    report.update(extra or {})
    write_run_json(out, config, ["ide.csv"], report)
    return report

