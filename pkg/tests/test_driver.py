import json

import numpy as np
import pytest

from colecole import driver as dv
from colecole.ide.march import IDEProblem, TimeMesh


def phys(**kw):
    base = dict(eps0=1.0, eps_inf=1.0, eps_s=2.0, tau_relax=1.0, mu0=1.0, alpha=0.6)
    base.update(kw)
    return dv.PhysicalConfig(**base)


class TestCoefficients:
    def test_normalised_units(self):
        co = dv.derive_coefficients(phys())
        assert (co.a, co.b, co.lam) == (1.0, 1.0, 2.0)
        assert co.margin == 0.5

    def test_debye_degenerate(self):
        assert dv.derive_coefficients(phys(eps_s=1.0)).b == 0.0

    def test_margin_identity_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            eps_inf = rng.uniform(1, 20)
            cfg = dv.PhysicalConfig(10 ** rng.uniform(-12, 0), eps_inf, eps_inf * rng.uniform(1.01, 50),
                                    10 ** rng.uniform(-12, 1), 10 ** rng.uniform(-7, 0), rng.uniform(0.05, 0.95))
            co = dv.derive_coefficients(cfg)
            assert co.a > 0 and co.b > 0 and co.lam > 0
            assert co.margin == pytest.approx(co.a * cfg.eps_inf / cfg.eps_s, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(eps_inf=0.5), dict(eps_s=0.9, eps_inf=1.0), dict(tau_relax=0.0),
                                    dict(alpha=1.0), dict(mu0=-1.0)])
    def test_invalid_physical(self, kw):
        with pytest.raises(ValueError):
            phys(**kw)

    def test_direct(self):
        co = dv.direct_coefficients(1.0, 74 / 75, 1.0, 0.6)
        assert co.mu0 == 1.0 and co.margin == pytest.approx(1 / 75)
        with pytest.raises(ValueError):
            dv.direct_coefficients(0.0, 1.0, 1.0, 0.6)


class TestRunSpec:
    def test_invalid(self):
        with pytest.raises(ValueError):
            dv.RunSpec(dim=3)
        with pytest.raises(ValueError):
            dv.RunSpec(intervals=5, every=2)
        with pytest.raises(ValueError):
            dv.RunSpec(colloc=0)

    def test_output_times(self):
        np.testing.assert_allclose(dv.RunSpec(T=1.5, intervals=5).output_times(), np.linspace(0, 1.5, 6))
        assert dv.RunSpec(T=1.0, intervals=2, dense_output=4).output_times().size == 9


SMALL = dict(spatial_n=24, T=0.6, intervals=2, colloc=10, grid_n=41)


class TestSimulation:
    def test_zero_data(self):
        spec = dv.RunSpec(profile=dv.zero_profile(1), **SMALL)
        res = dv.run_simulation(dv.direct_coefficients(1.0, 74 / 75, 1.0, 0.6), spec)
        assert np.all(res.u == 0) and np.all(res.E == 0) and np.all(res.energy.l2_norm == 0)

    def test_initial_field_recovered(self):
        co = dv.derive_coefficients(phys(eps0=2.0, eps_inf=1.5, eps_s=3.0, mu0=0.7))
        spec = dv.RunSpec(**SMALL)
        res = dv.run_simulation(co, spec)
        # E(0) = a mu0 u(0) and a mu0 eps0 eps_inf = 1
        np.testing.assert_allclose(res.E[0], co.a * co.mu0 * res.u[0], rtol=1e-14, atol=1e-16)
        assert co.a * co.mu0 == pytest.approx(1 / (2.0 * 1.5))

    def test_memoryless_field(self):
        co = dv.derive_coefficients(phys(eps_s=1.0))
        res = dv.run_simulation(co, dv.RunSpec(**SMALL))
        np.testing.assert_allclose(res.E, co.a * co.mu0 * res.u, atol=1e-15)

    def test_boundary_and_bound(self):
        res = dv.run_simulation(dv.direct_coefficients(1.0, 74 / 75, 1.0, 0.6), dv.RunSpec(**SMALL))
        assert np.max(np.abs(res.u[:, [0, -1]])) <= 1e-12
        tr = res.energy
        assert np.all(tr.l2_norm <= np.sqrt(2) * tr.l2_norm[0] + 1e-6)
        assert np.all(np.diff(tr.times) > 0) and np.all(tr.l2_norm >= 0)

    def test_recover_E_beyond_horizon(self):
        res = dv.run_simulation(dv.direct_coefficients(1.0, 0.5, 1.0, 0.6), dv.RunSpec(**SMALL))
        with pytest.raises(ValueError):
            dv.recover_E(res.solution, res.coeffs, [1.0])

    def test_recover_E_between_knots(self):
        co = dv.direct_coefficients(1.0, 0.5, 1.0, 0.6)
        res = dv.run_simulation(co, dv.RunSpec(**SMALL))
        sol = res.solution
        t = np.array([0.17, 0.45])
        E = dv.recover_E(sol, co, t)
        np.testing.assert_allclose(E, co.a * co.mu0 * sol.q(t) - co.b * co.mu0 * sol.memory_at(t), atol=1e-15)

    def test_2d_small(self):
        spec = dv.RunSpec(dim=2, profile=dv.sine_product(2), spatial_n=10, T=1.0, intervals=2, colloc=10,
                          grid_n=11)
        res = dv.run_simulation(dv.direct_coefficients(1.0, 74 / 75, 1.0, 0.6), spec)
        assert res.u.shape == (3, 11, 11)
        assert np.max(np.abs(res.u[:, 0, :])) <= 1e-12
        assert np.all(res.energy.l2_norm <= res.energy.l2_norm[0] * (1 + 1e-9))


class TestExport:
    def run(self, **kw):
        spec = dv.RunSpec(**{**SMALL, **kw})
        return dv.run_simulation(dv.direct_coefficients(1.0, 74 / 75, 1.0, 0.6), spec)

    def test_file_contract(self, tmp_path):
        res = self.run()
        files = dv.export_simulation(res, tmp_path, {"dim": 1})
        assert len([f for f in files if f.startswith("field_")]) == 3
        assert sorted(p.name for p in tmp_path.iterdir()) == sorted(files + ["run.json"])
        assert (tmp_path / "field_0.000000.csv").read_text().splitlines()[0] == "x,u,E"
        assert (tmp_path / "energy.csv").read_text().splitlines()[0] == "t,l2_norm,hamiltonian"
        doc = json.loads((tmp_path / "run.json").read_text())
        assert doc["config"] == {"dim": 1} and doc["files"] == files

    def test_seventeen_digits(self, tmp_path):
        res = self.run()
        dv.export_simulation(res, tmp_path, {})
        row = (tmp_path / "energy.csv").read_text().splitlines()[2].split(",")
        assert float(row[1]) == res.energy.l2_norm[1]

    def test_empty_result(self, tmp_path):
        files = dv.export_simulation(None, tmp_path, {})
        assert files == ["energy.csv"]
        assert (tmp_path / "energy.csv").read_text() == "t,l2_norm,hamiltonian\n"

    def test_deterministic(self, tmp_path):
        for sub in ("a", "b"):
            dv.export_simulation(self.run(), tmp_path / sub, {})
        for f in (tmp_path / "a").iterdir():
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


class TestIDEStudy:
    def test_example_trace(self, tmp_path):
        prob = IDEProblem(4.0, 3.0, 1.5, 0.6, 0.0, 2.0, 5.0)
        study = dv.run_ide_study(prob, TimeMesh(5.0, 5, 16), dense=16)
        assert study.H[0] == pytest.approx(4.0, abs=1e-12)
        assert np.max(study.H) <= 4 + 1e-8 and not study.exceeds_initial
        report = dv.export_ide(study, tmp_path, {"c": 4.0})
        lines = (tmp_path / "ide.csv").read_text().splitlines()
        assert lines[0] == "t,q,p,H"
        assert float(lines[1].split(",")[3]) == pytest.approx(4.0, abs=1e-12)
        assert report["exceeds_initial"] is False

    def test_swapped_data_flagged(self):
        prob = IDEProblem(4.0, 3.0, 1.5, 0.6, 2.0, 0.0, 5.0)
        assert dv.run_ide_study(prob, TimeMesh(5.0, 5, 16), dense=16).exceeds_initial

    def test_convergence_table_columns(self):
        Ns, errs, slopes = dv.convergence_table(Ns=(8, 12), taus=(2, 3, 5))
        assert Ns == [8, 12] and set(errs) == {2, 3, 5} and all(len(v) == 2 for v in errs.values())
        assert errs[5][-1] < errs[2][-1]


def test_custom_table_profiles(tmp_path):
    p1 = tmp_path / "u1.csv"
    p1.write_text("x,u\n0,0\n1,1\n2,0\n")
    prof = dv.custom_table(1, p1)
    np.testing.assert_allclose(prof.fn(np.array([0.5, 1.5, 3.0])), [0.5, 0.5, 0.0])
    p2 = tmp_path / "u2.csv"
    p2.write_text("x,y,u\n0,0,0\n0,2,0\n2,0,0\n2,2,4\n")
    prof = dv.custom_table(2, p2)
    assert prof.fn(np.array([1.0]), np.array([1.0]))[0] == pytest.approx(1.0)
    p2.write_text("x,y,u\n0,0,0\n0,2,0\n2,0,0\n")
    with pytest.raises(ValueError):
        dv.custom_table(2, p2)


def test_quadrature_study_references():
    from conftest import cheb_monomials, kernel_poly_integral
    from colecole.quadrature import SingularMap
    from colecole.special_fn import KernelParams, kernel_e
    kp = KernelParams(0.6, 1.0)
    rows = dv.quadrature_study(ns=(32,))
    cases = {"singular": (0.7, 0.0, 0.7), "near": (1.01, 0.0, 1.0)}
    for case, deg, n, errs in rows:
        t, a, b = cases[case]
        exact = kernel_poly_integral(0.6, 0.6, 1.0, cheb_monomials(deg, a, b), a, b, t)
        for r, err in errs.items():
            back, w = SingularMap(a, b, r).distances(n)
            x = 2 * (b - back - a) / (b - a) - 1
            quad = w @ (kernel_e(kp, (t - b) + back) * np.polynomial.chebyshev.chebval(x, np.eye(deg + 1)[deg]))
            assert err == pytest.approx(abs(quad - exact), abs=2e-15)
