"""Command line entry point.

    colecole simulate    1D/2D Cole-Cole field simulation
    colecole ide         single modal IDE study (t, q, p, H trace)
    colecole convergence manufactured-solution error table over N and tau
    colecole quadtest    mapped versus plain Gauss on kernel integrands

Configuration comes from an optional flat ``key = value`` file (or a run.json
written by an earlier run) with command-line flags taking precedence.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import driver as dv
from .ide.march import IDEProblem, TimeMesh

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


def _int_list(s):
    return [int(v) for v in str(s).replace(" ", "").split(",") if v]


def _float_list(s):
    return [float(v) for v in str(s).replace(" ", "").split(",") if v]


COMMON = {"alpha": float, "lam": float, "T": float, "intervals": int, "colloc": int, "tau": float,
          "map_order": int, "quad_n": int, "out": str}

KEYS = {
    "simulate": {**COMMON, "dim": int, "spatial_n": int, "dense_output": int, "c": float, "d": float,
                 "eps0": float, "eps_inf": float, "eps_s": float, "tau_relax": float, "mu0": float,
                 "domain_a": float, "domain_b": float, "profile": str, "center": float, "width": float,
                 "height": float, "kx": float, "ky": float, "table": str, "grid_n": int, "every": int},
    "ide": {**COMMON, "c": float, "d": float, "u0": float, "u1": float, "dense_output": int},
    "convergence": {**COMMON, "ns": _int_list, "taus": _float_list},
    "quadtest": {"alpha": float, "lam": float, "ns": _int_list, "out": str},
}

PHYSICAL = ("eps0", "eps_inf", "eps_s", "tau_relax", "mu0")


def defaults(command, dim=1):
    if command == "simulate":
        base = {"dim": dim, "alpha": 0.6, "lam": 1.0, "c": 1.0, "d": 74 / 75, "T": 1.5 if dim == 1 else 5.0,
                "intervals": 5, "colloc": 20, "tau": 4.0, "map_order": 3, "quad_n": 256,
                "spatial_n": 200 if dim == 1 else 24, "dense_output": 0, "domain_a": 0.0, "domain_b": 2.0,
                "profile": "square_impulse" if dim == 1 else "sine_product", "grid_n": 401 if dim == 1 else 49,
                "every": 1, "out": "out"}
        if base["profile"] == "square_impulse":
            base.update(center=1.0, width=0.2, height=1.0)
        else:
            base.update(kx=2 * math.pi, ky=math.pi / 2)
        return base
    if command == "ide":
        return {"c": 4.0, "d": 3.0, "lam": 1.5, "alpha": 0.6, "u0": 0.0, "u1": 2.0, "T": 20.0,
                "intervals": 20, "colloc": 20, "tau": 4.0, "map_order": 3, "quad_n": 256,
                "dense_output": 64, "out": "out"}
    if command == "convergence":
        return {"alpha": 0.6, "T": 2.0, "intervals": 2, "ns": [8, 12, 16, 20, 24], "taus": [2.0, 3.0, 5.0],
                "map_order": 3, "quad_n": 256, "out": "out"}
    return {"alpha": 0.6, "lam": 1.0, "ns": [16, 32, 64, 128], "out": "out"}


def read_config(path):
    """Raw string values from a key=value file or a run.json."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON in {path}: {exc}") from exc
        return dict(doc.get("config", doc))
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    return raw


def resolve(command, raw):
    """Merge defaults with typed user values; unknown keys are an error."""
    table = KEYS[command]
    unknown = sorted(set(raw) - set(table))
    if unknown:
        raise ConfigError(f"unknown configuration key(s) for {command}: {', '.join(unknown)}")
    typed = {}
    for key, value in raw.items():
        try:
            typed[key] = value if not isinstance(value, str) or table[key] is str else table[key](value)
            if table[key] in (int, float) and not isinstance(typed[key], str):
                typed[key] = table[key](typed[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    dim = typed.get("dim", 1)
    cfg = defaults(command, dim)
    if command == "simulate":
        if "profile" in typed and typed["profile"] != cfg["profile"]:
            for k in ("center", "width", "height", "kx", "ky"):
                cfg.pop(k, None)
        if any(k in typed for k in PHYSICAL):
            if "c" in typed or "d" in typed:
                raise ConfigError("give either physical constants or direct c, d, not both")
            missing = [k for k in PHYSICAL if k not in typed]
            if missing:
                raise ConfigError(f"physical constants incomplete, missing: {', '.join(missing)}")
            for k in ("c", "d", "lam"):
                cfg.pop(k, None)
    cfg.update(typed)
    return cfg


def _profile(cfg, prefix_dim):
    name = cfg["profile"]
    if name == "square_impulse":
        return dv.square_impulse(prefix_dim, cfg.get("center", 1.0), cfg.get("width", 0.2), cfg.get("height", 1.0))
    if name == "sine_product":
        return dv.sine_product(prefix_dim, cfg.get("kx", 2 * math.pi), cfg.get("ky", math.pi / 2))
    if name == "custom_table":
        if "table" not in cfg:
            raise ConfigError("custom_table profile needs table = <file>")
        try:
            return dv.custom_table(prefix_dim, cfg["table"])
        except OSError as exc:
            raise ConfigError(f"cannot read table: {exc}") from exc
    raise ConfigError(f"unknown profile {name!r}")


def _coefficients(cfg):
    if "eps0" in cfg:
        phys = dv.PhysicalConfig(cfg["eps0"], cfg["eps_inf"], cfg["eps_s"], cfg["tau_relax"],
                                 cfg["mu0"], cfg["alpha"])
        return dv.derive_coefficients(phys)
    return dv.direct_coefficients(cfg["c"], cfg["d"], cfg["lam"], cfg["alpha"])


def cmd_simulate(cfg):
    try:
        coeffs = _coefficients(cfg)
        spec = dv.RunSpec(dim=cfg["dim"], domain=(cfg["domain_a"], cfg["domain_b"]), spatial_n=cfg["spatial_n"],
                          T=cfg["T"], intervals=cfg["intervals"], colloc=cfg["colloc"], tau=cfg["tau"],
                          map_order=cfg["map_order"], quad_n=cfg["quad_n"], profile=_profile(cfg, cfg["dim"]),
                          grid_n=cfg["grid_n"], every=cfg["every"], dense_output=cfg["dense_output"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = dv.run_simulation(coeffs, spec)
    derived = {"a": coeffs.a, "b": coeffs.b, "lam": coeffs.lam, "mu0": coeffs.mu0, "margin": coeffs.margin}
    files = dv.export_simulation(result, cfg["out"], cfg, derived)
    tr = result.energy
    print(f"wrote {len(files)} files to {cfg['out']}; l2 {tr.l2_norm[0]:.6g} -> {tr.l2_norm[-1]:.6g}, "
          f"max l2 {tr.l2_norm.max():.6g}")


def cmd_ide(cfg):
    try:
        prob = IDEProblem(cfg["c"], cfg["d"], cfg["lam"], cfg["alpha"], cfg["u0"], cfg["u1"], cfg["T"])
        mesh = TimeMesh(cfg["T"], cfg["intervals"], cfg["colloc"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    study = dv.run_ide_study(prob, mesh, tau=cfg["tau"], dense=max(cfg["dense_output"], 1),
                             r=cfg["map_order"], nq=cfg["quad_n"])
    report = dv.export_ide(study, cfg["out"], cfg)
    flag = " (exceeds initial value)" if report["exceeds_initial"] else ""
    print(f"H(0) = {report['H0']:.12g}, max H = {report['H_max']:.12g}{flag}")


def cmd_convergence(cfg):
    Ns, errs, slopes = dv.convergence_table(cfg["alpha"], tuple(cfg["ns"]), tuple(cfg["taus"]),
                                            K=cfg["intervals"], T=cfg["T"], r=cfg["map_order"],
                                            nq=cfg["quad_n"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    taus = list(errs)
    dv._write_csv(out / "convergence.csv", ["N"] + [f"err_tau{t:g}" for t in taus],
                  [[n] + [errs[t][i] for t in taus] for i, n in enumerate(Ns)])
    dv.write_run_json(out, cfg, ["convergence.csv"], {f"slope_tau{t:g}": s for t, s in slopes.items()})
    for t in taus:
        print(f"tau={t:g}: slope {slopes[t]:.2f}, error at N={Ns[-1]}: {errs[t][-1]:.3e}")


def cmd_quadtest(cfg):
    rows = dv.quadrature_study(tuple(cfg["ns"]), alpha=cfg["alpha"], lam=cfg["lam"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "quadtest.csv", "w") as fh:
        fh.write("case,degree,n_quad,err_r0,err_r3\n")
        for case, deg, n, errs in rows:
            fh.write(f"{case},{deg},{n},{dv._fmt(errs[0])},{dv._fmt(errs[3])}\n")
    dv.write_run_json(out, cfg, ["quadtest.csv"])
    for case, deg, n, errs in rows:
        print(f"{case:8s} T_{deg} n={n:4d}  r=0 {errs[0]:.2e}  r=3 {errs[3]:.2e}")


COMMANDS = {"simulate": cmd_simulate, "ide": cmd_ide, "convergence": cmd_convergence, "quadtest": cmd_quadtest}

HELP = {"simulate": "1D/2D Cole-Cole field simulation",
        "ide": "single IDE study: t, q, p, H trace",
        "convergence": "manufactured-solution error table over N and tau",
        "quadtest": "mapped versus plain Gauss on kernel integrands"}

FLAGS = [("--dim", "dim"), ("--alpha", "alpha"), ("--intervals", "intervals"), ("--colloc", "colloc"),
         ("--tau", "tau"), ("--map-order", "map_order"), ("--quad-n", "quad_n"), ("--spatial-n", "spatial_n"),
         ("--T", "T"), ("--out", "out"), ("--dense-output", "dense_output")]


def build_parser():
    parser = argparse.ArgumentParser(prog="colecole", description="Cole-Cole wave simulations and memory IDE studies.",
                                     epilog="exit codes: 0 success, 2 configuration error, 3 numerical failure")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", help="key = value file or run.json")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any configuration key")
        for flag, key in FLAGS:
            if key in KEYS[name]:
                p.add_argument(flag, dest=key, default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = read_config(args.config) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            raw[k.strip()] = v.strip()
        for _, key in FLAGS:
            if getattr(args, key, None) is not None:
                raw[key] = getattr(args, key)
        cfg = resolve(args.command, raw)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
