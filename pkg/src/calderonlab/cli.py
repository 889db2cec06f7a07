"""Command-line front end: field I/O, families, solvers and experiment suites.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O failure.  Errors
are reported as one JSON object on stderr.  Every run writes its fully
resolved configuration into the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import cgos as _cgos
from . import dtn as _dtn
from . import experiments as _exp
from . import grid as _grid
from . import modulus as _mod
from . import scattering as _scat
from .conductivity import gamma_to_mu, m_x
from .errors import CalderonLabError


def _family_spec(args) -> dict:
    spec = {"kind": args.family}
    if args.params:
        spec.update(json.loads(args.params))
    if args.R is not None:
        spec["R"] = args.R
    if args.s is not None:
        spec["s"] = args.s
    spec.setdefault("seed", args.seed)
    spec.setdefault("name", args.family)
    return spec


def _resolve_config(args) -> dict:
    cfg = json.loads(json.dumps(_exp.DEFAULT_CONFIG))
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg.update(json.load(fh))
    if args.grid_n is not None:
        cfg["grid"]["n"] = args.grid_n
    if args.grid_L is not None:
        cfg["grid"]["L"] = args.grid_L
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _emit_config(args, cfg: dict) -> None:
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "resolved_config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, sort_keys=True, indent=1)


def _make_grid(cfg) -> _grid.Grid:
    return _grid.Grid(int(cfg["grid"]["n"]), float(cfg["grid"]["L"]))


def _parse_k(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]))
    return complex(float(parts[0]), float(parts[1]))


def cmd_dtn(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    mesh_m = args.mesh_m if args.mesh_level is None else 12 * 2**args.mesh_level
    mesh = _dtn.disk_mesh(mesh_m)
    cond = _exp.build_family(grid, _family_spec(args))
    A = _dtn.dtn_matrix(cond, args.N, mesh)
    A0 = _dtn.dtn_matrix(None, args.N, mesh)
    payload = json.loads(A.to_json())
    payload["exp_diff"] = [
        _dtn.exponential_difference_eigenvalue(A, A0, j) for j in range(args.N + 1)
    ]
    path = os.path.join(args.out, "dtn.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
    print(path)
    return 0


def cmd_cgos(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    k = _parse_k(args.k)
    if args.mu == "zero":
        mu = _grid.GridField(grid, np.zeros(grid.shape))
    else:
        mu = gamma_to_mu(_exp.build_family(grid, _family_spec(args))).mu
    rec = _cgos.solve_cgos(mu, k)
    field_path = os.path.join(args.out, "cgos.ckf1")
    _grid.write_field(rec.f, field_path)
    sidecar = {
        "k": [k.real, k.imag],
        "residual": rec.residual,
        "iterations": rec.iterations,
        "converged": rec.converged,
        "method": rec.method,
    }
    with open(os.path.join(args.out, "cgos.json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True)
    print(field_path)
    return 0


def cmd_scatter(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    mu = gamma_to_mu(_exp.build_family(grid, _family_spec(args))).mu
    ks = _scat.polar_k_grid(tuple(float(r) for r in args.radii.split(",")), args.angles)
    samples = _scat.tau_samples(mu, ks)
    path = os.path.join(args.out, "scatter.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k_re,k_im,tau_re,tau_im,residuals\n")
        for row in samples.rows():
            fh.write(",".join(repr(v) for v in row) + "\n")
    print(path)
    return 0


def cmd_psi(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    mu = gamma_to_mu(_exp.build_family(grid, _family_spec(args))).mu
    k = _parse_k(args.k)
    psi, diag = _cgos.solve_linear_psi(mu, k, truncation=args.truncation)
    field_path = os.path.join(args.out, "psi.ckf1")
    _grid.write_field(psi, field_path)
    with open(os.path.join(args.out, "psi.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "k": [k.real, k.imag],
                "term_l2_norms": list(diag.term_l2_norms),
                "tail_l2_norm": diag.tail_l2_norm,
                "tail_bound": diag.tail_bound(),
                "iterations": diag.iterations,
            },
            fh,
            sort_keys=True,
        )
    print(field_path)
    return 0


def cmd_modulus(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    cond = _exp.build_family(grid, _family_spec(args))
    probe = _grid.GridField(grid, cond.gamma.values - 1.0, check_finite=False)
    curve = _mod.modulus_curve(probe, args.p)
    path = os.path.join(args.out, "modulus.csv")
    curve.to_csv(path)
    print(path)
    return 0


def _run_single_experiment(args, name: str) -> int:
    cfg = _resolve_config(args)
    cfg["experiments"] = {name: cfg["experiments"][name]}
    _emit_config(args, cfg)
    summary = _exp.run_suite(cfg, out_dir=args.out)
    print(json.dumps(summary["experiments"][name], sort_keys=True, default=_exp._json_default))
    return 0 if summary["passed"] else 3


def cmd_selftest(args) -> int:
    cfg = _resolve_config(args)
    _emit_config(args, cfg)
    grid = _make_grid(cfg)
    checks: list[tuple[str, bool]] = []

    f = _grid.gaussian(grid, 1.1, center=0.2 - 0.1j)
    rt = _grid.ifft(_grid.fft(f))
    checks.append(("fft roundtrip", float(np.max(np.abs(rt.values - f.values))) < 1e-12))
    dxi = np.pi / (2 * grid.half_width)
    par = np.sqrt(np.sum(np.abs(_grid.fft(f).values) ** 2)) * dxi / np.pi
    checks.append(("parseval", abs(par - _grid.lp_norm(f, 2)) < 1e-10 * par))
    b = _grid.smooth_bump(grid, 1.2)
    b0 = _grid.GridField(grid, b.values - np.mean(b.values))
    checks.append(
        ("beurling isometry", abs(_grid.lp_norm(_grid.beurling(b0), 2) - _grid.lp_norm(b0, 2))
         < 1e-8 * _grid.lp_norm(b0, 2))
    )
    chi = _grid.disk_indicator(grid)
    C = _grid.cauchy(chi)
    i0 = int(round((0.5 + grid.half_width) / grid.h))
    ic = grid.n // 2
    checks.append(("cauchy closed form", abs(C.values[i0, ic] - 0.5) < 2e-2))
    checks.append(("m_x closed form", abs(m_x(0.5, 1.0) - 2.0 / 9.0) < 1e-14))
    checks.append(
        ("radial oracle", abs(_dtn.radial_dtn_oracle([0.25, 0.5], [1.0, 3.0], 1) - (1 + 2.0 / 9.0)) < 1e-12)
    )
    zero = _grid.GridField(grid, np.zeros(grid.shape))
    rec = _cgos.solve_cgos(zero, 1.0)
    checks.append(
        ("cgos mu=0", float(np.max(np.abs(rec.f.values - np.exp(1j * grid.nodes())))) < 1e-10)
    )
    checks.append(("tau mu=0", abs(_scat.tau(zero, 1.0)) == 0.0))
    curve = _mod.modulus_curve(chi, 2.0, t_max=1.0)
    checks.append(("modulus monotone", bool(np.all(np.diff(curve.values()) >= 0))))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}")
        ok = ok and passed
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calderonlab",
        description="Numerical laboratory for the planar inverse conductivity problem",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=int, default=None, help="grid samples per axis (power of two)")
    common.add_argument("--grid-L", type=float, default=None, help="grid half width L (>= 4)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--config", default=None, help="JSON config file merged below flags")
    common.add_argument("--threads", type=int, default=None,
                        help="FFT worker threads (default: hardware threads)")
    common.add_argument("--seed", type=int, default=0, help="seed for seeded families")
    family = argparse.ArgumentParser(add_help=False)
    family.add_argument("--family", default="holder", help="family name: gamma_R | holder | bump | radial_layers")
    family.add_argument("--params", default=None, help="JSON object of family parameters")
    family.add_argument("--R", type=float, default=None, help="annulus radius for gamma_R")
    family.add_argument("--s", type=float, default=0.5, help="Holder exponent for the holder family")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dtn", parents=[common, family], help="assemble a DtN matrix")
    p.add_argument("--N", type=int, default=8, help="truncation degree")
    p.add_argument("--mesh-m", type=int, dest="mesh_m", default=48, help="mesh refinement parameter")
    p.add_argument("--mesh-level", type=int, dest="mesh_level", default=None,
                   help="alternative refinement ladder: m = 12 * 2^level")
    p.set_defaults(func=cmd_dtn)
    p = sub.add_parser("cgos", parents=[common, family], help="solve one CGOS record")
    p.add_argument("--mu", default="family", help="'zero' or 'family'")
    p.add_argument("--k", default="1,0", help="spectral parameter re,im")
    p.set_defaults(func=cmd_cgos)
    p = sub.add_parser("scatter", parents=[common, family], help="scattering transform samples")
    p.add_argument("--radii", default="0.25,0.5,1,2,4,8", help="comma list of |k| radii")
    p.add_argument("--angles", type=int, default=8, help="angles per radius")
    p.set_defaults(func=cmd_scatter)
    p = sub.add_parser("psi", parents=[common, family], help="linear-equation solution and diagnostics")
    p.add_argument("--k", default="4,0", help="spectral parameter re,im")
    p.add_argument("--truncation", type=int, default=10, help="Neumann partial-sum truncation")
    p.set_defaults(func=cmd_psi)
    p = sub.add_parser("modulus", parents=[common, family], help="modulus-of-continuity curve")
    p.add_argument("--p", type=float, default=2.0, help="integral exponent p")
    p.set_defaults(func=cmd_modulus)
    for name in ("decay", "stability", "instability"):
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        p.set_defaults(func=lambda a, _n=name: _run_single_experiment(a, _n))
    p = sub.add_parser("selftest", parents=[common], help="run the quick oracle set")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _grid.set_fft_workers(args.threads if args.threads else os.cpu_count() or 1)
    try:
        return args.func(args)
    except CalderonLabError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except OSError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
