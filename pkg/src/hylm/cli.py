"""Command-line interface.

Subcommands: run-nse, run-pe, compare, sweep, fit, validate.  The sweep
command exits 0 only when every requested rate fit lands in its tolerance
band; validate exits 0 only when every property check passes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .diagnostics import Trajectory, error_report
from .initial import build_initial_data
from .nse import NseParams, run_nse
from .pe import PeParams, run_pe
from .snapshots import read_snapshot, read_trajectory, write_trajectory
from .sweep import _run_dir, fit_rate, resolve_dt, run_sweep


def _add_config(p):
    p.add_argument("--config", required=True, help="flat key=value config file")


def _spectral_fields(snap):
    import scipy.fft as sfft

    from .spectral import Field, Parity, VectorField

    g = snap.grid
    coeffs = [sfft.fftn(c, norm="forward") * g.nyquist01
              for c in snap.components]
    v = VectorField((Field(g, coeffs[0], Parity.EVEN),
                     Field(g, coeffs[1], Parity.EVEN)))
    w = Field(g, coeffs[2], Parity.ODD) if len(coeffs) == 3 else None
    return g, v, w


def _cmd_run_nse(args) -> int:
    cfg = load_config(args.config)
    t0 = 0.0
    if args.restart:
        snap = read_snapshot(args.restart)
        if snap.is_pe:
            raise SystemExit("restart snapshot lacks the vertical component")
        grid, v0, w0 = _spectral_fields(snap)
        t0 = snap.t
        eps = args.eps if args.eps is not None else snap.eps
        alpha = args.alpha if args.alpha is not None else snap.alpha
    else:
        eps = args.eps if args.eps is not None else cfg.eps_list[0]
        alpha = args.alpha if args.alpha is not None else cfg.alphas[0]
        grid = cfg.grid()
        v0, w0 = build_initial_data(cfg.data_spec(), grid)
    dt = resolve_dt(cfg, grid, v0, w0)
    params = NseParams(eps=eps, alpha=alpha, t_end=cfg.t_end, dt=dt,
                       cfl_safety=cfg.cfl_safety, dt_max=cfg.dt_max)
    res = run_nse(v0, w0, params, n_outputs=cfg.n_outputs, t0=t0)
    outdir = Path(args.outdir) if args.outdir else Path(cfg.outdir) / _run_dir(eps, alpha)
    write_trajectory(outdir, grid, list(res.physical_frames()),
                     eps=eps, alpha=alpha)
    res.ledger.to_csv(outdir / "energy.csv")
    resid = float(np.max(res.ledger.residuals) / max(res.ledger.E[0], 1e-30))
    print(f"wrote {len(res.times)} snapshots to {outdir}")
    print(f"energy-inequality residual {resid:.3e}, "
          f"max divergence {res.max_divergence:.3e}, "
          f"max parity error {res.max_parity_error:.3e}")
    return 0


def _cmd_run_pe(args) -> int:
    cfg = load_config(args.config)
    t0 = 0.0
    if args.restart:
        snap = read_snapshot(args.restart)
        grid, v0, _ = _spectral_fields(snap)
        from .pe import diagnose_w
        w0 = diagnose_w(v0)
        t0 = snap.t
    else:
        grid = cfg.grid()
        v0, w0 = build_initial_data(cfg.data_spec(), grid)
    dt = resolve_dt(cfg, grid, v0, w0)
    params = PeParams(t_end=cfg.t_end, dt=dt, cfl_safety=cfg.cfl_safety,
                      dt_max=cfg.dt_max)
    res = run_pe(v0, params, n_outputs=cfg.n_outputs,
                 lm_exponent=cfg.lm_exponent, t0=t0)
    outdir = Path(args.outdir) if args.outdir else Path(cfg.outdir) / "pe"
    write_trajectory(outdir, grid, list(res.physical_frames()),
                     eps=0.0, alpha=0.0)
    res.monitor.to_csv(outdir / "monitor.csv")
    resid = float(np.max(np.abs(res.identity_residuals())))
    print(f"wrote {len(res.times)} snapshots to {outdir}")
    print(f"energy-identity residual {resid:.3e}, "
          f"max barotropic residual {res.max_barotropic:.3e}")
    return 0


def _cmd_compare(args) -> int:
    nse_snaps = read_trajectory(args.nse_dir)
    pe_snaps = read_trajectory(args.pe_dir)
    nse_traj = Trajectory.from_snapshots(nse_snaps)
    pe_traj = Trajectory.from_snapshots(pe_snaps)
    if nse_traj.kind != "nse":
        raise SystemExit("first directory must hold 3-component snapshots")
    eps = args.eps if args.eps is not None else nse_snaps[0].eps
    alpha = args.alpha if args.alpha is not None else nse_snaps[0].alpha
    rep = error_report(nse_traj, pe_traj, eps=eps, alpha=alpha,
                       include_h1=args.data_class == "H2")
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = run_sweep(cfg)
    print((result.outdir / "summary.txt").read_text(), end="")
    for rec in result.records:
        if rec["status"] != "ok":
            print(f"run alpha={rec['alpha']:g} eps={rec['eps']:g} "
                  f"flagged: {rec['status']} (t={rec['t_reached']:g})")
    print(f"artifacts in {result.outdir}")
    return 0 if result.all_pass else 1


def _cmd_fit(args) -> int:
    points = []
    with open(args.csv) as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("eps", ""):
                continue
            eps, total = float(row[0]), float(row[1])
            points.append((math.log(eps), math.log(total)))
    fit = fit_rate(points, alpha=args.alpha, tol=args.tol)
    print(json.dumps(fit.to_dict(), indent=2, sort_keys=True))
    return 0 if fit.passes else 1


def _cmd_validate(args) -> int:
    from .validate import run_validation

    results = run_validation(verbose=True)
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hylm",
        description="Pseudo-spectral lab for the hydrostatic limit of "
                    "horizontally viscous flow in a thin periodic box")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-nse", help="one scaled Navier-Stokes run")
    _add_config(p)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--outdir", default=None)
    p.add_argument("--restart", default=None,
                   help="start from this snapshot instead of fresh data")
    p.set_defaults(func=_cmd_run_nse)

    p = sub.add_parser("run-pe", help="one primitive-equations run")
    _add_config(p)
    p.add_argument("--outdir", default=None)
    p.add_argument("--restart", default=None,
                   help="start from this snapshot instead of fresh data")
    p.set_defaults(func=_cmd_run_pe)

    p = sub.add_parser("compare",
                       help="error functionals between two snapshot dirs")
    p.add_argument("nse_dir")
    p.add_argument("pe_dir")
    p.add_argument("--eps", type=float, default=None,
                   help="override the eps recorded in the snapshots")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--data-class", choices=("H1", "H2"), default="H2",
                   help="H1 suppresses the H1-norm functionals")
    p.add_argument("--out", default=None, help="also write the JSON here")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("sweep", help="full (eps, alpha) study from a config")
    _add_config(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit", help="rate fit from a CSV of (eps, total) rows")
    p.add_argument("csv")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tol", type=float, default=0.6)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("validate", help="run the invariant/property suite")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
