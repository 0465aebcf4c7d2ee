"""Parameter-sweep orchestration: paired runs, rate fits, charts, manifest.

One sweep shares a single grid, a single deterministic initial-data build
and one fixed step size across every run, so discretization error largely
cancels in the differenced trajectories.  The hydrostatic reference is run
once and reused by every aspect-ratio run; all artifacts land in the output
directory with a manifest written last by the parent process.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import SweepConfig, dump_config
from .diagnostics import ErrorReport, Trajectory, beta, error_report
from .initial import build_initial_data
from .kernels import backend_name
from .nse import BlowUpError, CflError, NseParams, run_nse
from .pe import PeParams, run_pe
from .snapshots import read_trajectory, trajectory_checksum, write_trajectory
from .spectral import phys_real
from .timestep import cfl_bound

__all__ = ["RateFit", "fit_rate", "resolve_dt", "run_sweep", "render",
           "SweepResult"]


@dataclass
class RateFit:
    """Least-squares slope of log(total) against log(eps) for one alpha."""

    alpha: float
    beta_predicted: float
    slope: float | None
    intercept: float | None
    residual_rms: float | None
    tol: float
    passes: bool
    points: list          # verbatim (log eps, log total) pairs
    error: str | None = None

    @property
    def slope_sqrt(self):
        """Equivalent slope for the unsquared error (half the squared fit)."""
        return None if self.slope is None else 0.5 * self.slope

    def to_dict(self):
        d = asdict(self)
        d["slope_sqrt"] = self.slope_sqrt
        return d


def fit_rate(points, alpha: float, tol: float = 0.6) -> RateFit:
    """Ordinary least squares on (log eps, log total) pairs.

    Requires at least three points with distinct abscissae.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("rate fit needs at least 3 points")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if len(np.unique(xs)) != len(xs):
        raise ValueError("rate fit needs distinct eps values")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    b = beta(alpha)
    return RateFit(alpha=alpha, beta_predicted=b, slope=float(slope),
                   intercept=float(intercept), residual_rms=rms, tol=tol,
                   passes=bool(abs(slope - b) <= tol), points=pts)


def _failed_fit(alpha, tol, points, message) -> RateFit:
    return RateFit(alpha=alpha, beta_predicted=beta(alpha), slope=None,
                   intercept=None, residual_rms=None, tol=tol, passes=False,
                   points=[(float(x), float(y)) for x, y in points],
                   error=message)


def resolve_dt(cfg: SweepConfig, grid, v0, w0) -> float:
    """One fixed step for the whole sweep, hitting output times exactly.

    Derived from the advective CFL bound of the initial data (with margin
    for later acceleration) unless the config pins dt, then rounded down so
    an integer number of steps spans each output interval.
    """
    spacing = cfg.t_end / (cfg.n_outputs - 1)
    if cfg.dt is not None:
        target = cfg.dt
    else:
        speeds = tuple(float(np.max(np.abs(phys_real(c))))
                       for c in (v0[0].coeffs, v0[1].coeffs, w0.coeffs))
        bound = cfl_bound(speeds, grid.spacing())
        target = min(cfg.dt_max, 0.5 * cfg.cfl_safety * bound)
    n_sub = max(1, math.ceil(spacing / target - 1e-12))
    return spacing / n_sub


def _run_dir(eps, alpha):
    return f"nse_a{alpha:g}_e{eps:g}"


def _nse_task(payload):
    """Run one scaled solve and write its artifacts (worker-safe)."""
    cfg = SweepConfig(**payload["config"])
    eps, alpha, dt = payload["eps"], payload["alpha"], payload["dt"]
    grid = cfg.grid()
    v0, w0 = build_initial_data(cfg.data_spec(), grid)
    params = NseParams(eps=eps, alpha=alpha, t_end=cfg.t_end, dt=dt,
                       cfl_safety=cfg.cfl_safety, dt_max=cfg.dt_max)
    rundir = Path(cfg.outdir) / _run_dir(eps, alpha)
    record = {"eps": eps, "alpha": alpha, "dir": rundir.name,
              "status": "ok", "t_reached": 0.0}
    start = time.perf_counter()
    try:
        res = run_nse(v0, w0, params, n_outputs=cfg.n_outputs)
    except BlowUpError as exc:
        record["status"] = "blow_up"
        record["t_reached"] = float(exc.t)
        return record
    except CflError as exc:
        record["status"] = "cfl_violation"
        record["detail"] = str(exc)
        return record
    frames = [(t, comps) for t, comps in res.physical_frames()]
    write_trajectory(rundir, grid, frames, eps=eps, alpha=alpha)
    res.ledger.to_csv(rundir / "energy.csv")
    record.update({
        "t_reached": float(res.times[-1]),
        "energy_residual": float(np.max(res.ledger.residuals)
                                 / max(res.ledger.E[0], 1e-30)),
        "max_divergence": res.max_divergence,
        "max_parity_error": res.max_parity_error,
        "elapsed": time.perf_counter() - start,
    })
    return record


@dataclass
class SweepResult:
    config: SweepConfig
    outdir: Path
    reports: dict        # (alpha, eps) -> ErrorReport, successful runs only
    fits: dict           # alpha -> RateFit
    records: list        # per-run manifest entries
    pe_checksum: str

    @property
    def all_pass(self):
        return bool(self.fits) and all(f.passes for f in self.fits.values())


def run_sweep(cfg: SweepConfig) -> SweepResult:
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(dump_config(cfg))

    grid = cfg.grid()
    v0, w0 = build_initial_data(cfg.data_spec(), grid)
    dt = resolve_dt(cfg, grid, v0, w0)

    # hydrostatic reference: independent of both eps and alpha, run once
    pe_dir = outdir / "pe"
    t0 = time.perf_counter()
    pe_params = PeParams(t_end=cfg.t_end, dt=dt, cfl_safety=cfg.cfl_safety,
                         dt_max=cfg.dt_max)
    pe_res = run_pe(v0, pe_params, n_outputs=cfg.n_outputs,
                    lm_exponent=cfg.lm_exponent)
    write_trajectory(pe_dir, grid, list(pe_res.physical_frames()),
                     eps=0.0, alpha=0.0)
    pe_res.monitor.to_csv(pe_dir / "monitor.csv")
    pe_elapsed = time.perf_counter() - t0
    pe_checksum = trajectory_checksum(pe_dir)
    pe_traj = Trajectory.from_pe_result(pe_res)

    payload_cfg = {f: getattr(cfg, f) for f in (
        "nx", "ny", "nz", "l1", "l2", "data_kind", "smoothness_class", "seed",
        "max_mode", "amplitude", "h1_target", "h2_target", "alphas",
        "eps_list", "t_end", "dt", "cfl_safety", "dt_max", "n_outputs",
        "outdir", "workers", "slope_tol", "lm_exponent")}
    tasks = [{"config": payload_cfg, "eps": eps, "alpha": alpha, "dt": dt}
             for alpha in cfg.alphas for eps in cfg.eps_list]

    if cfg.workers == 1:
        records = [_nse_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_nse_task, tasks))
    records.sort(key=lambda r: (r["alpha"], -r["eps"]))

    include_h1 = cfg.smoothness_class == "H2"
    reports = {}
    for rec in records:
        rec["pe_checksum"] = pe_checksum
        if rec["status"] != "ok":
            continue
        nse_traj = Trajectory.from_snapshots(
            read_trajectory(outdir / rec["dir"]))
        rep = error_report(nse_traj, pe_traj, eps=rec["eps"],
                           alpha=rec["alpha"], include_h1=include_h1)
        reports[(rec["alpha"], rec["eps"])] = rep
        name = f"report_a{rec['alpha']:g}_e{rec['eps']:g}.json"
        (outdir / name).write_text(rep.to_json() + "\n")
        rec["report"] = name

    _write_reports_csv(outdir / "reports.csv", cfg, records, reports)

    fits = {}
    for alpha in cfg.alphas:
        pts = [(math.log(eps), math.log(reports[(alpha, eps)].total))
               for eps in cfg.eps_list if (alpha, eps) in reports
               and reports[(alpha, eps)].total > 0]
        try:
            fits[alpha] = fit_rate(pts, alpha=alpha, tol=cfg.slope_tol)
        except ValueError as exc:
            fits[alpha] = _failed_fit(alpha, cfg.slope_tol, pts, str(exc))

    _write_rates_csv(outdir / "rates.csv", cfg, fits)
    render(reports, fits, outdir)

    monotone = {}
    for alpha in cfg.alphas:
        totals = [reports[(alpha, e)].total for e in cfg.eps_list
                  if (alpha, e) in reports]
        monotone[alpha] = bool(all(b < a * 1.05
                                   for a, b in zip(totals, totals[1:])))

    manifest = {
        "format": "hylm-sweep-1",
        "kernel_backend": backend_name(),
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in payload_cfg.items()},
        "dt": dt,
        "pe": {"dir": "pe", "checksum": pe_checksum, "elapsed": pe_elapsed,
               "identity_residual": float(np.max(np.abs(
                   pe_res.identity_residuals()))),
               "max_barotropic": pe_res.max_barotropic},
        "runs": records,
        "fits": [fits[a].to_dict() for a in cfg.alphas],
        "total_monotone_in_eps": {f"{a:g}": monotone[a] for a in cfg.alphas},
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return SweepResult(config=cfg, outdir=outdir, reports=reports, fits=fits,
                       records=records, pe_checksum=pe_checksum)


def _write_reports_csv(path, cfg, records, reports):
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(ErrorReport.CSV_FIELDS)
        for rec in records:
            key = (rec["alpha"], rec["eps"])
            if key in reports:
                wr.writerow(reports[key].csv_row())
            else:
                wr.writerow([f"{rec['eps']:.17g}", f"{rec['alpha']:.17g}",
                             f"{beta(rec['alpha']):.17g}", "", "", "",
                             f"{rec['t_reached']:.17g}", "", "", "", "1"])


def _write_rates_csv(path, cfg, fits):
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["alpha", "beta_predicted", "slope", "residual", "pass"])
        for alpha in cfg.alphas:
            f = fits[alpha]
            wr.writerow([
                f"{alpha:.17g}", f"{f.beta_predicted:.17g}",
                "" if f.slope is None else f"{f.slope:.17g}",
                "" if f.residual_rms is None else f"{f.residual_rms:.17g}",
                str(int(f.passes)),
            ])


# ------------------------------------------------------------------ charts

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _svg_chart(alpha, points, fit: RateFit):
    """Deterministic log-log SVG: data points, fitted line, reference slope."""
    xs = np.array([p[0] for p in points]) / math.log(10.0)
    ys = np.array([p[1] for p in points]) / math.log(10.0)
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    padx = 0.08 * max(x1 - x0, 1e-6)
    pady = 0.12 * max(y1 - y0, 1e-6)
    x0, x1 = x0 - padx, x1 + padx
    y0, y1 = y0 - pady, y1 + pady

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{_H}" viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
           f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>']

    for x, lab in zip(xs, points):
        out.append(f'<line x1="{px(x):.2f}" y1="{_H - _MB}" x2="{px(x):.2f}" '
                   f'y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px(x):.2f}" y="{_H - _MB + 18}" font-size="11" '
                   f'text-anchor="middle">{math.exp(lab[0]):.3g}</text>')
    for frac in (0.0, 0.5, 1.0):
        yv = y0 + frac * (y1 - y0)
        out.append(f'<line x1="{_ML - 5}" y1="{py(yv):.2f}" x2="{_ML}" '
                   f'y2="{py(yv):.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{py(yv) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{10.0 ** yv:.3g}</text>')
    out.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" '
               f'font-size="12" text-anchor="middle">eps</text>')
    out.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 16 '
               f'{(_MT + _H - _MB) / 2})">total</text>')

    if fit.slope is not None:
        ya = (fit.slope * (x0 * math.log(10.0)) + fit.intercept) / math.log(10.0)
        yb = (fit.slope * (x1 * math.log(10.0)) + fit.intercept) / math.log(10.0)
        out.append(f'<line x1="{px(x0):.2f}" y1="{py(ya):.2f}" '
                   f'x2="{px(x1):.2f}" y2="{py(yb):.2f}" stroke="#1f77b4" '
                   f'stroke-width="1.5"/>')
    # reference line with the predicted slope, anchored at the largest eps
    ix = int(np.argmax(xs))
    bref = fit.beta_predicted
    ya = ys[ix] + bref * (x0 - xs[ix])
    yb = ys[ix] + bref * (x1 - xs[ix])
    out.append(f'<line x1="{px(x0):.2f}" y1="{py(ya):.2f}" x2="{px(x1):.2f}" '
               f'y2="{py(yb):.2f}" stroke="#d62728" stroke-width="1.5" '
               f'stroke-dasharray="6 4"/>')
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" '
                   f'fill="black"/>')

    lx, ly = _ML + 12, _MT + 16
    slope_txt = "n/a" if fit.slope is None else f"{fit.slope:.3f}"
    out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 26}" y2="{ly}" '
               f'stroke="#1f77b4" stroke-width="1.5"/>')
    out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-size="12">fit'
               f' (slope {slope_txt})</text>')
    out.append(f'<line x1="{lx}" y1="{ly + 18}" x2="{lx + 26}" y2="{ly + 18}" '
               f'stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>')
    out.append(f'<text x="{lx + 32}" y="{ly + 22}" font-size="12">'
               f'β reference (slope {bref:g})</text>')
    out.append(f'<text x="{_W - _MR - 4}" y="{_MT + 16}" font-size="12" '
               f'text-anchor="end">alpha = {alpha:g}</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def render(reports: dict, fits: dict, outdir) -> list:
    """One SVG per alpha plus a plain-text summary table; returns the paths."""
    if not fits:
        raise ValueError("nothing to render: empty fit list")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    lines = ["alpha  beta  slope  slope_sqrt  residual  pass"]
    for alpha in sorted(fits):
        fit = fits[alpha]
        pts = fit.points
        if not pts:
            continue
        svg = _svg_chart(alpha, pts, fit)
        p = outdir / f"chart_a{alpha:g}.svg"
        p.write_bytes(svg.encode("utf-8"))
        paths.append(p)
        lines.append(
            f"{alpha:g}  {fit.beta_predicted:g}  "
            f"{'-' if fit.slope is None else f'{fit.slope:.3f}'}  "
            f"{'-' if fit.slope_sqrt is None else f'{fit.slope_sqrt:.3f}'}  "
            f"{'-' if fit.residual_rms is None else f'{fit.residual_rms:.3f}'}  "
            f"{'yes' if fit.passes else 'no'}")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    return paths
