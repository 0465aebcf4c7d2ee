"""Error functionals between paired trajectories, and property diagnostics.

The headline quantity is the weighted squared error functional between a
scaled Navier-Stokes trajectory and a hydrostatic trajectory started from
the same data: a sup-in-time part plus a time-integrated dissipation part,
with explicit aspect-ratio weights on each norm.  Squared norms are used
throughout; the corresponding unsquared error carries half the exponent.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .nse import EnergyLedger
from .pe import diagnose_w
from .spectral import Field, Grid, Parity, Space, VectorField

__all__ = [
    "Trajectory", "ErrorReport", "TrilinearSample",
    "beta", "error_report", "energy_inequality_residual",
    "trilinear_sample", "trilinear_check",
]


def beta(alpha: float) -> float:
    """Predicted exponent of the squared error functional: min(2, alpha-2)."""
    if alpha <= 2:
        raise ValueError("alpha must exceed 2")
    return min(2.0, alpha - 2.0)


@dataclass(frozen=True)
class Trajectory:
    """Aligned spectral snapshots of one run."""

    grid: Grid
    times: np.ndarray
    frames: tuple       # per time: tuple of coefficient arrays (3=nse, 2=pe)
    kind: str           # 'nse' | 'pe'

    @classmethod
    def from_nse_result(cls, res):
        return cls(res.grid, np.asarray(res.times), tuple(res.frames), "nse")

    @classmethod
    def from_pe_result(cls, res):
        return cls(res.grid, np.asarray(res.times), tuple(res.frames), "pe")

    @classmethod
    def from_snapshots(cls, snaps):
        if not snaps:
            raise ValueError("empty snapshot sequence")
        g = snaps[0].grid
        n_comp = len(snaps[0].components)
        frames = []
        for s in snaps:
            if s.grid.shape != g.shape or (s.grid.l1, s.grid.l2) != (g.l1, g.l2):
                raise ValueError("snapshots mix grids")
            if len(s.components) != n_comp:
                raise ValueError("snapshots mix component counts")
            frames.append(tuple(
                sfft.fftn(c, norm="forward") * g.nyquist01
                for c in s.components))
        times = np.asarray([s.t for s in snaps])
        return cls(g, times, tuple(frames), "pe" if n_comp == 2 else "nse")


@dataclass
class ErrorReport:
    """The squared error functionals of one (eps, alpha) pairing."""

    eps: float
    alpha: float
    beta: float
    sup_l2_sq: float
    diss_int: float
    total: float
    T: float
    sup_h1_sq: float | None = None
    diss_int_h1: float | None = None
    total_h1: float | None = None
    blow_up: bool = False

    CSV_FIELDS = ("eps", "alpha", "beta", "sup_l2_sq", "diss_int", "total",
                  "T", "sup_h1_sq", "diss_int_h1", "total_h1", "blow_up")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def csv_row(self):
        d = asdict(self)
        out = []
        for k in self.CSV_FIELDS:
            v = d[k]
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append(str(int(v)))
            else:
                out.append(f"{v:.17g}")
        return out

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _pair_norms(grid, dv1, dv2, dw, eps, alpha, h1: bool):
    """(weighted L2^2, weighted dissipation integrand) of one difference."""
    e2 = eps ** 2
    ez = eps ** (alpha - 2.0)
    mul = (1.0 + grid.k2) if h1 else np.broadcast_to(np.float64(1.0), grid.shape)
    mul = np.ascontiguousarray(mul)
    wv = lambda c, w: kernels.weighted_sumsq(np.ascontiguousarray(c), w)
    sup = grid.vol * (wv(dv1, mul) + wv(dv2, mul) + e2 * wv(dw, mul))
    wh = np.ascontiguousarray(grid.kh2 * mul)
    wz = np.ascontiguousarray(grid.kz2 * mul)
    diss = grid.vol * (
        wv(dv1, wh) + wv(dv2, wh) + e2 * wv(dw, wh)
        + ez * (wv(dv1, wz) + wv(dv2, wz)) + e2 * ez * wv(dw, wz))
    return sup, diss


def error_report(nse_traj: Trajectory, pe_traj: Trajectory, eps: float,
                 alpha: float, include_h1: bool = True) -> ErrorReport:
    """Squared error functionals between two aligned trajectories.

    The hydrostatic trajectory's vertical velocity is reconstructed from
    incompressibility at every output time; the sup runs over output times
    and the dissipation integral uses the trapezoid rule on them.
    """
    if nse_traj.grid.shape != pe_traj.grid.shape or \
            (nse_traj.grid.l1, nse_traj.grid.l2) != (pe_traj.grid.l1, pe_traj.grid.l2):
        raise ValueError("trajectories live on different grids")
    if len(nse_traj.times) != len(pe_traj.times) or \
            np.max(np.abs(nse_traj.times - pe_traj.times)) > 1e-9 * max(1.0, nse_traj.times[-1]):
        raise ValueError("trajectories have misaligned output times")
    g = nse_traj.grid
    b = beta(alpha)

    sups, disses = [], []
    sups_h1, disses_h1 = [], []
    for fn, fp in zip(nse_traj.frames, pe_traj.frames):
        v1n, v2n, wn = fn if len(fn) == 3 else (*fn, None)
        if wn is None:
            raise ValueError("first trajectory must carry 3 components")
        v1p, v2p = fp[0], fp[1]
        vf = VectorField((Field(g, v1p, Parity.EVEN), Field(g, v2p, Parity.EVEN)))
        wp = fp[2] if len(fp) == 3 else diagnose_w(vf).coeffs
        dv1, dv2, dw = v1n - v1p, v2n - v2p, wn - wp
        s, d = _pair_norms(g, dv1, dv2, dw, eps, alpha, h1=False)
        sups.append(s)
        disses.append(d)
        if include_h1:
            s1, d1 = _pair_norms(g, dv1, dv2, dw, eps, alpha, h1=True)
            sups_h1.append(s1)
            disses_h1.append(d1)

    times = nse_traj.times
    sup = float(np.max(sups))
    diss = float(np.trapezoid(disses, times))
    rep = ErrorReport(eps=eps, alpha=alpha, beta=b, sup_l2_sq=sup,
                      diss_int=diss, total=sup + diss, T=float(times[-1]))
    if include_h1:
        rep.sup_h1_sq = float(np.max(sups_h1))
        rep.diss_int_h1 = float(np.trapezoid(disses_h1, times))
        rep.total_h1 = rep.sup_h1_sq + rep.diss_int_h1
    return rep


def energy_inequality_residual(ledger: EnergyLedger, floor: float = 1e-30) -> float:
    """max_t (E + D - E0) / max(E0, floor); positive values flag violation."""
    if len(ledger.t) == 0:
        raise ValueError("empty ledger")
    return float(np.max(ledger.residuals) / max(ledger.E[0], floor))


@dataclass(frozen=True)
class TrilinearSample:
    """One evaluation of the layered trilinear quadrature and its bounds."""

    lhs: float
    rhs_first: float
    rhs_second: float

    @property
    def ratio_first(self):
        return self.lhs / self.rhs_first

    @property
    def ratio_second(self):
        return self.lhs / self.rhs_second


def _l2_and_gradh(f: Field):
    g = f.grid
    n = np.sqrt(g.vol * kernels.weighted_sumsq(f.coeffs, np.ascontiguousarray(
        np.broadcast_to(np.float64(1.0), g.shape))))
    gh = np.sqrt(g.vol * kernels.weighted_sumsq(f.coeffs, g.kh2))
    return float(n), float(gh)


def trilinear_sample(phi: Field, psi: Field) -> TrilinearSample:
    """Quadrature of int_M (int|phi| dz)(int|phi psi| dz) and its two bounds."""
    if phi.space is not Space.SPECTRAL or psi.space is not Space.SPECTRAL:
        raise ValueError("trilinear sample expects spectral fields")
    g = phi.grid
    pphi = sfft.ifftn(phi.coeffs, norm="forward").real
    ppsi = sfft.ifftn(psi.coeffs, norm="forward").real
    if np.max(np.abs(pphi)) == 0.0 or np.max(np.abs(ppsi)) == 0.0:
        raise ValueError("zero-field inputs")
    dx, dy, dz = g.spacing()
    col_phi = np.sum(np.abs(pphi), axis=2) * dz
    col_mix = np.sum(np.abs(pphi * ppsi), axis=2) * dz
    lhs = float(np.sum(col_phi * col_mix) * dx * dy)

    nphi, gphi = _l2_and_gradh(phi)
    npsi, gpsi = _l2_and_gradh(psi)
    rhs1 = nphi * np.sqrt(nphi) * np.sqrt(nphi + gphi) \
        * np.sqrt(npsi) * np.sqrt(npsi + gpsi)
    rhs2 = npsi * nphi * (nphi + gphi)
    return TrilinearSample(lhs, float(rhs1), float(rhs2))


def trilinear_check(grid: Grid, n_samples: int, seed: int = 0,
                    max_mode: int | None = None):
    """Worst-case TrilinearSample over random band-limited pairs.

    Returns (worst_sample, ratios_first, ratios_second); the max ratio is an
    empirical lower bound for the constant in the layered inequality.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if max_mode is None:
        max_mode = max(1, min(grid.nx, grid.ny, grid.nz) // 3)
    rng = np.random.default_rng(seed)
    band = np.ones(grid.shape)
    for axis, n in enumerate(grid.shape):
        modes = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        sl = [None, None, None]
        sl[axis] = slice(None)
        band = band * (modes[tuple(sl)] <= max_mode)

    def rand_field():
        noise = rng.standard_normal(grid.shape)
        c = sfft.fftn(noise, norm="forward") * band * grid.nyquist01
        return Field(grid, c, Parity.EVEN)

    worst = None
    r1, r2 = [], []
    for _ in range(n_samples):
        s = trilinear_sample(rand_field(), rand_field())
        r1.append(s.ratio_first)
        r2.append(s.ratio_second)
        if worst is None or s.ratio_first > worst.ratio_first:
            worst = s
    return worst, np.asarray(r1), np.asarray(r2)
