"""Scaled anisotropic Navier-Stokes solver on the periodic box.

State is (v, w): horizontal velocity (even in z) plus the scaled vertical
velocity (odd in z).  After rescaling, the horizontal viscosity is 1, the
vertical one eps^(alpha-2), and the vertical momentum balance carries the
eps^2 inertia that makes the pressure solve anisotropic.  Both viscosities
are absorbed exactly by a spectral integrating factor; advection, forcing
and the pressure gradient are explicit inside the RK stages, with the
pressure recomputed per stage so every stage tendency is divergence free.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .spectral import Field, Grid, Parity, VectorField, parity_error, phys_real
from .timestep import (
    BlowUpError,
    CflError,
    EnergyAccount,
    Hooks,
    cfl_bound,
    ifrk4_step,
    output_times,
)

__all__ = [
    "NseParams", "NseState", "EnergyLedger", "NseRunResult",
    "nse_rhs", "step_nse", "run_nse", "energy_functionals",
    "BlowUpError", "CflError",
]

_INV_TOL = 1e-10


@dataclass(frozen=True)
class NseParams:
    """Aspect ratio, viscosity exponent and stepping controls.

    Only the regime alpha > 2 is admitted; dt=None selects CFL-limited
    adaptive stepping capped at dt_max.
    """

    eps: float
    alpha: float
    t_end: float
    dt: float | None = None
    cfl_safety: float = 0.4
    dt_max: float = 5e-3

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.alpha <= 2:
            raise ValueError("alpha must exceed 2 (other regimes have a "
                             "different limit and are not handled)")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")

    @property
    def nu_z(self):
        return self.eps ** (self.alpha - 2.0)


@dataclass(frozen=True)
class NseState:
    """Velocity state plus the diagnostic pressure of the last evaluation."""

    v: VectorField
    w: Field
    t: float
    p: Field | None = None

    @property
    def grid(self) -> Grid:
        return self.v.grid

    def coeffs(self):
        return (self.v[0].coeffs, self.v[1].coeffs, self.w.coeffs)

    def divergence_max(self) -> float:
        g = self.grid
        d = kernels.div_spectral(*self.coeffs(), g.kx3, g.ky3, g.kz3)
        return float(np.max(np.abs(d)))

    def parity_error_max(self) -> float:
        return max(parity_error(self.v[0]), parity_error(self.v[1]),
                   parity_error(self.w))

    def check_invariants(self, tol=_INV_TOL):
        d = self.divergence_max()
        if d > tol:
            raise ValueError(f"state violates the divergence constraint "
                             f"({d:.3e} > {tol:.1e})")
        p = self.parity_error_max()
        if p > tol:
            raise ValueError(f"state violates the parity constraint "
                             f"({p:.3e} > {tol:.1e})")

    @classmethod
    def from_arrays(cls, grid, c1, c2, cw, t=0.0, p=None):
        v = VectorField((Field(grid, c1, Parity.EVEN), Field(grid, c2, Parity.EVEN)))
        return cls(v, Field(grid, cw, Parity.ODD), t, p)


@dataclass
class EnergyLedger:
    """Time series of the weighted energy and accumulated dissipation."""

    t: np.ndarray
    E: np.ndarray
    D: np.ndarray

    @property
    def residuals(self):
        return self.E + self.D - self.E[0]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "E", "D", "E_plus_D_minus_E0"])
            for row in zip(self.t, self.E, self.D, self.residuals):
                wr.writerow([f"{x:.17g}" for x in row])


@dataclass
class NseRunResult:
    times: np.ndarray
    frames: list          # per output time: (c_v1, c_v2, c_w) spectral arrays
    ledger: EnergyLedger
    params: NseParams
    grid: Grid
    max_divergence: float
    max_parity_error: float

    def state(self, i) -> NseState:
        return NseState.from_arrays(self.grid, *self.frames[i], t=self.times[i])

    def physical_frames(self):
        for t, comps in zip(self.times, self.frames):
            yield t, tuple(phys_real(c) for c in comps)


class _NseContext:
    """Per-(grid, params) precomputed tables and the stage tendency."""

    def __init__(self, grid: Grid, params: NseParams, hooks: Hooks | None):
        self.grid = grid
        self.params = params
        self.hooks = hooks or Hooks()
        self.lam = grid.kh2 + params.nu_z * grid.kz2
        self.inv_den = grid.aniso_inv_den(params.eps)
        self.inv_eps2 = 1.0 / params.eps ** 2
        self._efac_cache = {}

    def efac(self, dt):
        got = self._efac_cache.get(dt)
        if got is None:
            got = (np.exp(-self.lam * dt), np.exp(-self.lam * 0.5 * dt))
            if len(self._efac_cache) > 8:
                self._efac_cache.clear()
            self._efac_cache[dt] = got
        return got

    def physical(self, comps):
        # solver states stay band-limited (masked advection, diagonal linear
        # factors, band-limited data), so no re-masking is needed here
        return tuple(phys_real(c) for c in comps)

    def advection(self, comps, phys=None):
        """Skew-symmetric, dealiased advection tendencies for all components."""
        g = self.grid
        u = self.physical(comps) if phys is None else phys
        ks = (g.kx3, g.ky3, g.kz3)
        m = g.dealias01
        prods = {}
        for i in range(3):
            for j in range(i, 3):
                prods[i, j] = sfft.fftn(u[i] * u[j], norm="forward")
        out = []
        for j, c in enumerate(comps):
            gx, gy, gz = (phys_real(kernels.mul_ik(c, k)) for k in ks)
            conv = sfft.fftn(kernels.dot3(*u, gx, gy, gz), norm="forward")
            p1 = prods[min(0, j), max(0, j)]
            p2 = prods[min(1, j), max(1, j)]
            p3 = prods[min(2, j), max(2, j)]
            out.append(kernels.skew_combine(conv, p1, p2, p3, *ks, m))
        return tuple(out)

    def project(self, f):
        g = self.grid
        return kernels.project_aniso(f[0], f[1], f[2], g.kx3, g.ky3, g.kz3,
                                     self.inv_den, self.inv_eps2)

    def stage_tendency(self, t, comps):
        """Explicit (non-viscous) tendency: advection + forcing, pressure-projected."""
        if self.hooks.advection:
            f = list(self.advection(comps))
        else:
            f = [np.zeros(self.grid.shape, dtype=np.complex128) for _ in range(3)]
        if self.hooks.forcing is not None:
            for i, fc in enumerate(self.hooks.forcing(t)):
                f[i] = f[i] + fc * self.grid.dealias01
        o1, o2, o3, _ = self.project(f)
        return o1, o2, o3

    def full_rhs(self, t, comps):
        """Complete tendency including viscosity, plus the pressure."""
        if self.hooks.advection:
            f = list(self.advection(comps))
        else:
            f = [np.zeros(self.grid.shape, dtype=np.complex128) for _ in range(3)]
        if self.hooks.forcing is not None:
            for i, fc in enumerate(self.hooks.forcing(t)):
                f[i] = f[i] + fc * self.grid.dealias01
        for i in range(3):
            f[i] = f[i] - self.lam * comps[i]
        return self.project(f)

    def cleanup(self, comps):
        """Remove round-off parity and divergence drift."""
        c1 = kernels.parity_project_z(comps[0], 1.0)
        c2 = kernels.parity_project_z(comps[1], 1.0)
        cw = kernels.parity_project_z(comps[2], -1.0)
        o1, o2, o3, _ = self.project((c1, c2, cw))
        return o1, o2, o3

    def cfl_dt(self, comps):
        u = self.physical(comps)
        speeds = tuple(float(np.max(np.abs(p))) for p in u)
        return cfl_bound(speeds, self.grid.spacing())


def nse_rhs(state: NseState, params: NseParams, hooks: Hooks | None = None):
    """Tendencies of the scaled system for one state, plus the pressure.

    The returned pair of tendencies is discretely divergence free; the
    pressure solves the anisotropic Poisson equation sourced by the
    divergence of the non-pressure terms.
    """
    state.check_invariants()
    ctx = _NseContext(state.grid, params, hooks)
    o1, o2, o3, p = ctx.full_rhs(state.t, state.coeffs())
    g = state.grid
    tend_v = VectorField((Field(g, o1, Parity.EVEN), Field(g, o2, Parity.EVEN)))
    return tend_v, Field(g, o3, Parity.ODD), Field(g, p, Parity.EVEN)


def energy_functionals(state: NseState, params: NseParams):
    """(E, instantaneous dissipation rate) of the weighted energy balance."""
    g = state.grid
    c1, c2, cw = state.coeffs()
    e2 = params.eps ** 2
    vol = g.vol
    E = vol * (float(np.sum(np.abs(c1) ** 2 + np.abs(c2) ** 2))
               + e2 * float(np.sum(np.abs(cw) ** 2)))
    lam = g.kh2 + params.nu_z * g.kz2
    rate = 2.0 * vol * (kernels.weighted_sumsq(c1, lam)
                        + kernels.weighted_sumsq(c2, lam)
                        + e2 * kernels.weighted_sumsq(cw, lam))
    return E, rate


def _resolve_dt(ctx, params, comps, remaining):
    bound = ctx.cfl_dt(comps)
    limit = params.cfl_safety * bound
    if params.dt is not None:
        if params.dt > limit + 1e-15:
            raise CflError(
                f"dt={params.dt:.3e} exceeds cfl_safety*bound={limit:.3e}")
        dt = params.dt
    else:
        dt = min(params.dt_max, limit)
    return min(dt, remaining)


def step_nse(state: NseState, params: NseParams, hooks: Hooks | None = None) -> NseState:
    """Advance one step; integrating factor for viscosity, RK4 for the rest."""
    state.check_invariants()
    ctx = _NseContext(state.grid, params, hooks)
    comps = state.coeffs()
    dt = _resolve_dt(ctx, params, comps, remaining=np.inf)
    if not np.isfinite(dt) or dt <= 0:
        raise ValueError("could not determine a positive time step")
    e_full, e_half = ctx.efac(dt)
    n1 = ctx.stage_tendency(state.t, comps)
    new = ifrk4_step(comps, n1, ctx.stage_tendency, state.t, dt,
                     e_full, e_half, kernels)
    new = ctx.cleanup(new)
    if not all(np.isfinite(c.view(np.float64)).all() for c in new):
        raise BlowUpError(state.t + dt)
    _, _, _, p = ctx.full_rhs(state.t + dt, new)
    g = state.grid
    return NseState.from_arrays(g, *new, t=state.t + dt,
                                p=Field(g, p, Parity.EVEN))


def run_nse(v0: VectorField, w0: Field, params: NseParams, n_outputs=50,
            hooks: Hooks | None = None, max_steps=1_000_000,
            t0: float = 0.0) -> NseRunResult:
    """Integrate from t=t0 to t_end, sampling n_outputs states evenly.

    Nonzero t0 supports restarting from a snapshot.  Raises BlowUpError if
    the solution loses finiteness (the scaled system is only guaranteed to
    survive the horizon for small enough eps).
    """
    grid = v0.grid
    ctx = _NseContext(grid, params, hooks)
    comps = ctx.cleanup((v0[0].coeffs, v0[1].coeffs, w0.coeffs))
    if t0 >= params.t_end:
        raise ValueError("t0 must lie before t_end")
    targets = t0 + output_times(params.t_end - t0, n_outputs)
    account = EnergyAccount(weights=(1.0, 1.0, params.eps ** 2), vol=grid.vol)

    frames = [comps]
    account.record(t0, comps)
    max_div = NseState.from_arrays(grid, *comps).divergence_max()
    max_par = NseState.from_arrays(grid, *comps).parity_error_max()

    t = t0
    n_cur = ctx.stage_tendency(t, comps)
    steps = 0
    for target in targets[1:]:
        while t < target - 1e-12 * max(params.t_end, 1.0):
            steps += 1
            if steps > max_steps:
                raise RuntimeError(f"exceeded {max_steps} steps")
            dt = _resolve_dt(ctx, params, comps, remaining=target - t)
            if not np.isfinite(dt) or dt <= 0:
                raise ValueError("could not determine a positive time step")
            e_full, e_half = ctx.efac(dt)
            new = ifrk4_step(comps, n_cur, ctx.stage_tendency, t, dt,
                             e_full, e_half, kernels)
            new = ctx.cleanup(new)
            if not all(np.isfinite(c.view(np.float64)).all() for c in new):
                raise BlowUpError(t + dt)
            n_new = ctx.stage_tendency(t + dt, new)
            account.accumulate_step(comps, n_cur, new, n_new, dt)
            comps, n_cur = new, n_new
            t += dt
        t = float(target)
        frames.append(comps)
        account.record(t, comps)
        st = NseState.from_arrays(grid, *comps)
        max_div = max(max_div, st.divergence_max())
        max_par = max(max_par, st.parity_error_max())

    ts, es, ds = account.arrays()
    return NseRunResult(times=ts, frames=frames,
                        ledger=EnergyLedger(ts, es, ds),
                        params=params, grid=grid,
                        max_divergence=max_div, max_parity_error=max_par)
