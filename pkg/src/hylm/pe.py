"""Primitive-equations solver: horizontal viscosity only, hydrostatic pressure.

Only the horizontal velocity is prognostic.  The vertical velocity is a
diagnostic, reconstructed at every use from incompressibility by exact
vertical antidifferentiation, and the pressure is a two-dimensional surface
field determined from the vertically averaged momentum balance.  No vertical
dissipation is ever added; under-resolved runs must raise resolution instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .spectral import Field, Field2D, Grid, Parity, VectorField, parity_error, phys_real
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
    "PeParams", "PeState", "PeMonitor", "PeRunResult",
    "diagnose_w", "hydrostatic_boundary_residual", "barotropic_residual",
    "barotropic_project", "pe_rhs", "step_pe", "run_pe", "lm_monitor",
]

_INV_TOL = 1e-10


@dataclass(frozen=True)
class PeParams:
    t_end: float
    dt: float | None = None
    cfl_safety: float = 0.4
    dt_max: float = 5e-3

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


def _div_h(grid, c1, c2):
    return 1j * (grid.kx3 * c1 + grid.ky3 * c2)


def diagnose_w(v: VectorField) -> Field:
    """Vertical velocity from incompressibility: w = -int_{-1}^z div_H v.

    Exact per vertical mode; the z-mean of div_H v (nonzero only when the
    barotropic constraint is violated) is not periodically representable and
    is dropped — use ``hydrostatic_boundary_residual`` to report it.
    """
    g = v.grid
    d = _div_h(g, v[0].coeffs, v[1].coeffs)
    w = kernels.antiderive_z(d, g.inv_pil)
    return Field(g, w, Parity.ODD)


def hydrostatic_boundary_residual(v: VectorField) -> float:
    """max |w(z=+1)| implied by the data, i.e. the dropped z-mean of div_H v."""
    g = v.grid
    d0 = 1j * (g.kx[:, None] * v[0].coeffs[:, :, 0]
               + g.ky[None, :] * v[1].coeffs[:, :, 0])
    # evaluate -int_{-1}^{1} div_H v dz = -2 * (z-mean) pointwise on M
    vals = sfft.ifftn(-2.0 * d0, norm="forward").real
    return float(np.max(np.abs(vals)))


def barotropic_residual(grid, c1, c2) -> float:
    """Spectral max norm of div_H of the vertical average."""
    d0 = 1j * (grid.kx[:, None] * c1[:, :, 0] + grid.ky[None, :] * c2[:, :, 0])
    return float(np.max(np.abs(d0)))


def barotropic_project(grid, c1, c2):
    """Remove the curl-free part of the vertical average (2D Helmholtz).

    The baroclinic content (everything at nonzero vertical mode) is left
    untouched; afterwards div_H of the vertical average vanishes to round-off.
    """
    kx = grid.kx[:, None]
    ky = grid.ky[None, :]
    d0 = 1j * (kx * c1[:, :, 0] + ky * c2[:, :, 0])
    kh2 = kx ** 2 + ky ** 2
    kh2[0, 0] = 1.0
    phi = d0 / kh2  # solves lap phi = d0 up to sign folded below
    phi[0, 0] = 0.0
    o1 = c1.copy()
    o2 = c2.copy()
    o1[:, :, 0] = c1[:, :, 0] + 1j * kx * phi
    o2[:, :, 0] = c2[:, :, 0] + 1j * ky * phi
    return o1, o2


@dataclass(frozen=True)
class PeState:
    """Horizontal velocity (even in z) plus the diagnostic surface pressure."""

    v: VectorField
    t: float
    p_s: Field2D | None = None

    @property
    def grid(self) -> Grid:
        return self.v.grid

    def coeffs(self):
        return (self.v[0].coeffs, self.v[1].coeffs)

    def barotropic_residual(self) -> float:
        return barotropic_residual(self.grid, *self.coeffs())

    def parity_error_max(self) -> float:
        return max(parity_error(self.v[0]), parity_error(self.v[1]))

    def check_invariants(self, tol=_INV_TOL):
        b = self.barotropic_residual()
        if b > tol:
            raise ValueError(f"state violates the barotropic constraint "
                             f"({b:.3e} > {tol:.1e})")
        p = self.parity_error_max()
        if p > tol:
            raise ValueError(f"state violates the parity constraint "
                             f"({p:.3e} > {tol:.1e})")

    @classmethod
    def from_arrays(cls, grid, c1, c2, t=0.0, p_s=None):
        v = VectorField((Field(grid, c1, Parity.EVEN), Field(grid, c2, Parity.EVEN)))
        return cls(v, t, p_s)


@dataclass
class PeMonitor:
    """Norm time series: H1 of v, H1 of grad_H v, and the L^m shear monitor."""

    m: float
    t: np.ndarray
    v_h1: np.ndarray
    grad_h_v_h1: np.ndarray
    dz_v_lm: np.ndarray

    @property
    def dz_v_lm_ratio(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.dz_v_lm / self.dz_v_lm[0]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "v_h1", "grad_h_v_h1", "dz_v_lm", "dz_v_lm_ratio"])
            for row in zip(self.t, self.v_h1, self.grad_h_v_h1,
                           self.dz_v_lm, self.dz_v_lm_ratio):
                wr.writerow([f"{x:.17g}" for x in row])


@dataclass
class PeRunResult:
    times: np.ndarray
    frames: list             # per output time: (c_v1, c_v2) spectral arrays
    ledger_t: np.ndarray
    ledger_E: np.ndarray
    ledger_D: np.ndarray
    monitor: PeMonitor
    params: PeParams
    grid: Grid
    max_barotropic: float
    max_parity_error: float
    max_drift_before_projection: float

    def state(self, i) -> PeState:
        return PeState.from_arrays(self.grid, *self.frames[i], t=self.times[i])

    def identity_residuals(self):
        """(E + D - E0)/E0: the discrete balance of the decay identity."""
        e0 = self.ledger_E[0]
        return (self.ledger_E + self.ledger_D - e0) / max(e0, 1e-300)

    def physical_frames(self):
        for t, comps in zip(self.times, self.frames):
            yield t, tuple(phys_real(c) for c in comps)


class _PeContext:
    def __init__(self, grid: Grid, hooks: Hooks | None):
        self.grid = grid
        self.hooks = hooks or Hooks()
        self.lam = grid.kh2
        kx = grid.kx[:, None]
        ky = grid.ky[None, :]
        kh2 = kx ** 2 + ky ** 2
        kh2[0, 0] = 1.0
        self.inv_kh2_2d = 1.0 / kh2
        self.inv_kh2_2d[0, 0] = 0.0
        self._efac_cache = {}

    def efac(self, dt):
        got = self._efac_cache.get(dt)
        if got is None:
            got = (np.exp(-self.lam * dt), np.exp(-self.lam * 0.5 * dt))
            if len(self._efac_cache) > 8:
                self._efac_cache.clear()
            self._efac_cache[dt] = got
        return got

    def velocity(self, comps):
        """(physical u1, u2, w) with w reconstructed diagnostically."""
        g = self.grid
        c1, c2 = comps
        w = kernels.antiderive_z(_div_h(g, c1, c2), g.inv_pil)
        return tuple(phys_real(c) for c in (c1, c2, w))

    def advection(self, comps):
        g = self.grid
        u = self.velocity(comps)
        ks = (g.kx3, g.ky3, g.kz3)
        m = g.dealias01
        prods = {}
        for i in range(3):
            for j in range(min(i + 1, 2)):
                prods[i, j] = sfft.fftn(u[i] * u[j], norm="forward")
        prods[0, 1] = prods[1, 0]
        out = []
        for j, c in enumerate(comps):
            gx, gy, gz = (phys_real(kernels.mul_ik(c, k)) for k in ks)
            conv = sfft.fftn(kernels.dot3(*u, gx, gy, gz), norm="forward")
            out.append(kernels.skew_combine(conv, prods[0, j], prods[1, j],
                                            prods[2, j], *ks, m))
        return tuple(out)

    def surface_pressure(self, f1, f2):
        """p_s making the vertical average of (f1, f2) divergence free."""
        g = self.grid
        kx = g.kx[:, None]
        ky = g.ky[None, :]
        rhs = 1j * (kx * f1[:, :, 0] + ky * f2[:, :, 0])
        return -rhs * self.inv_kh2_2d

    def stage_tendency(self, t, comps):
        if self.hooks.advection:
            f = list(self.advection(comps))
        else:
            f = [np.zeros(self.grid.shape, dtype=np.complex128) for _ in range(2)]
        if self.hooks.forcing is not None:
            for i, fc in enumerate(self.hooks.forcing(t)):
                f[i] = f[i] + fc * self.grid.dealias01
        ps = self.surface_pressure(f[0], f[1])
        kx = self.grid.kx[:, None]
        ky = self.grid.ky[None, :]
        f[0][:, :, 0] -= 1j * kx * ps
        f[1][:, :, 0] -= 1j * ky * ps
        return tuple(f), ps

    def stage_tendency_only(self, t, comps):
        return self.stage_tendency(t, comps)[0]

    def full_rhs(self, t, comps):
        """Tendency including horizontal diffusion, plus the surface pressure."""
        if self.hooks.advection:
            f = list(self.advection(comps))
        else:
            f = [np.zeros(self.grid.shape, dtype=np.complex128) for _ in range(2)]
        if self.hooks.forcing is not None:
            for i, fc in enumerate(self.hooks.forcing(t)):
                f[i] = f[i] + fc * self.grid.dealias01
        for i in range(2):
            f[i] = f[i] - self.lam * comps[i]
        ps = self.surface_pressure(f[0], f[1])
        kx = self.grid.kx[:, None]
        ky = self.grid.ky[None, :]
        f[0][:, :, 0] -= 1j * kx * ps
        f[1][:, :, 0] -= 1j * ky * ps
        return tuple(f), ps

    def cleanup(self, comps, track=None):
        c1 = kernels.parity_project_z(comps[0], 1.0)
        c2 = kernels.parity_project_z(comps[1], 1.0)
        if track is not None:
            track.append(barotropic_residual(self.grid, c1, c2))
        return barotropic_project(self.grid, c1, c2)

    def cfl_dt(self, comps):
        u = self.velocity(comps)
        speeds = tuple(float(np.max(np.abs(p))) for p in u)
        return cfl_bound(speeds, self.grid.spacing())


def pe_rhs(state: PeState, hooks: Hooks | None = None):
    """Tendency of the horizontal velocity plus the surface pressure.

    The vertical average of the returned tendency is discretely divergence
    free, so stepping preserves the barotropic constraint.
    """
    state.check_invariants()
    ctx = _PeContext(state.grid, hooks)
    (f1, f2), ps = ctx.full_rhs(state.t, state.coeffs())
    g = state.grid
    tend = VectorField((Field(g, f1, Parity.EVEN), Field(g, f2, Parity.EVEN)))
    return tend, Field2D(g, ps)


def lm_monitor(state: PeState, m: float) -> float:
    """L^m(Omega) norm of the vertical shear d_z v by grid quadrature."""
    if m <= 2:
        raise ValueError("the shear monitor needs an exponent m > 2")
    g = state.grid
    mag2 = None
    for c in state.coeffs():
        dz = phys_real(1j * g.kz3 * c)
        mag2 = dz * dz if mag2 is None else mag2 + dz * dz
    cell = g.vol / g.n_modes
    return float((np.sum(mag2 ** (m / 2.0)) * cell) ** (1.0 / m))


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


def step_pe(state: PeState, dt: float, hooks: Hooks | None = None,
            cfl_safety: float = 1.0) -> PeState:
    """Advance one step of size dt (validated against the advective CFL)."""
    state.check_invariants()
    if dt <= 0:
        raise ValueError("dt must be positive")
    ctx = _PeContext(state.grid, hooks)
    comps = state.coeffs()
    bound = ctx.cfl_dt(comps)
    if dt > cfl_safety * bound + 1e-15:
        raise CflError(f"dt={dt:.3e} exceeds cfl_safety*bound="
                       f"{cfl_safety * bound:.3e}")
    e_full, e_half = ctx.efac(dt)
    n1 = ctx.stage_tendency_only(state.t, comps)
    new = ifrk4_step(comps, n1, ctx.stage_tendency_only, state.t, dt,
                     e_full, e_half, kernels)
    new = ctx.cleanup(new)
    if not all(np.isfinite(c.view(np.float64)).all() for c in new):
        raise BlowUpError(state.t + dt)
    (_, _), ps = ctx.full_rhs(state.t + dt, new)
    return PeState.from_arrays(state.grid, *new, t=state.t + dt,
                               p_s=Field2D(state.grid, ps))


def _h1_norms(grid, comps):
    h1w = 1.0 + grid.k2
    gw = grid.kh2 * h1w
    s_v = sum(kernels.weighted_sumsq(c, h1w) for c in comps)
    s_g = sum(kernels.weighted_sumsq(c, gw) for c in comps)
    return np.sqrt(grid.vol * s_v), np.sqrt(grid.vol * s_g)


def run_pe(v0: VectorField, params: PeParams, n_outputs=50,
           hooks: Hooks | None = None, lm_exponent=4.0,
           max_steps=1_000_000, t0: float = 0.0) -> PeRunResult:
    """Integrate the horizontal velocity from t=t0 to t_end.

    Nonzero t0 supports restarting from a snapshot.
    """
    grid = v0.grid
    ctx = _PeContext(grid, hooks)
    drift = []
    comps = ctx.cleanup((v0[0].coeffs, v0[1].coeffs))
    if t0 >= params.t_end:
        raise ValueError("t0 must lie before t_end")
    targets = t0 + output_times(params.t_end - t0, n_outputs)
    account = EnergyAccount(weights=(1.0, 1.0), vol=grid.vol)

    mon_t, mon_h1, mon_gh1, mon_lm = [], [], [], []

    def observe(t, comps):
        account.record(t, comps)
        h1, gh1 = _h1_norms(grid, comps)
        mon_t.append(t)
        mon_h1.append(h1)
        mon_gh1.append(gh1)
        mon_lm.append(lm_monitor(PeState.from_arrays(grid, *comps), lm_exponent))

    frames = [comps]
    observe(t0, comps)
    st0 = PeState.from_arrays(grid, *comps)
    max_bar = st0.barotropic_residual()
    max_par = st0.parity_error_max()

    t = t0
    n_cur = ctx.stage_tendency_only(t, comps)
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
            new = ifrk4_step(comps, n_cur, ctx.stage_tendency_only, t, dt,
                             e_full, e_half, kernels)
            new = ctx.cleanup(new, track=drift)
            if not all(np.isfinite(c.view(np.float64)).all() for c in new):
                raise BlowUpError(t + dt)
            n_new = ctx.stage_tendency_only(t + dt, new)
            account.accumulate_step(comps, n_cur, new, n_new, dt)
            comps, n_cur = new, n_new
            t += dt
        t = float(target)
        frames.append(comps)
        observe(t, comps)
        st = PeState.from_arrays(grid, *comps)
        max_bar = max(max_bar, st.barotropic_residual())
        max_par = max(max_par, st.parity_error_max())

    ts, es, ds = account.arrays()
    monitor = PeMonitor(m=lm_exponent, t=np.asarray(mon_t),
                        v_h1=np.asarray(mon_h1),
                        grad_h_v_h1=np.asarray(mon_gh1),
                        dz_v_lm=np.asarray(mon_lm))
    return PeRunResult(times=ts, frames=frames, ledger_t=ts, ledger_E=es,
                       ledger_D=ds, monitor=monitor, params=params, grid=grid,
                       max_barotropic=max_bar, max_parity_error=max_par,
                       max_drift_before_projection=max(drift) if drift else 0.0)
