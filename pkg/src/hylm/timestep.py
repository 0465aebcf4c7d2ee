"""Integrating-factor Runge-Kutta time stepping shared by both solvers.

The state is a tuple of spectral coefficient arrays that all share one
diagonal damping symbol lambda(k); the stiff linear part is applied through
exact exponential factors, the remaining tendency explicitly inside the
four classical RK stages (formal order four).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class BlowUpError(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, t, detail=""):
        self.t = t
        super().__init__(f"solution lost finiteness at t={t:.6g}"
                         + (f" ({detail})" if detail else ""))


class CflError(ValueError):
    """Requested time step exceeds the advective CFL bound."""


@dataclass
class Hooks:
    """Test-only switches: production runs use the defaults."""

    advection: bool = True
    forcing: object = None  # callable t -> tuple of spectral tendency arrays


@dataclass
class DtPolicy:
    """Fixed step when ``dt`` is set; otherwise CFL-limited adaptive."""

    dt: float | None = None
    cfl_safety: float = 0.4
    dt_max: float = 5e-3

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


def cfl_bound(umaxes, spacings):
    """min over directions of (grid spacing / max speed); inf for rest."""
    bound = np.inf
    for umax, h in zip(umaxes, spacings):
        if umax > 0:
            bound = min(bound, h / umax)
    return bound


def ifrk4_step(comps, n1, nfunc, t, dt, e_full, e_half, kern):
    """One integrating-factor RK4 step.

    ``n1`` is the explicit tendency at (t, comps); the tendency at the end
    state is NOT computed here (callers evaluate it once and reuse it as the
    next step's ``n1``).  Returns the new component tuple.
    """
    half = 0.5 * dt
    k1 = tuple(kern.stage_a(u, n, e_half, half) for u, n in zip(comps, n1))
    n2 = nfunc(t + half, k1)
    k2 = tuple(kern.stage_b(u, n, e_half, half) for u, n in zip(comps, n2))
    n3 = nfunc(t + half, k2)
    k3 = tuple(kern.stage_c(u, n, e_full, e_half, dt) for u, n in zip(comps, n3))
    n4 = nfunc(t + dt, k3)
    return tuple(kern.rk_final(u, a, b, c, d, e_full, e_half, dt)
                 for u, a, b, c, d in zip(comps, n1, n2, n3, n4))


def output_times(t_end, n_outputs):
    """Evenly spaced sample times including 0 and t_end."""
    if n_outputs < 2:
        raise ValueError("need at least two output times")
    if t_end <= 0:
        raise ValueError("horizon must be positive")
    return np.linspace(0.0, t_end, n_outputs)


@dataclass
class EnergyAccount:
    """Discrete energy/dissipation bookkeeping along a run.

    ``E`` is the weighted squared L2 norm of the state; ``D`` accumulates
    twice the weighted dissipation integral via the per-step identity
    dE/dt = -rate + 2<u, N>, whose quadrature is exact under pure diffusion
    and second-order accurate otherwise.
    """

    weights: tuple  # per-component scalar multiplying vol*sum|c|^2
    vol: float
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    dissipations: list = field(default_factory=list)
    _d_acc: float = 0.0

    def energy(self, comps):
        return self.vol * sum(
            w * float(np.sum(c.real ** 2 + c.imag ** 2))
            for w, c in zip(self.weights, comps))

    def _power(self, comps, tend):
        return 2.0 * self.vol * sum(
            w * float(np.vdot(c, n).real)
            for w, c, n in zip(self.weights, comps, tend))

    def accumulate_step(self, comps0, n0, comps1, n1, dt):
        e0 = self.energy(comps0)
        e1 = self.energy(comps1)
        self._d_acc += (e0 - e1) + 0.5 * dt * (self._power(comps0, n0)
                                               + self._power(comps1, n1))

    def record(self, t, comps):
        self.times.append(t)
        self.energies.append(self.energy(comps))
        self.dissipations.append(self._d_acc)

    def arrays(self):
        return (np.asarray(self.times), np.asarray(self.energies),
                np.asarray(self.dissipations))
