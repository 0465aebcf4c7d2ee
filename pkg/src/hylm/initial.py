"""Admissible, well-prepared initial data shared by both solvers.

Admissible horizontal data are even in z with a divergence-free vertical
average; the vertical component is then induced, never free.  Random data
are band-limited with an isotropic power-law spectrum whose steepness
encodes the smoothness class, and are rescaled to hit an exact Sobolev norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .pe import barotropic_project, diagnose_w
from .spectral import Field, Grid, Parity, VectorField, field_from_function

__all__ = [
    "DataSpec", "project_admissible", "make_well_prepared", "make_random",
    "build_initial_data", "sobolev_norm_sq", "ANALYTIC_KINDS",
]

# spectrum steepness per smoothness class, applied before rescaling
_DECAY = {"H1": 3.0, "H2": 4.0}

ANALYTIC_KINDS = ("taylor_green", "baroclinic_cos")


@dataclass(frozen=True)
class DataSpec:
    """What initial data to build and which norm class the run reports.

    kind: 'random' or one of ANALYTIC_KINDS.  For random data the seed,
    band limit and either an H1 or H2 norm target apply; ``amplitude``
    scales analytic data and seeds the random spectrum before rescaling.
    """

    kind: str = "random"
    smoothness_class: str = "H2"
    seed: int = 0
    max_mode: int = 5
    amplitude: float = 1.0
    h1_target: float | None = None
    h2_target: float | None = None

    def __post_init__(self):
        if self.kind != "random" and self.kind not in ANALYTIC_KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.smoothness_class not in _DECAY:
            raise ValueError("smoothness_class must be 'H1' or 'H2'")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.max_mode < 1:
            raise ValueError("max_mode must be at least 1")
        if self.h1_target is not None and self.h2_target is not None:
            raise ValueError("give at most one of h1_target / h2_target")

    @property
    def norm_target(self):
        if self.h1_target is not None:
            return 1, self.h1_target
        if self.h2_target is not None:
            return 2, self.h2_target
        return None


def sobolev_norm_sq(v: VectorField, order: int) -> float:
    """Squared H^order norm (order 0, 1 or 2) of a vector field, by Parseval."""
    g = v.grid
    if order == 0:
        w = np.ones(g.shape)
    elif order == 1:
        w = 1.0 + g.k2
    elif order == 2:
        w = 1.0 + g.k2 + g.k2 ** 2
    else:
        raise ValueError("order must be 0, 1 or 2")
    return g.vol * sum(kernels.weighted_sumsq(c.coeffs, w) for c in v.components)


def project_admissible(v_raw: VectorField) -> VectorField:
    """Even-project both components and fix the barotropic constraint.

    The curl-free part of the vertical average is removed by a 2D Helmholtz
    decomposition; the baroclinic part passes through untouched.  Idempotent.
    """
    if len(v_raw) != 2:
        raise ValueError("admissible projection acts on 2-component data")
    g = v_raw.grid
    c1 = kernels.parity_project_z(v_raw[0].coeffs, 1.0)
    c2 = kernels.parity_project_z(v_raw[1].coeffs, 1.0)
    c1, c2 = barotropic_project(g, c1, c2)
    return VectorField((Field(g, c1, Parity.EVEN), Field(g, c2, Parity.EVEN)))


def make_well_prepared(v0: VectorField):
    """(v0, w0) with the vertical velocity induced by incompressibility."""
    from .pe import barotropic_residual

    g = v0.grid
    bad = barotropic_residual(g, v0[0].coeffs, v0[1].coeffs)
    if bad > 1e-10:
        raise ValueError(f"initial data are not admissible: barotropic "
                         f"residual {bad:.3e}; run project_admissible first")
    w0 = diagnose_w(v0)
    return v0, w0


def make_random(spec: DataSpec, grid: Grid) -> VectorField:
    """Deterministic random band-limited admissible data.

    Identical (seed, spec, grid) give bitwise-identical coefficients.
    """
    if spec.kind != "random":
        raise ValueError("make_random needs a random-kind spec")
    if spec.max_mode > min(grid.nx, grid.ny, grid.nz) / 3:
        raise ValueError(f"max_mode {spec.max_mode} exceeds N/3 for this grid")
    rng = np.random.default_rng(spec.seed)
    s = _DECAY[spec.smoothness_class]
    decay = (1.0 + np.sqrt(grid.k2)) ** (-s)
    band = np.ones(grid.shape)
    for axis, n in enumerate(grid.shape):
        modes = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        sl = [None, None, None]
        sl[axis] = slice(None)
        band = band * (modes[tuple(sl)] <= spec.max_mode)
    comps = []
    for _ in range(2):
        noise = rng.standard_normal(grid.shape)
        c = sfft.fftn(noise, norm="forward") * decay * band * grid.nyquist01
        comps.append(Field(grid, spec.amplitude * c, Parity.EVEN))
    v = project_admissible(VectorField(tuple(comps)))

    target = spec.norm_target
    if target is not None:
        order, value = target
        have = np.sqrt(sobolev_norm_sq(v, order))
        if have < 1e-14:
            raise ValueError("projected field vanished; the norm target is "
                             "unreachable for this seed/band")
        scale = value / have
        v = VectorField(tuple(
            Field(grid, scale * c.coeffs, Parity.EVEN) for c in v.components))
    return v


def _analytic(spec: DataSpec, grid: Grid) -> VectorField:
    a = spec.amplitude
    if spec.kind == "taylor_green":
        kx = 2.0 * np.pi / grid.l1
        ky = 2.0 * np.pi / grid.l2
        v1 = field_from_function(
            grid, lambda x, y, z: a * np.cos(kx * x) * np.sin(ky * y), Parity.EVEN)
        v2 = field_from_function(
            grid, lambda x, y, z: -a * (kx / ky) * np.sin(kx * x) * np.cos(ky * y),
            Parity.EVEN)
        return VectorField((v1, v2))
    if spec.kind == "baroclinic_cos":
        kx = 2.0 * np.pi / grid.l1
        v1 = field_from_function(
            grid, lambda x, y, z: a * np.cos(kx * x) * np.cos(np.pi * z),
            Parity.EVEN)
        v2 = field_from_function(grid, lambda x, y, z: np.zeros_like(x),
                                 Parity.EVEN)
        return VectorField((v1, v2))
    raise ValueError(f"unknown analytic kind {spec.kind!r}")


def build_initial_data(spec: DataSpec, grid: Grid):
    """Full pipeline: construct, project admissible, induce w0."""
    if spec.kind == "random":
        v0 = make_random(spec, grid)
    else:
        v0 = project_admissible(_analytic(spec, grid))
    return make_well_prepared(v0)
