"""Periodic spectral representation on the box (0,l1) x (0,l2) x (-1,1).

Fields live on a full-FFT grid with axes ordered (x, y, z); the vertical
direction has period 2, so its wavenumbers are pi times the signed integer
mode index.  Vertical symmetry (even/odd about z = 0) is tracked per field
and enforced by projection; the reflection z -> -z acts on grid indices as
j -> (nz - j) mod nz, identically in physical and coefficient space.

Coefficients use the forward-normalized convention: ``coeffs = fftn(f)/N``,
so each entry is the amplitude of exp(i k.x) with x measured from the grid
origin (x=y=0, z=-1), and Parseval reads  int |f|^2 dV = vol * sum |c|^2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels


class Parity(enum.Enum):
    """Symmetry class under z -> -z."""

    EVEN = 1
    ODD = -1

    @property
    def sign(self):
        return float(self.value)

    def flip(self):
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN

    def xor(self, other):
        return Parity.EVEN if self is other else Parity.ODD


class Space(enum.Enum):
    SPECTRAL = "spectral"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class Grid:
    """Wavenumber tables and masks for one resolution.

    Mode counts must be even and at least 4; the horizontal wavenumbers are
    2*pi*n/l, the vertical ones pi*l, both in standard FFT ordering
    (0, 1, ..., N/2-1, -N/2, ..., -1).  ``dealias_mask`` zeros every mode
    with any index magnitude above N/3 (which includes the Nyquist slots).
    """

    nx: int
    ny: int
    nz: int
    l1: float
    l2: float

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n % 2 != 0 or n < 4:
                raise ValueError(f"{name}={n}: mode counts must be even and >= 4")
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("box lengths must be positive")

        def modes(n):
            return np.fft.fftfreq(n, d=1.0 / n).astype(np.float64)

        mx, my, mz = modes(self.nx), modes(self.ny), modes(self.nz)
        set_ = object.__setattr__
        set_(self, "kx", 2.0 * np.pi * mx / self.l1)
        set_(self, "ky", 2.0 * np.pi * my / self.l2)
        set_(self, "kz", np.pi * mz)

        shape = (self.nx, self.ny, self.nz)
        set_(self, "shape", shape)
        set_(self, "n_modes", self.nx * self.ny * self.nz)
        set_(self, "vol", self.l1 * self.l2 * 2.0)

        kx3 = np.ascontiguousarray(np.broadcast_to(self.kx[:, None, None], shape))
        ky3 = np.ascontiguousarray(np.broadcast_to(self.ky[None, :, None], shape))
        kz3 = np.ascontiguousarray(np.broadcast_to(self.kz[None, None, :], shape))
        set_(self, "kx3", kx3)
        set_(self, "ky3", ky3)
        set_(self, "kz3", kz3)
        set_(self, "kh2", kx3 ** 2 + ky3 ** 2)
        set_(self, "kz2", kz3 ** 2)
        set_(self, "k2", self.kh2 + self.kz2)

        keep = ((np.abs(mx)[:, None, None] <= self.nx / 3)
                & (np.abs(my)[None, :, None] <= self.ny / 3)
                & (np.abs(mz)[None, None, :] <= self.nz / 3))
        set_(self, "dealias_mask", keep)
        set_(self, "dealias01", keep.astype(np.float64))

        nyq = np.ones(shape)
        nyq[self.nx // 2, :, :] = 0.0
        nyq[:, self.ny // 2, :] = 0.0
        nyq[:, :, self.nz // 2] = 0.0
        set_(self, "nyquist01", nyq)

        inv_pil = np.zeros(self.nz)
        inv_pil[1:] = 1.0 / (np.pi * mz[1:])
        set_(self, "inv_pil", inv_pil)

        set_(self, "x", np.arange(self.nx) * (self.l1 / self.nx))
        set_(self, "y", np.arange(self.ny) * (self.l2 / self.ny))
        set_(self, "z", -1.0 + np.arange(self.nz) * (2.0 / self.nz))

        for arr in (kx3, ky3, kz3, self.kh2, self.kz2, self.k2, self.dealias01,
                    nyq, inv_pil, self.x, self.y, self.z):
            arr.flags.writeable = False

    def mesh(self):
        """Physical coordinate arrays X, Y, Z with shape (nx, ny, nz)."""
        return np.meshgrid(self.x, self.y, self.z, indexing="ij")

    def spacing(self):
        """Grid spacings (dx, dy, dz)."""
        return self.l1 / self.nx, self.l2 / self.ny, 2.0 / self.nz

    def aniso_inv_den(self, eps):
        """1/(kx^2 + ky^2 + kz^2/eps^2) with the mean slot zeroed."""
        den = self.kh2 + self.kz2 / eps ** 2
        den[0, 0, 0] = 1.0  # placeholder; slot is zeroed below
        inv = 1.0 / den
        inv[0, 0, 0] = 0.0
        return inv

    def compatible(self, other):
        return (self.shape == other.shape
                and self.l1 == other.l1 and self.l2 == other.l2)


def make_grid(nx, ny, nz, l1=2.0 * np.pi, l2=2.0 * np.pi) -> Grid:
    """Construct a Grid, validating mode counts and box lengths."""
    return Grid(int(nx), int(ny), int(nz), float(l1), float(l2))


def phys_real(coeffs):
    """Physical-space values of one coefficient array, C-contiguous f64."""
    return np.ascontiguousarray(sfft.ifftn(coeffs, norm="forward").real)


@dataclass(frozen=True)
class Field:
    """Scalar field: complex coefficients (spectral) or real values (physical)."""

    grid: Grid
    coeffs: np.ndarray
    parity: Parity
    space: Space = Space.SPECTRAL

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(f"field shape {self.coeffs.shape} does not match "
                             f"grid shape {self.grid.shape}")
        want = np.complex128 if self.space is Space.SPECTRAL else np.float64
        if self.coeffs.dtype != want:
            object.__setattr__(self, "coeffs", self.coeffs.astype(want))
        arr = np.ascontiguousarray(self.coeffs)
        object.__setattr__(self, "coeffs", arr)
        arr.flags.writeable = False

    def with_coeffs(self, coeffs, parity=None, space=None):
        return Field(self.grid, coeffs,
                     self.parity if parity is None else parity,
                     self.space if space is None else space)


@dataclass(frozen=True)
class VectorField:
    """Two horizontal (even) components, optionally plus a vertical odd one."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) not in (2, 3):
            raise ValueError("vector fields have 2 or 3 components")
        g = comps[0].grid
        for c in comps[1:]:
            if c.grid is not g and not c.grid.compatible(g):
                raise ValueError("vector field components on mismatched grids")
        for c in comps[:2]:
            if c.parity is not Parity.EVEN:
                raise ValueError("horizontal components must be even in z")
        if len(comps) == 3 and comps[2].parity is not Parity.ODD:
            raise ValueError("vertical component must be odd in z")
        object.__setattr__(self, "components", comps)

    @property
    def grid(self):
        return self.components[0].grid

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)


class ToSpectral:
    """Direction marker for ``transform``."""


class ToPhysical:
    """Direction marker for ``transform``."""


def field_from_function(grid, fn, parity, dealias=False) -> Field:
    """Sample fn(X, Y, Z) on the grid and transform to spectral space."""
    x, y, z = grid.mesh()
    values = np.asarray(fn(x, y, z), dtype=np.float64)
    values = np.ascontiguousarray(np.broadcast_to(values, grid.shape))
    f = transform(Field(grid, values, parity, Space.PHYSICAL), ToSpectral)
    if dealias:
        f = f.with_coeffs(f.coeffs * grid.dealias01)
    return f


def zero_field(grid, parity) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.complex128), parity)


def transform(f: Field, direction) -> Field:
    """Move a field between physical and spectral space.

    Nyquist slots are always zeroed on the way into spectral space; the
    round trip is the identity (to round-off) for band-limited input.
    """
    if direction is ToSpectral or direction is Space.SPECTRAL:
        if f.space is not Space.PHYSICAL:
            raise ValueError("transform to spectral expects a physical-space field")
        c = sfft.fftn(f.coeffs, norm="forward") * f.grid.nyquist01
        return Field(f.grid, c, f.parity, Space.SPECTRAL)
    if direction is ToPhysical or direction is Space.PHYSICAL:
        if f.space is not Space.SPECTRAL:
            raise ValueError("transform to physical expects a spectral-space field")
        v = sfft.ifftn(f.coeffs, norm="forward").real
        return Field(f.grid, v, f.parity, Space.PHYSICAL)
    raise ValueError(f"unknown transform direction {direction!r}")


def _require_spectral(f: Field, op):
    if f.space is not Space.SPECTRAL:
        raise ValueError(f"{op} requires a spectral-space field")


def grad_h(f: Field):
    """Horizontal gradient (d/dx, d/dy); preserves parity."""
    _require_spectral(f, "grad_h")
    fx = f.with_coeffs(1j * f.grid.kx3 * f.coeffs)
    fy = f.with_coeffs(1j * f.grid.ky3 * f.coeffs)
    return fx, fy


def d_z(f: Field) -> Field:
    """Vertical derivative; flips parity."""
    _require_spectral(f, "d_z")
    return f.with_coeffs(1j * f.grid.kz3 * f.coeffs, parity=f.parity.flip())


def laplacian_h(f: Field) -> Field:
    """Horizontal Laplacian; preserves parity."""
    _require_spectral(f, "laplacian_h")
    return f.with_coeffs(-f.grid.kh2 * f.coeffs)


def multiply_dealiased(f: Field, g: Field) -> Field:
    """Pointwise product with the 2/3 mask applied before and after.

    The product parity is the xor of the input parities.
    """
    _require_spectral(f, "multiply_dealiased")
    _require_spectral(g, "multiply_dealiased")
    if not f.grid.compatible(g.grid):
        raise ValueError("multiply_dealiased requires fields on one grid")
    m = f.grid.dealias01
    pf = sfft.ifftn(f.coeffs * m, norm="forward").real
    pg = sfft.ifftn(g.coeffs * m, norm="forward").real
    c = sfft.fftn(pf * pg, norm="forward") * m
    return Field(f.grid, c, f.parity.xor(g.parity), Space.SPECTRAL)


def parity_project(f: Field, p: Parity) -> Field:
    """Stated-parity part of f (idempotent)."""
    _require_spectral(f, "parity_project")
    return Field(f.grid, kernels.parity_project_z(f.coeffs, p.sign), p, Space.SPECTRAL)


def parity_error(f: Field) -> float:
    """Coefficient l2 norm of the part violating the field's declared parity."""
    _require_spectral(f, "parity_error")
    bad = kernels.parity_project_z(f.coeffs, -f.parity.sign)
    return float(np.linalg.norm(bad))


def divergence(v: VectorField) -> Field:
    """Spectral divergence of a 3-component vector field (even in z)."""
    if len(v) != 3:
        raise ValueError("divergence needs a 3-component field")
    g = v.grid
    c = kernels.div_spectral(v[0].coeffs, v[1].coeffs, v[2].coeffs,
                             g.kx3, g.ky3, g.kz3)
    return Field(g, c, Parity.EVEN, Space.SPECTRAL)


def divergence_h(v: VectorField) -> Field:
    """Horizontal divergence of the first two components."""
    g = v.grid
    c = 1j * (g.kx3 * v[0].coeffs + g.ky3 * v[1].coeffs)
    return Field(g, c, v[0].parity, Space.SPECTRAL)


def _check_zero_mean(coeffs, what):
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if abs(coeffs.flat[0]) > 1e-12 * scale:
        raise ValueError(f"{what}: right-hand side has a nonzero mean mode "
                         "(zero-mean gauge violated)")


def solve_aniso_poisson(rhs: Field, eps: float) -> Field:
    """Solve (Lap_H + eps^-2 d_z^2) p = rhs with zero-mean gauge."""
    _require_spectral(rhs, "solve_aniso_poisson")
    if eps <= 0:
        raise ValueError("aspect ratio eps must be positive")
    _check_zero_mean(rhs.coeffs, "solve_aniso_poisson")
    p = -rhs.coeffs * rhs.grid.aniso_inv_den(eps)
    return Field(rhs.grid, p, rhs.parity, Space.SPECTRAL)


@dataclass(frozen=True)
class Field2D:
    """Spectral scalar on the horizontal box M, used by the surface pressure."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("2d field shape does not match grid")
        arr = np.ascontiguousarray(self.coeffs.astype(np.complex128))
        object.__setattr__(self, "coeffs", arr)
        arr.flags.writeable = False


def solve_poisson_2d(rhs: Field2D) -> Field2D:
    """Solve Lap_H p = rhs on M with zero-mean gauge."""
    _check_zero_mean(rhs.coeffs, "solve_poisson_2d")
    g = rhs.grid
    kh2 = g.kx[:, None] ** 2 + g.ky[None, :] ** 2
    kh2[0, 0] = 1.0
    p = -rhs.coeffs / kh2
    p[0, 0] = 0.0
    return Field2D(g, p)


def norm_l2_sq(f: Field) -> float:
    """Squared L2(Omega) norm by Parseval."""
    _require_spectral(f, "norm_l2_sq")
    c = f.coeffs
    return f.grid.vol * float(np.sum(c.real ** 2 + c.imag ** 2))


def vector_norm_l2_sq(v: VectorField) -> float:
    return sum(norm_l2_sq(c) for c in v.components)
