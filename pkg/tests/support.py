"""Shared test machinery: manufactured solutions and finite-difference oracles.

The FD oracle discretizes the governing systems with second-order centered
differences (np.roll stencils) and solves its own pressure equation by exact
diagonalization of the circulant stencil; it shares no operator code with the
spectral path and converges to the true tendencies at O(h^2).
"""

import numpy as np
import scipy.fft as sfft

from hylm.spectral import Field, Parity, VectorField, field_from_function, phys_real


# ---------------------------------------------------------------- MMS

class ShearColumnMMS:
    """Exact solution (theta(t) cos(pi z), phi(t) cos x, 0) with forcing.

    The advection of the second component by the first is a closed-form
    single mode, cancelled by the forcing, so the ansatz stays exact while
    the nonlinear terms are genuinely exercised inside the RK stages.
    ``nu_z`` is the vertical viscosity (0 for the hydrostatic system).
    """

    def __init__(self, grid, nu_z, vertical_component=True):
        self.grid = grid
        self.nu_z = nu_z
        self.cpz = field_from_function(
            grid, lambda x, y, z: np.cos(np.pi * z), Parity.EVEN).coeffs
        self.cx = field_from_function(
            grid, lambda x, y, z: np.cos(x), Parity.EVEN).coeffs
        self.cpz_sx = field_from_function(
            grid, lambda x, y, z: np.cos(np.pi * z) * np.sin(x), Parity.EVEN).coeffs
        self.zero = np.zeros(grid.shape, dtype=np.complex128)
        self.vertical_component = vertical_component

    @staticmethod
    def theta(t):
        return 1.0 + 0.5 * np.sin(2.0 * t)

    @staticmethod
    def dtheta(t):
        return np.cos(2.0 * t)

    @staticmethod
    def phi(t):
        return 0.8 * np.cos(t)

    @staticmethod
    def dphi(t):
        return -0.8 * np.sin(t)

    def forcing(self, t):
        f1 = (self.dtheta(t) + self.nu_z * np.pi ** 2 * self.theta(t)) * self.cpz
        f2 = (self.dphi(t) + self.phi(t)) * self.cx \
            - self.theta(t) * self.phi(t) * self.cpz_sx
        if self.vertical_component:
            return (f1, f2, self.zero)
        return (f1, f2)

    def exact(self, t):
        comps = (self.theta(t) * self.cpz, self.phi(t) * self.cx)
        if self.vertical_component:
            return comps + (self.zero,)
        return comps

    def initial_fields(self):
        c = self.exact(0.0)
        v = VectorField((Field(self.grid, c[0], Parity.EVEN),
                         Field(self.grid, c[1], Parity.EVEN)))
        if self.vertical_component:
            return v, Field(self.grid, c[2], Parity.ODD)
        return v


def observed_orders(errors):
    e = np.asarray(errors)
    return np.log2(e[:-1] / e[1:])


# ---------------------------------------------------------------- FD oracle

def _d1(f, axis, h):
    return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)


def _d2(f, axis, h):
    return (np.roll(f, -1, axis) - 2.0 * f + np.roll(f, 1, axis)) / h ** 2


def _fd_symbols(n, h):
    k = np.arange(n)
    ang = 2.0 * np.pi * k / n
    return 1j * np.sin(ang) / h, (2.0 * np.cos(ang) - 2.0) / h ** 2


def fd_nse_rhs(grid, v1, v2, w, eps, alpha):
    """Second-order FD tendencies of the scaled system, physical space."""
    hx, hy, hz = grid.spacing()
    nu_z = eps ** (alpha - 2.0)

    def visc(f):
        return _d2(f, 0, hx) + _d2(f, 1, hy) + nu_z * _d2(f, 2, hz)

    def adv(f):
        return v1 * _d1(f, 0, hx) + v2 * _d1(f, 1, hy) + w * _d1(f, 2, hz)

    f1 = -adv(v1) + visc(v1)
    f2 = -adv(v2) + visc(v2)
    f3 = -adv(w) + visc(w)
    rhs = _d1(f1, 0, hx) + _d1(f2, 1, hy) + _d1(f3, 2, hz)

    s1x, s2x = _fd_symbols(grid.nx, hx)
    s1y, s2y = _fd_symbols(grid.ny, hy)
    s1z, s2z = _fd_symbols(grid.nz, hz)
    den = (s2x[:, None, None] + s2y[None, :, None]
           + s2z[None, None, :] / eps ** 2).astype(np.complex128)
    den[0, 0, 0] = 1.0
    p_hat = sfft.fftn(rhs) / den
    p_hat[0, 0, 0] = 0.0
    p = sfft.ifftn(p_hat).real
    return (f1 - _d1(p, 0, hx), f2 - _d1(p, 1, hy),
            f3 - _d1(p, 2, hz) / eps ** 2, p)


def fd_pe_rhs(grid, v1, v2):
    """Second-order FD tendency of the hydrostatic system, physical space.

    The vertical velocity comes from cumulative-trapezoid integration of the
    horizontal divergence; the surface pressure from the FD 2D Poisson solve
    on the vertically averaged tendency.
    """
    hx, hy, hz = grid.spacing()
    div_h = _d1(v1, 0, hx) + _d1(v2, 1, hy)
    w = np.zeros_like(div_h)
    acc = np.zeros_like(div_h[:, :, 0])
    for j in range(1, grid.nz):
        acc = acc + 0.5 * hz * (div_h[:, :, j - 1] + div_h[:, :, j])
        w[:, :, j] = -acc

    def adv(f):
        return v1 * _d1(f, 0, hx) + v2 * _d1(f, 1, hy) + w * _d1(f, 2, hz)

    f1 = -adv(v1) + _d2(v1, 0, hx) + _d2(v1, 1, hy)
    f2 = -adv(v2) + _d2(v2, 0, hx) + _d2(v2, 1, hy)
    rhs2d = _d1(f1.mean(axis=2), 0, hx) + _d1(f2.mean(axis=2), 1, hy)
    s1x, s2x = _fd_symbols(grid.nx, hx)
    s1y, s2y = _fd_symbols(grid.ny, hy)
    den = (s2x[:, None] + s2y[None, :]).astype(np.complex128)
    den[0, 0] = 1.0
    ps_hat = sfft.fftn(rhs2d) / den
    ps_hat[0, 0] = 0.0
    ps = sfft.ifftn(ps_hat).real
    return (f1 - _d1(ps, 0, hx)[:, :, None], f2 - _d1(ps, 1, hy)[:, :, None], ps)


def spectral_to_phys(coeffs):
    return phys_real(coeffs)
