"""Reference numpy implementations of the hot per-step kernels.

Every function here has a signature-identical compiled twin in
``_compiled.pyx``; the backend is chosen once at import time by
``hylm.kernels``.  Arrays are C-contiguous, shape (nx, ny, nz), complex128
for spectral data and float64 for physical data and multiplier tables.
"""

import numpy as np


def dot2(a1, a2, b1, b2):
    """a1*b1 + a2*b2, pointwise (physical space)."""
    return a1 * b1 + a2 * b2


def dot3(a1, a2, a3, b1, b2, b3):
    """a1*b1 + a2*b2 + a3*b3, pointwise (physical space)."""
    return a1 * b1 + a2 * b2 + a3 * b3


def div_spectral(c1, c2, c3, kx, ky, kz):
    """Spectral divergence i*(kx*c1 + ky*c2 + kz*c3)."""
    return 1j * (kx * c1 + ky * c2 + kz * c3)


def mul_ik(c, k):
    """Spectral derivative factor: i*k*c for a real multiplier table k."""
    return 1j * (k * c)


def skew_combine(conv, p1, p2, p3, kx, ky, kz, mask):
    """Skew-symmetric advection assembly.

    -0.5 * (conv + i kx p1 + i ky p2 + i kz p3) * mask, where ``conv`` is the
    transform of the convective product and ``p1..p3`` the transforms of the
    flux products.
    """
    return -0.5 * mask * (conv + 1j * (kx * p1 + ky * p2 + kz * p3))


def project_aniso(f1, f2, f3, kx, ky, kz, inv_den, inv_eps2):
    """Remove the anisotropic-divergence part of a spectral tendency.

    Solves (with ``inv_den`` the inverse symbol of kx^2+ky^2+kz^2/eps^2,
    zero in the mean slot) for the pressure that makes the returned triple
    satisfy i*(kx o1 + ky o2) + i*kz*o3 = 0, where o3 absorbs the
    eps^{-2}-weighted vertical pressure gradient.

    Returns (o1, o2, o3, p).
    """
    rhs = 1j * (kx * f1 + ky * f2 + kz * f3)
    p = -rhs * inv_den
    o1 = f1 - 1j * kx * p
    o2 = f2 - 1j * ky * p
    o3 = f3 - inv_eps2 * 1j * kz * p
    return o1, o2, o3, p


def stage_a(u, n, efac, c):
    """efac * (u + c*n) — integrating-factor stage, factor inside."""
    return efac * (u + c * n)


def stage_b(u, n, efac, c):
    """efac*u + c*n — integrating-factor stage, factor on state only."""
    return efac * u + c * n


def stage_c(u, n, e_full, e_half, c):
    """e_full*u + c*e_half*n — integrating-factor stage, split factors."""
    return e_full * u + c * e_half * n


def rk_final(u, n1, n2, n3, n4, e_full, e_half, dt):
    """Final fourth-order combination of one integrating-factor RK step."""
    return e_full * u + (dt / 6.0) * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)


def reflect_z(c):
    """Index reversal l -> (N-l) mod N along the last (z) axis."""
    return np.ascontiguousarray(np.roll(c[..., ::-1], 1, axis=-1))


def parity_project_z(c, sign):
    """0.5*(c + sign*reflect_z(c)); sign=+1 keeps the even part, -1 the odd."""
    return 0.5 * (c + sign * reflect_z(c))


def weighted_sumsq(c, w):
    """sum(w * |c|^2) as a python float."""
    return float(np.sum(w * (c.real * c.real + c.imag * c.imag)))


def antiderive_z(d, inv_pil):
    """Vertical antiderivative used by the hydrostatic diagnostic.

    Given spectral coefficients ``d`` and the table inv_pil[l] = 1/(pi*l)
    (zero at l = 0), returns w with w_l = i*d_l*inv_pil[l] for l != 0 and
    the l = 0 slot set so that w vanishes at z = -1, i.e.
    w_0 = -i * sum_l d_l * inv_pil[l].  The mean-in-z content of ``d`` is
    discarded (it is not representable periodically).
    """
    t = d * inv_pil
    w = 1j * t
    w[..., 0] = -1j * np.sum(t, axis=-1)
    return w
