# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_numpy.py``.

Same signatures, same semantics.  Complex arrays are processed through flat
float64 views (interleaved re/im pairs) so every loop is plain double
arithmetic: this fuses the temporaries of the numpy expressions and avoids
the branchy library routine the C compiler otherwise emits for complex
products.
"""

import numpy as np


cdef inline object _check_c(object a):
    if not a.flags["C_CONTIGUOUS"] or a.dtype != np.complex128:
        raise ValueError("kernel inputs must be C-contiguous complex128")
    return a.view(np.float64).ravel()


cdef inline object _check_r(object a):
    if not a.flags["C_CONTIGUOUS"] or a.dtype != np.float64:
        raise ValueError("kernel inputs must be C-contiguous float64")
    return a.ravel()


def dot2(a1, a2, b1, b2):
    out_arr = np.empty_like(a1)
    cdef const double[::1] x1 = _check_r(a1), x2 = _check_r(a2)
    cdef const double[::1] y1 = _check_r(b1), y2 = _check_r(b2)
    cdef double[::1] o = out_arr.ravel()
    cdef Py_ssize_t m, n = o.shape[0]
    with nogil:
        for m in range(n):
            o[m] = x1[m] * y1[m] + x2[m] * y2[m]
    return out_arr


def dot3(a1, a2, a3, b1, b2, b3):
    out_arr = np.empty_like(a1)
    cdef const double[::1] x1 = _check_r(a1), x2 = _check_r(a2), x3 = _check_r(a3)
    cdef const double[::1] y1 = _check_r(b1), y2 = _check_r(b2), y3 = _check_r(b3)
    cdef double[::1] o = out_arr.ravel()
    cdef Py_ssize_t m, n = o.shape[0]
    with nogil:
        for m in range(n):
            o[m] = x1[m] * y1[m] + x2[m] * y2[m] + x3[m] * y3[m]
    return out_arr


def div_spectral(c1, c2, c3, kx, ky, kz):
    out_arr = np.empty_like(c1)
    cdef const double[::1] a = _check_c(c1), b = _check_c(c2), c = _check_c(c3)
    cdef const double[::1] x = _check_r(kx), y = _check_r(ky), z = _check_r(kz)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = x.shape[0]
    cdef double sre, sim
    with nogil:
        for m in range(n):
            sre = x[m] * a[2 * m] + y[m] * b[2 * m] + z[m] * c[2 * m]
            sim = x[m] * a[2 * m + 1] + y[m] * b[2 * m + 1] + z[m] * c[2 * m + 1]
            o[2 * m] = -sim
            o[2 * m + 1] = sre
    return out_arr


def mul_ik(c, k):
    out_arr = np.empty_like(c)
    cdef const double[::1] a = _check_c(c)
    cdef const double[::1] x = _check_r(k)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = x.shape[0]
    with nogil:
        for m in range(n):
            o[2 * m] = -x[m] * a[2 * m + 1]
            o[2 * m + 1] = x[m] * a[2 * m]
    return out_arr


def skew_combine(conv, p1, p2, p3, kx, ky, kz, mask):
    out_arr = np.empty_like(conv)
    cdef const double[::1] cv = _check_c(conv)
    cdef const double[::1] a = _check_c(p1), b = _check_c(p2), c = _check_c(p3)
    cdef const double[::1] x = _check_r(kx), y = _check_r(ky), z = _check_r(kz)
    cdef const double[::1] w = _check_r(mask)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = x.shape[0]
    cdef double sre, sim, f
    with nogil:
        for m in range(n):
            sre = x[m] * a[2 * m] + y[m] * b[2 * m] + z[m] * c[2 * m]
            sim = x[m] * a[2 * m + 1] + y[m] * b[2 * m + 1] + z[m] * c[2 * m + 1]
            f = -0.5 * w[m]
            o[2 * m] = f * (cv[2 * m] - sim)
            o[2 * m + 1] = f * (cv[2 * m + 1] + sre)
    return out_arr


def project_aniso(f1, f2, f3, kx, ky, kz, inv_den, double inv_eps2):
    block = np.empty((4,) + f1.shape, dtype=np.complex128)
    o1_arr, o2_arr, o3_arr, p_arr = block[0], block[1], block[2], block[3]
    cdef const double[::1] a = _check_c(f1), b = _check_c(f2), c = _check_c(f3)
    cdef const double[::1] x = _check_r(kx), y = _check_r(ky), z = _check_r(kz)
    cdef const double[::1] ind = _check_r(inv_den)
    cdef double[::1] o1 = o1_arr.view(np.float64).ravel()
    cdef double[::1] o2 = o2_arr.view(np.float64).ravel()
    cdef double[::1] o3 = o3_arr.view(np.float64).ravel()
    cdef double[::1] p = p_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = x.shape[0]
    cdef double tre, tim, ipre, ipim, wz
    with nogil:
        for m in range(n):
            # T = kx f1 + ky f2 + kz f3; p = -(iT)*inv_den; correction i*k*p
            tre = x[m] * a[2 * m] + y[m] * b[2 * m] + z[m] * c[2 * m]
            tim = x[m] * a[2 * m + 1] + y[m] * b[2 * m + 1] + z[m] * c[2 * m + 1]
            ipre = tre * ind[m]
            ipim = tim * ind[m]
            p[2 * m] = tim * ind[m]
            p[2 * m + 1] = -tre * ind[m]
            o1[2 * m] = a[2 * m] - x[m] * ipre
            o1[2 * m + 1] = a[2 * m + 1] - x[m] * ipim
            o2[2 * m] = b[2 * m] - y[m] * ipre
            o2[2 * m + 1] = b[2 * m + 1] - y[m] * ipim
            wz = inv_eps2 * z[m]
            o3[2 * m] = c[2 * m] - wz * ipre
            o3[2 * m + 1] = c[2 * m + 1] - wz * ipim
    return o1_arr, o2_arr, o3_arr, p_arr


def stage_a(u, nl, efac, double c):
    out_arr = np.empty_like(u)
    cdef const double[::1] a = _check_c(u), b = _check_c(nl)
    cdef const double[::1] e = _check_r(efac)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = e.shape[0]
    with nogil:
        for m in range(n):
            o[2 * m] = e[m] * (a[2 * m] + c * b[2 * m])
            o[2 * m + 1] = e[m] * (a[2 * m + 1] + c * b[2 * m + 1])
    return out_arr


def stage_b(u, nl, efac, double c):
    out_arr = np.empty_like(u)
    cdef const double[::1] a = _check_c(u), b = _check_c(nl)
    cdef const double[::1] e = _check_r(efac)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = e.shape[0]
    with nogil:
        for m in range(n):
            o[2 * m] = e[m] * a[2 * m] + c * b[2 * m]
            o[2 * m + 1] = e[m] * a[2 * m + 1] + c * b[2 * m + 1]
    return out_arr


def stage_c(u, nl, e_full, e_half, double c):
    out_arr = np.empty_like(u)
    cdef const double[::1] a = _check_c(u), b = _check_c(nl)
    cdef const double[::1] ef = _check_r(e_full), eh = _check_r(e_half)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = ef.shape[0]
    with nogil:
        for m in range(n):
            o[2 * m] = ef[m] * a[2 * m] + c * eh[m] * b[2 * m]
            o[2 * m + 1] = ef[m] * a[2 * m + 1] + c * eh[m] * b[2 * m + 1]
    return out_arr


def rk_final(u, n1, n2, n3, n4, e_full, e_half, double dt):
    out_arr = np.empty_like(u)
    cdef const double[::1] a = _check_c(u)
    cdef const double[::1] b1 = _check_c(n1), b2 = _check_c(n2)
    cdef const double[::1] b3 = _check_c(n3), b4 = _check_c(n4)
    cdef const double[::1] ef = _check_r(e_full), eh = _check_r(e_half)
    cdef double[::1] o = out_arr.view(np.float64).ravel()
    cdef Py_ssize_t m, n = ef.shape[0]
    cdef double w = dt / 6.0
    with nogil:
        for m in range(n):
            o[2 * m] = ef[m] * a[2 * m] + w * (
                ef[m] * b1[2 * m] + 2.0 * eh[m] * (b2[2 * m] + b3[2 * m])
                + b4[2 * m])
            o[2 * m + 1] = ef[m] * a[2 * m + 1] + w * (
                ef[m] * b1[2 * m + 1]
                + 2.0 * eh[m] * (b2[2 * m + 1] + b3[2 * m + 1])
                + b4[2 * m + 1])
    return out_arr


def reflect_z(c):
    out_arr = np.empty_like(c)
    nz = int(c.shape[len(c.shape) - 1])
    cdef const double[:, ::1] a = _check_c(c).reshape(-1, 2 * nz)
    cdef double[:, ::1] o = out_arr.view(np.float64).reshape(-1, 2 * nz)
    cdef Py_ssize_t r, l, s, rows = a.shape[0], n = nz
    with nogil:
        for r in range(rows):
            o[r, 0] = a[r, 0]
            o[r, 1] = a[r, 1]
            for l in range(1, n):
                s = 2 * (n - l)
                o[r, 2 * l] = a[r, s]
                o[r, 2 * l + 1] = a[r, s + 1]
    return out_arr


def parity_project_z(c, double sign):
    out_arr = np.empty_like(c)
    nz = int(c.shape[len(c.shape) - 1])
    cdef const double[:, ::1] a = _check_c(c).reshape(-1, 2 * nz)
    cdef double[:, ::1] o = out_arr.view(np.float64).reshape(-1, 2 * nz)
    cdef Py_ssize_t r, l, s, rows = a.shape[0], n = nz
    with nogil:
        for r in range(rows):
            o[r, 0] = 0.5 * (a[r, 0] + sign * a[r, 0])
            o[r, 1] = 0.5 * (a[r, 1] + sign * a[r, 1])
            for l in range(1, n):
                s = 2 * (n - l)
                o[r, 2 * l] = 0.5 * (a[r, 2 * l] + sign * a[r, s])
                o[r, 2 * l + 1] = 0.5 * (a[r, 2 * l + 1] + sign * a[r, s + 1])
    return out_arr


def weighted_sumsq(c, w):
    cdef const double[::1] a = _check_c(c)
    cdef const double[::1] x = _check_r(w)
    cdef Py_ssize_t m, n = x.shape[0]
    cdef double s = 0.0
    with nogil:
        for m in range(n):
            s += x[m] * (a[2 * m] * a[2 * m] + a[2 * m + 1] * a[2 * m + 1])
    return s


def antiderive_z(d, inv_pil):
    out_arr = np.empty_like(d)
    nz = int(d.shape[len(d.shape) - 1])
    cdef const double[:, ::1] a = _check_c(d).reshape(-1, 2 * nz)
    cdef const double[::1] t = _check_r(inv_pil)
    cdef double[:, ::1] o = out_arr.view(np.float64).reshape(-1, 2 * nz)
    cdef Py_ssize_t r, l, rows = a.shape[0], n = nz
    cdef double tre, tim, sre, sim
    with nogil:
        for r in range(rows):
            sre = 0.0
            sim = 0.0
            for l in range(n):
                tre = a[r, 2 * l] * t[l]
                tim = a[r, 2 * l + 1] * t[l]
                sre += tre
                sim += tim
                o[r, 2 * l] = -tim
                o[r, 2 * l + 1] = tre
            o[r, 0] = sim
            o[r, 1] = -sre
    return out_arr
