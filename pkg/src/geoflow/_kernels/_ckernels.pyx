# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernels for the periodic flows (same API as _pykernels)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite

cnp.import_array()


cdef void _pad(double[:, ::1] y, double[:, ::1] e, double[:, ::1] R, double[::1] a, int n) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(n):
        for j in range(3):
            e[i + 2, j] = y[i, j]
    # left ghosts: R^T (y - a), right ghosts: R y + a
    for i in range(2):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc = acc + R[k, j] * (y[n - 2 + i, k] - a[k])
            e[i, j] = acc
            acc = 0.0
            for k in range(3):
                acc = acc + R[j, k] * y[i, k]
            e[n + 2 + i, j] = acc + a[j]


cdef double _curve_f(double[:, ::1] e, double[:, ::1] out, int n, double h,
                     double alpha, double beta) noexcept nogil:
    cdef int i, j
    cdef double d1[3]
    cdef double d2[3]
    cdef double d3[3]
    cdef double c[3]
    cdef double ih1 = 0.5 / h, ih2 = 1.0 / (h * h), ih3 = 0.5 / (h * h * h)
    cdef double m = 0.0, q
    for i in range(n):
        for j in range(3):
            d1[j] = (e[i + 3, j] - e[i + 1, j]) * ih1
            d2[j] = (e[i + 3, j] - 2.0 * e[i + 2, j] + e[i + 1, j]) * ih2
            d3[j] = (e[i + 4, j] - 2.0 * e[i + 3, j] + 2.0 * e[i + 1, j] - e[i, j]) * ih3
        q = d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2]
        if q > m or not isfinite(q):
            m = q
        c[0] = d1[1] * d2[2] - d1[2] * d2[1]
        c[1] = d1[2] * d2[0] - d1[0] * d2[2]
        c[2] = d1[0] * d2[1] - d1[1] * d2[0]
        for j in range(3):
            out[i, j] = alpha * c[j]
        if beta != 0.0:
            out[i, 0] = out[i, 0] + beta * (d3[0] + 1.5 * (d2[1] * c[2] - d2[2] * c[1]))
            out[i, 1] = out[i, 1] + beta * (d3[1] + 1.5 * (d2[2] * c[0] - d2[0] * c[2]))
            out[i, 2] = out[i, 2] + beta * (d3[2] + 1.5 * (d2[0] * c[1] - d2[1] * c[0]))
    return m


cdef double _sphere_f(double[:, ::1] e, double[:, ::1] out, int n, double h, int kind) noexcept nogil:
    cdef int i, j
    cdef double d1[3]
    cdef double d2[3]
    cdef double d3[3]
    cdef double w[3]
    cdef double u0, u1, u2, s, q, m = 0.0
    cdef double ih1 = 0.5 / h, ih2 = 1.0 / (h * h), ih3 = 0.5 / (h * h * h)
    for i in range(n):
        for j in range(3):
            d1[j] = (e[i + 3, j] - e[i + 1, j]) * ih1
            d2[j] = (e[i + 3, j] - 2.0 * e[i + 2, j] + e[i + 1, j]) * ih2
            d3[j] = (e[i + 4, j] - 2.0 * e[i + 3, j] + 2.0 * e[i + 1, j] - e[i, j]) * ih3
        q = d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2]
        if q > m or not isfinite(q):
            m = q
        u0 = e[i + 2, 0]
        u1 = e[i + 2, 1]
        u2 = e[i + 2, 2]
        if kind == 0:
            out[i, 0] = u1 * d2[2] - u2 * d2[1]
            out[i, 1] = u2 * d2[0] - u0 * d2[2]
            out[i, 2] = u0 * d2[1] - u1 * d2[0]
        elif kind == 1:
            # Hamiltonian stencil: (u+1 x u+2 + u-2 x u-1 + u+1 x u-1) x u / (2 h^3)
            w[0] = (e[i + 3, 1] * e[i + 4, 2] - e[i + 3, 2] * e[i + 4, 1]
                    + e[i, 1] * e[i + 1, 2] - e[i, 2] * e[i + 1, 1]
                    + e[i + 3, 1] * e[i + 1, 2] - e[i + 3, 2] * e[i + 1, 1])
            w[1] = (e[i + 3, 2] * e[i + 4, 0] - e[i + 3, 0] * e[i + 4, 2]
                    + e[i, 2] * e[i + 1, 0] - e[i, 0] * e[i + 1, 2]
                    + e[i + 3, 2] * e[i + 1, 0] - e[i + 3, 0] * e[i + 1, 2])
            w[2] = (e[i + 3, 0] * e[i + 4, 1] - e[i + 3, 1] * e[i + 4, 0]
                    + e[i, 0] * e[i + 1, 1] - e[i, 1] * e[i + 1, 0]
                    + e[i + 3, 0] * e[i + 1, 1] - e[i + 3, 1] * e[i + 1, 0])
            out[i, 0] = (w[1] * u2 - w[2] * u1) * ih3
            out[i, 1] = (w[2] * u0 - w[0] * u2) * ih3
            out[i, 2] = (w[0] * u1 - w[1] * u0) * ih3
        else:
            s = 1.5 * (d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2])
            for j in range(3):
                w[j] = d3[j] + s * d1[j]
            s = w[0] * u0 + w[1] * u1 + w[2] * u2
            out[i, 0] = w[0] - s * u0
            out[i, 1] = w[1] - s * u1
            out[i, 2] = w[2] - s * u2
    return m


cdef double _advance(double[:, ::1] y, double h, double dt, long nsteps, int mode,
                     double alpha, double beta, double[:, ::1] R, double[::1] a):
    # mode 0: curve, 1: schrodinger map, 2: kdv map, 3: projected kdv map
    cdef int n = y.shape[0]
    cdef long step
    cdef int i, j, stage
    cdef double m = 0.0, mm = 0.0, nrm
    cdef double[:, ::1] e = np.empty((n + 4, 3))
    cdef double[:, ::1] k1 = np.empty((n, 3))
    cdef double[:, ::1] k2 = np.empty((n, 3))
    cdef double[:, ::1] k3 = np.empty((n, 3))
    cdef double[:, ::1] k4 = np.empty((n, 3))
    cdef double[:, ::1] tmp = np.empty((n, 3))
    for step in range(nsteps):
        for stage in range(4):
            if stage == 0:
                _pad(y, e, R, a, n)
            else:
                for i in range(n):
                    for j in range(3):
                        if stage == 1:
                            tmp[i, j] = y[i, j] + 0.5 * dt * k1[i, j]
                        elif stage == 2:
                            tmp[i, j] = y[i, j] + 0.5 * dt * k2[i, j]
                        else:
                            tmp[i, j] = y[i, j] + dt * k3[i, j]
                _pad(tmp, e, R, a, n)
            if mode == 0:
                if stage == 0:
                    m = _curve_f(e, k1, n, h, alpha, beta)
                elif stage == 1:
                    _curve_f(e, k2, n, h, alpha, beta)
                elif stage == 2:
                    _curve_f(e, k3, n, h, alpha, beta)
                else:
                    _curve_f(e, k4, n, h, alpha, beta)
            else:
                if stage == 0:
                    m = _sphere_f(e, k1, n, h, mode - 1)
                elif stage == 1:
                    _sphere_f(e, k2, n, h, mode - 1)
                elif stage == 2:
                    _sphere_f(e, k3, n, h, mode - 1)
                else:
                    _sphere_f(e, k4, n, h, mode - 1)
            if stage == 0:
                if not isfinite(m) or m > 1e300:
                    return -1.0
                if m > mm:
                    mm = m
        for i in range(n):
            for j in range(3):
                y[i, j] = y[i, j] + (dt / 6.0) * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            if mode != 0:
                nrm = sqrt(y[i, 0] * y[i, 0] + y[i, 1] * y[i, 1] + y[i, 2] * y[i, 2])
                for j in range(3):
                    y[i, j] = y[i, j] / nrm
    return sqrt(mm)


_MODES = {"schrodinger": 1, "kdv": 2, "kdv_projected": 3}
_I3 = np.eye(3)
_Z3 = np.zeros(3)


def _out(r):
    return np.inf if r < 0 else r


def curve_advance(p, double h, double dt, long nsteps, double alpha, double beta, rot=_I3, trans=_Z3):
    y = np.array(p, dtype=float, order="C")
    R = np.ascontiguousarray(rot, dtype=float)
    a = np.ascontiguousarray(trans, dtype=float)
    r = _advance(y, h, dt, nsteps, 0, alpha, beta, R, a)
    return y, _out(r)


def sphere_advance(u, double h, double dt, long nsteps, kind, rot=_I3):
    y = np.array(u, dtype=float, order="C")
    R = np.ascontiguousarray(rot, dtype=float)
    mode = _MODES[kind]
    r = _advance(y, h, dt, nsteps, mode, 0.0, 0.0, R, np.zeros(3))
    return y, _out(r)


def _single(p, double h, int mode, double alpha, double beta, rot, trans):
    y = np.ascontiguousarray(p, dtype=float)
    n = y.shape[0]
    e = np.empty((n + 4, 3))
    out = np.empty((n, 3))
    R = np.ascontiguousarray(rot, dtype=float)
    a = np.ascontiguousarray(trans, dtype=float)
    _pad(y, e, R, a, n)
    if mode == 0:
        _curve_f(e, out, n, h, alpha, beta)
    else:
        _sphere_f(e, out, n, h, mode - 1)
    d2 = (e[3:n + 3] - 2.0 * e[2:n + 2] + e[1:n + 1]) / (h * h)
    return out, d2


def curve_rhs(p, double h, double alpha, double beta, rot=_I3, trans=_Z3):
    return _single(p, h, 0, alpha, beta, rot, trans)


def schrodinger_rhs(u, double h, rot=_I3):
    return _single(u, h, 1, 0.0, 0.0, rot, _Z3)


def kdv_rhs(u, double h, rot=_I3):
    return _single(u, h, 2, 0.0, 0.0, rot, _Z3)


def kdv_projected_rhs(u, double h, rot=_I3):
    return _single(u, h, 3, 0.0, 0.0, rot, _Z3)
