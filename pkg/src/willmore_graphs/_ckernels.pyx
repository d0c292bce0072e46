# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil passes; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"

cdef struct Energy:
    int kind
    double g11, g12, g22, eps


cdef inline Energy _energy(object energy):
    cdef Energy e
    kind, g11, g12, g22, eps = energy.kernel_params()
    e.kind = kind
    e.g11 = g11
    e.g12 = g12
    e.g22 = g22
    e.eps = eps
    return e


cdef inline void _grad(Energy* e, double p1, double p2, double* d1, double* d2) noexcept nogil:
    cdef double q, s, a1, a2, a3, inv
    if e.kind == 0:
        q = sqrt(1.0 + p1 * p1 + p2 * p2)
        d1[0] = p1 / q
        d2[0] = p2 / q
    elif e.kind == 1:
        q = sqrt(1.0 + e.g11 * p1 * p1 + 2.0 * e.g12 * p1 * p2 + e.g22 * p2 * p2)
        d1[0] = (e.g11 * p1 + e.g12 * p2) / q
        d2[0] = (e.g12 * p1 + e.g22 * p2) / q
    else:
        s = e.eps * (p1 * p1 + p2 * p2 + 1.0)
        a1 = sqrt(p1 * p1 + s)
        a2 = sqrt(p2 * p2 + s)
        a3 = sqrt(1.0 + s)
        inv = 1.0 / a1 + 1.0 / a2 + 1.0 / a3
        d1[0] = p1 / a1 + e.eps * p1 * inv
        d2[0] = p2 / a2 + e.eps * p2 * inv


cdef inline void _hess(Energy* e, double p1, double p2,
                       double* e11, double* e12, double* e22) noexcept nogil:
    cdef double q2, q, q3, g2, g, g3, b1, b2, s, a1, a2, a3, inv, inv3, c1, c2, eps
    if e.kind == 0:
        q2 = 1.0 + p1 * p1 + p2 * p2
        q = sqrt(q2)
        q3 = q * q2
        e11[0] = (1.0 + p2 * p2) / q3
        e12[0] = -p1 * p2 / q3
        e22[0] = (1.0 + p1 * p1) / q3
    elif e.kind == 1:
        g2 = 1.0 + e.g11 * p1 * p1 + 2.0 * e.g12 * p1 * p2 + e.g22 * p2 * p2
        g = sqrt(g2)
        g3 = g * g2
        b1 = e.g11 * p1 + e.g12 * p2
        b2 = e.g12 * p1 + e.g22 * p2
        e11[0] = e.g11 / g - b1 * b1 / g3
        e12[0] = e.g12 / g - b1 * b2 / g3
        e22[0] = e.g22 / g - b2 * b2 / g3
    else:
        eps = e.eps
        s = eps * (p1 * p1 + p2 * p2 + 1.0)
        a1 = sqrt(p1 * p1 + s)
        a2 = sqrt(p2 * p2 + s)
        a3 = sqrt(1.0 + s)
        inv = 1.0 / a1 + 1.0 / a2 + 1.0 / a3
        c1 = 1.0 / (a1 * a1 * a1)
        c2 = 1.0 / (a2 * a2 * a2)
        inv3 = c1 + c2 + 1.0 / (a3 * a3 * a3)
        e11[0] = eps * inv - eps * eps * p1 * p1 * inv3 + 1.0 / a1 - (1.0 + 2.0 * eps) * p1 * p1 * c1
        e22[0] = eps * inv - eps * eps * p2 * p2 * inv3 + 1.0 / a2 - (1.0 + 2.0 * eps) * p2 * p2 * c2
        e12[0] = -eps * eps * p1 * p2 * inv3 - eps * p1 * p2 * (c1 + c2)


cdef inline double _corner(double[:, ::1] v, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    # mean over primal cell [i, i+1] x [j, j+1]
    return 0.25 * (v[i, j] + v[i + 1, j] + v[i, j + 1] + v[i + 1, j + 1])


def curvature(u_in, double h1, double h2, energy):
    cdef double[:, ::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n1 = u.shape[0] - 1, n2 = u.shape[1] - 1
    cdef Energy e = _energy(energy)
    cdef double[:, ::1] gpv = np.empty((n1, n2 - 1))
    cdef double[:, ::1] qv = np.empty((n1, n2 - 1))
    cdef double[:, ::1] gph = np.empty((n1 - 1, n2))
    cdef double[:, ::1] qh = np.empty((n1 - 1, n2))
    H_arr = np.empty((n1 - 1, n2 - 1))
    Q_arr = np.empty((n1 - 1, n2 - 1))
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] Q = Q_arr
    cdef Py_ssize_t i, j
    cdef double gx, gy, d1, d2
    with nogil:
        for i in range(n1):
            for j in range(1, n2):
                gx = (u[i + 1, j] - u[i, j]) / h1
                gy = (_corner(u, i, j) - _corner(u, i, j - 1)) / h2
                _grad(&e, gx, gy, &d1, &d2)
                gpv[i, j - 1] = d1
                qv[i, j - 1] = sqrt(1.0 + gx * gx + gy * gy)
        for i in range(1, n1):
            for j in range(n2):
                gx = (_corner(u, i, j) - _corner(u, i - 1, j)) / h1
                gy = (u[i, j + 1] - u[i, j]) / h2
                _grad(&e, gx, gy, &d1, &d2)
                gph[i - 1, j] = d2
                qh[i - 1, j] = sqrt(1.0 + gx * gx + gy * gy)
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                H[i, j] = (gpv[i + 1, j] - gpv[i, j]) / h1 + (gph[i, j + 1] - gph[i, j]) / h2
                Q[i, j] = 0.25 * (qv[i + 1, j] + qv[i, j] + qh[i, j + 1] + qh[i, j])
    return H_arr, Q_arr


def edge_fluxes(u_in, w_in, double h1, double h2, energy):
    cdef double[:, ::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t n1 = u.shape[0] - 1, n2 = u.shape[1] - 1
    cdef Energy e = _energy(energy)
    fx_arr = np.empty((n1, n2 - 1))
    fy_arr = np.empty((n1 - 1, n2))
    cdef double[:, ::1] fx = fx_arr
    cdef double[:, ::1] fy = fy_arr
    cdef Py_ssize_t i, j
    cdef double gx, gy, wx, wy, wm, q, e11, e12, e22
    with nogil:
        for i in range(n1):
            for j in range(1, n2):
                gx = (u[i + 1, j] - u[i, j]) / h1
                gy = (_corner(u, i, j) - _corner(u, i, j - 1)) / h2
                wx = (w[i + 1, j] - w[i, j]) / h1
                wy = (_corner(w, i, j) - _corner(w, i, j - 1)) / h2
                wm = 0.5 * (w[i + 1, j] + w[i, j])
                q = sqrt(1.0 + gx * gx + gy * gy)
                _hess(&e, gx, gy, &e11, &e12, &e22)
                fx[i, j - 1] = e11 * wx + e12 * wy - 0.5 * wm * wm / (q * q * q) * gx
        for i in range(1, n1):
            for j in range(n2):
                gx = (_corner(u, i, j) - _corner(u, i - 1, j)) / h1
                gy = (u[i, j + 1] - u[i, j]) / h2
                wx = (_corner(w, i, j) - _corner(w, i - 1, j)) / h1
                wy = (w[i, j + 1] - w[i, j]) / h2
                wm = 0.5 * (w[i, j + 1] + w[i, j])
                q = sqrt(1.0 + gx * gx + gy * gy)
                _hess(&e, gx, gy, &e11, &e12, &e22)
                fy[i - 1, j] = e12 * wx + e22 * wy - 0.5 * wm * wm / (q * q * q) * gy
    return fx_arr, fy_arr


def flux_divergence(u_in, w_in, double h1, double h2, energy):
    fx_arr, fy_arr = edge_fluxes(u_in, w_in, h1, h2, energy)
    cdef double[:, ::1] fx = fx_arr
    cdef double[:, ::1] fy = fy_arr
    cdef Py_ssize_t n1 = fx.shape[0], n2 = fy.shape[1]
    D_arr = np.empty((n1 - 1, n2 - 1))
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                D[i, j] = (fx[i + 1, j] - fx[i, j]) / h1 + (fy[i, j + 1] - fy[i, j]) / h2
    return D_arr
