# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see _pure.py for the contracts."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()


def numerov_count_nodes(const double[::1] v, const double[::1] energies, double h):
    cdef Py_ssize_t nx = v.shape[0]
    cdef Py_ssize_t ne = energies.shape[0]
    out = np.zeros(ne, dtype=np.int64)
    cdef long long[::1] nodes = out
    cdef double c = h * h / 12.0
    cdef Py_ssize_t j, i
    cdef double e, psi_prev, psi, psi_next, f_prev, f_cur, f_next, s
    for j in range(ne):
        e = energies[j]
        psi_prev = 0.0
        psi = 1e-8
        f_prev = 2.0 * (v[0] - e)
        f_cur = 2.0 * (v[1] - e)
        for i in range(1, nx - 1):
            f_next = 2.0 * (v[i + 1] - e)
            psi_next = ((2.0 + 10.0 * c * f_cur) * psi
                        - (1.0 - c * f_prev) * psi_prev) / (1.0 - c * f_next)
            if psi_next * psi < 0.0:
                nodes[j] += 1
            if fabs(psi_next) > 1e200:
                s = fabs(psi_next)
                psi_next /= s
                psi /= s
            psi_prev = psi
            psi = psi_next
            f_prev = f_cur
            f_cur = f_next
    return out


def cesaro_accumulate(const double[::1] c, const double[::1] r,
                      const double[::1] nodes, const double[::1] weights):
    cdef Py_ssize_t d = c.shape[0]
    cdef Py_ssize_t nj = nodes.shape[0]
    out = np.zeros((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] m = out
    amp = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] a = amp
    cdef Py_ssize_t j, p, q
    cdef double th, w, ph
    cdef double complex ap
    for j in range(nj):
        th = nodes[j]
        w = weights[j]
        for p in range(d):
            ph = -r[p] * th
            a[p] = c[p] * (cos(ph) + 1j * sin(ph))
        # Hermitian rank-1 update, upper triangle only
        for p in range(d):
            ap = w * a[p]
            for q in range(p, d):
                m[p, q] += ap * a[q].conjugate()
    for p in range(d):
        for q in range(p + 1, d):
            m[q, p] = m[p, q].conjugate()
    return out
