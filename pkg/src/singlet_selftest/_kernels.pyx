# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: SDP Schur-complement assembly and XOR-game grid scan."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, M_PI

cnp.import_array()


def schur_block(const cnp.int64_t[:] ptr,
                const cnp.int64_t[:] rows,
                const cnp.int64_t[:] cols,
                const double[:] vals,
                const cnp.int64_t[:] var_ids,
                const double[:, :] X,
                const double[:, :] Sinv,
                double[:, :] M):
    """Accumulate ``M[i, j] += tr(A_i X A_j Sinv)`` for one block.

    Entries of the block's ``A`` matrices are stored per variable in COO form:
    variable ``var_ids[k]`` owns ``rows/cols/vals[ptr[k]:ptr[k+1]]``.
    """
    cdef Py_ssize_t nk = var_ids.shape[0]
    cdef Py_ssize_t a, b, s, t
    cdef Py_ssize_t p, q, r, u
    cdef double acc, va
    for a in range(nk):
        for b in range(a, nk):
            acc = 0.0
            for s in range(ptr[a], ptr[a + 1]):
                p = rows[s]
                q = cols[s]
                va = vals[s]
                for t in range(ptr[b], ptr[b + 1]):
                    r = rows[t]
                    u = cols[t]
                    acc += va * vals[t] * X[q, r] * Sinv[u, p]
            M[var_ids[a], var_ids[b]] += acc
            if a != b:
                M[var_ids[b], var_ids[a]] += acc


def xor_grid(const double[:, :] f, Py_ssize_t n):
    """Game value ``sum f_xy cos(a_x - b_y)`` on an ``n``-point angle grid, ``a_0 = 0``.

    Returns an ``(n, n, n)`` array indexed ``[a1, b0, b1]``.
    """
    cdef cnp.ndarray[double, ndim=1] table = np.cos(2.0 * M_PI * np.arange(n) / n)
    cdef double[:] c = table
    out = np.empty((n, n, n))
    cdef double[:, :, :] o = out
    cdef double[:] u = np.empty(n)
    cdef double[:] v = np.empty(n)
    cdef Py_ssize_t i, j, k
    cdef double f00 = f[0, 0], f01 = f[0, 1], f10 = f[1, 0], f11 = f[1, 1]
    cdef double base
    for k in range(n):
        u[k] = f01 * c[(n - k) % n]
    for i in range(n):
        for k in range(n):
            v[k] = u[k] + f11 * c[(i - k + n) % n]
        for j in range(n):
            base = f00 * c[(n - j) % n] + f10 * c[(i - j + n) % n]
            for k in range(n):
                o[i, j, k] = base + v[k]
    return out
