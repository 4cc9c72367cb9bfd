# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of `_pure.integrate_segment_pauli`; see that module for the
kernel contract.  Matrix products go through BLAS zgemm; the Pauli
conjugations are direct gather loops."""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

ctypedef double complex zcomplex
ctypedef cnp.int64_t i64


cdef void _rhs(zcomplex* out, zcomplex* rho, zcomplex* H,
               i64* perms, zcomplex* phases,
               double kappa, int m, int dim) noexcept nogil:
    cdef int x, y, j, base
    cdef i64 px
    cdef zcomplex fx
    cdef zcomplex alpha = -1.0j
    cdef zcomplex beta = 0.0
    cdef i64* perm
    cdef zcomplex* phase
    # out = -i(H rho - rho H); row-major products via swapped zgemm operands
    zgemm("N", "N", &dim, &dim, &dim, &alpha, rho, &dim, H, &dim, &beta, out, &dim)
    alpha = 1.0j
    beta = 1.0
    zgemm("N", "N", &dim, &dim, &dim, &alpha, H, &dim, rho, &dim, &beta, out, &dim)
    for j in range(m):
        perm = perms + j * dim
        phase = phases + j * dim
        for x in range(dim):
            px = perm[x] * dim
            fx = kappa * phase[x]
            base = x * dim
            for y in range(dim):
                out[base + y] = out[base + y] + fx * phase[y].conjugate() * rho[px + perm[y]]
    if m:
        for x in range(dim * dim):
            out[x] = out[x] - kappa * m * rho[x]


def integrate_segment_pauli(rho, H, perms, phases, double kappa, double dt, long n_steps):
    """Advance `rho` by n_steps of size dt; returns a new array."""
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] rho_c = \
        np.array(rho, dtype=np.complex128, order='C')
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] H_c = \
        np.ascontiguousarray(H, dtype=np.complex128)
    cdef cnp.ndarray[i64, ndim=2, mode='c'] perms_c = \
        np.ascontiguousarray(perms, dtype=np.int64)
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] phases_c = \
        np.ascontiguousarray(phases, dtype=np.complex128)

    cdef int dim = rho_c.shape[0]
    cdef int m = perms_c.shape[0]
    cdef cnp.ndarray[zcomplex, ndim=3, mode='c'] kbuf = \
        np.zeros((6, dim, dim), dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=2, mode='c'] ybuf = \
        np.zeros((dim, dim), dtype=np.complex128)

    cdef double[6][5] A
    cdef double[6] B
    cdef int i, j
    for i in range(6):
        for j in range(5):
            A[i][j] = 0.0
    A[1][0] = 1.0 / 5.0
    A[2][0] = 3.0 / 40.0;        A[2][1] = 9.0 / 40.0
    A[3][0] = 44.0 / 45.0;       A[3][1] = -56.0 / 15.0;      A[3][2] = 32.0 / 9.0
    A[4][0] = 19372.0 / 6561.0;  A[4][1] = -25360.0 / 2187.0
    A[4][2] = 64448.0 / 6561.0;  A[4][3] = -212.0 / 729.0
    A[5][0] = 9017.0 / 3168.0;   A[5][1] = -355.0 / 33.0
    A[5][2] = 46732.0 / 5247.0;  A[5][3] = 49.0 / 176.0;      A[5][4] = -5103.0 / 18656.0
    B[0] = 35.0 / 384.0;  B[1] = 0.0;  B[2] = 500.0 / 1113.0
    B[3] = 125.0 / 192.0; B[4] = -2187.0 / 6784.0; B[5] = 11.0 / 84.0

    cdef zcomplex* rp = &rho_c[0, 0]
    cdef zcomplex* Hp = &H_c[0, 0]
    cdef zcomplex* yp = &ybuf[0, 0]
    cdef i64* pp = NULL
    cdef zcomplex* fp = NULL
    if m:
        pp = &perms_c[0, 0]
        fp = &phases_c[0, 0]
    cdef zcomplex* k[6]
    for i in range(6):
        k[i] = &kbuf[i, 0, 0]

    cdef long step
    cdef int idx, x, y
    cdef int nn = dim * dim
    cdef double a
    cdef zcomplex v

    with nogil:
        for step in range(n_steps):
            _rhs(k[0], rp, Hp, pp, fp, kappa, m, dim)
            for i in range(1, 6):
                for idx in range(nn):
                    yp[idx] = rp[idx]
                for j in range(i):
                    a = A[i][j]
                    if a != 0.0:
                        for idx in range(nn):
                            yp[idx] = yp[idx] + dt * a * k[j][idx]
                _rhs(k[i], yp, Hp, pp, fp, kappa, m, dim)
            for idx in range(nn):
                rp[idx] = rp[idx] + dt * (B[0] * k[0][idx] + B[2] * k[2][idx]
                                          + B[3] * k[3][idx] + B[4] * k[4][idx]
                                          + B[5] * k[5][idx])
            for x in range(dim):
                for y in range(x, dim):
                    v = 0.5 * (rp[x * dim + y] + rp[y * dim + x].conjugate())
                    rp[x * dim + y] = v
                    rp[y * dim + x] = v.conjugate()

    return np.asarray(rho_c)
