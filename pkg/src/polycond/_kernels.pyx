# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched kernels: polynomial values, Jacobians, and local L(P, x).

Each point is handled in a single pass with small stack-like work buffers;
singular values come from one-sided Jacobi rotations, which are accurate for
the tiny (m x (n-1)) matrices that arise here.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MAX_SWEEPS = 80


cdef void _eval_point(const long[:, ::1] exps, const double[::1] coeffs, const long[::1] row,
                      int m, int n, int dmax, const double* x,
                      double* pw, double* val, double* jac) noexcept nogil:
    cdef Py_ssize_t T = exps.shape[0]
    cdef Py_ssize_t t
    cdef int i, j, e, k
    cdef double mono, dm, c
    for j in range(n):
        pw[j * (dmax + 1)] = 1.0
        for e in range(1, dmax + 1):
            pw[j * (dmax + 1) + e] = pw[j * (dmax + 1) + e - 1] * x[j]
    for i in range(m):
        val[i] = 0.0
        for j in range(n):
            jac[i * n + j] = 0.0
    for t in range(T):
        c = coeffs[t]
        if c == 0.0:
            continue
        i = <int>row[t]
        mono = 1.0
        for j in range(n):
            mono *= pw[j * (dmax + 1) + exps[t, j]]
        val[i] += c * mono
        for j in range(n):
            e = <int>exps[t, j]
            if e == 0:
                continue
            dm = c * e
            for k in range(n):
                if k == j:
                    dm *= pw[k * (dmax + 1) + e - 1]
                else:
                    dm *= pw[k * (dmax + 1) + exps[t, k]]
            jac[i * n + j] += dm


cdef void _jacobi_sv(double* A, int rows, int cols, double* sv) noexcept nogil:
    """One-sided Jacobi: orthogonalise columns of row-major A in place; sv = column norms."""
    cdef int sweep, p, q, i
    cdef double alpha, beta, gamma, zeta, t, c, s, tmp
    cdef bint rotated
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for i in range(rows):
                    alpha += A[i * cols + p] * A[i * cols + p]
                    beta += A[i * cols + q] * A[i * cols + q]
                    gamma += A[i * cols + p] * A[i * cols + q]
                if gamma == 0.0 or fabs(gamma) <= 1e-15 * sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0:
                    t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = c * t
                for i in range(rows):
                    tmp = A[i * cols + p]
                    A[i * cols + p] = c * tmp - s * A[i * cols + q]
                    A[i * cols + q] = s * tmp + c * A[i * cols + q]
        if not rotated:
            break
    for p in range(cols):
        tmp = 0.0
        for i in range(rows):
            tmp += A[i * cols + p] * A[i * cols + p]
        sv[p] = sqrt(tmp)


def system_values_jacobians(const long[:, ::1] exps, const double[::1] coeffs, const long[::1] row,
                            int m, X):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t K = Xv.shape[0]
    cdef int n = <int>Xv.shape[1]
    cdef int dmax = 0
    cdef Py_ssize_t t, k
    for t in range(exps.shape[0]):
        for k in range(n):
            if exps[t, k] > dmax:
                dmax = <int>exps[t, k]
    values = np.empty((K, m), dtype=np.float64)
    jacs = np.empty((K, m, n), dtype=np.float64)
    cdef double[:, ::1] vv = values
    cdef double[:, :, ::1] jv = jacs
    cdef double* pw = <double*>malloc(n * (dmax + 1) * sizeof(double))
    try:
        with nogil:
            for k in range(K):
                _eval_point(exps, coeffs, row, m, n, dmax, &Xv[k, 0], pw, &vv[k, 0], &jv[k, 0, 0])
    finally:
        free(pw)
    return values, jacs


def local_condition_batch(const long[:, ::1] exps, const double[::1] coeffs, const long[::1] row,
                          int m, inv_sqrt_deg, X):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] isd = np.ascontiguousarray(inv_sqrt_deg, dtype=np.float64)
    cdef Py_ssize_t K = Xv.shape[0]
    cdef int n = <int>Xv.shape[1]
    cdef int cols = n - 1
    cdef int dmax = 0
    cdef Py_ssize_t t, k
    cdef int i, j, a
    for t in range(exps.shape[0]):
        for j in range(n):
            if exps[t, j] > dmax:
                dmax = <int>exps[t, j]
    vnorm_a = np.empty(K, dtype=np.float64)
    smin_a = np.empty(K, dtype=np.float64)
    L_a = np.empty(K, dtype=np.float64)
    cdef double[::1] vnorm = vnorm_a
    cdef double[::1] smin = smin_a
    cdef double[::1] Lv = L_a
    cdef double* pw = <double*>malloc(n * (dmax + 1) * sizeof(double))
    cdef double* val = <double*>malloc(m * sizeof(double))
    cdef double* jac = <double*>malloc(m * n * sizeof(double))
    cdef double* hv = <double*>malloc(n * sizeof(double))
    cdef double* A = <double*>malloc(m * (cols if cols > 0 else 1) * sizeof(double))
    cdef double* sv = <double*>malloc((cols if cols > 0 else 1) * sizeof(double))
    cdef double s, vsq, h, acc, mn, xn
    try:
        with nogil:
            for k in range(K):
                _eval_point(exps, coeffs, row, m, n, dmax, &Xv[k, 0], pw, val, jac)
                vsq = 0.0
                for i in range(m):
                    vsq += val[i] * val[i]
                vnorm[k] = sqrt(vsq)
                if cols == 0 or m < cols:
                    smin[k] = 0.0
                    Lv[k] = vnorm[k]
                    continue
                # Householder vector v = x + sign(x_0) e_0; basis = columns 1..n-1 of I - 2 v v^T / v^T v
                s = 1.0 if Xv[k, 0] >= 0 else -1.0
                xn = 0.0
                for j in range(n):
                    hv[j] = Xv[k, j]
                hv[0] += s
                for j in range(n):
                    xn += hv[j] * hv[j]
                for i in range(m):
                    # acc_i = grad_i . v ; column a of J B = J e_a - 2 v_a (J v) / vv
                    acc = 0.0
                    for j in range(n):
                        acc += jac[i * n + j] * hv[j]
                    for a in range(cols):
                        h = jac[i * n + a + 1] - 2.0 * hv[a + 1] * acc / xn
                        A[i * cols + a] = h * isd[i]
                _jacobi_sv(A, m, cols, sv)
                mn = sv[0]
                for a in range(1, cols):
                    if sv[a] < mn:
                        mn = sv[a]
                smin[k] = mn
                Lv[k] = sqrt(mn * mn + vsq)
    finally:
        free(pw)
        free(val)
        free(jac)
        free(hv)
        free(A)
        free(sv)
    return vnorm_a, smin_a, L_a


def sigma_max_batch(A):
    cdef double[:, :, ::1] Av = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t K = Av.shape[0]
    cdef int rows = <int>Av.shape[1]
    cdef int cols = <int>Av.shape[2]
    out_a = np.empty(K, dtype=np.float64)
    cdef double[::1] out = out_a
    cdef Py_ssize_t k
    cdef int a
    cdef double mx
    if K == 0:
        return out_a
    cdef double* sv = <double*>malloc(cols * sizeof(double))
    try:
        with nogil:
            for k in range(K):
                _jacobi_sv(&Av[k, 0, 0], rows, cols, sv)
                mx = 0.0
                for a in range(cols):
                    if sv[a] > mx:
                        mx = sv[a]
                out[k] = mx
    finally:
        free(sv)
    return out_a
