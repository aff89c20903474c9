# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel for the closed-loop polynomial task.

Mirrors ``_fallback.poly_selfnorm_stats``; each run advances sequentially
with unrolled 4x4 Cholesky factorizations and triangular solves.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sin, sqrt

cnp.import_array()


cdef inline void chol4(double[4][4] A, double[4][4] L) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        for j in range(i + 1):
            acc = A[i][j]
            for k in range(j):
                acc -= L[i][k] * L[j][k]
            if i == j:
                L[i][j] = sqrt(acc)
            else:
                L[i][j] = acc / L[j][j]


cdef inline void solve_lower4(double[4][4] L, double[4] rhs, double[4] out) noexcept nogil:
    cdef int i, k
    cdef double acc
    for i in range(4):
        acc = rhs[i]
        for k in range(i):
            acc -= L[i][k] * out[k]
        out[i] = acc / L[i][i]


cdef inline void solve_upper4(double[4][4] L, double[4] rhs, double[4] out) noexcept nogil:
    # solves L.T @ out = rhs
    cdef int i, k
    cdef double acc
    for i in range(3, -1, -1):
        acc = rhs[i]
        for k in range(i + 1, 4):
            acc -= L[k][i] * out[k]
        out[i] = acc / L[i][i]


def poly_selfnorm_stats(noise, phases, theta_true, pbar, z):
    """See ``snmbounds._accel._fallback.poly_selfnorm_stats``."""
    cdef double[:, ::1] w = np.ascontiguousarray(noise, dtype=np.float64)
    cdef double[::1] phase = np.ascontiguousarray(phases, dtype=np.float64)
    cdef double[::1] theta = np.ascontiguousarray(theta_true, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(pbar, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)

    cdef Py_ssize_t R = w.shape[0]
    cdef Py_ssize_t T = w.shape[1]

    snorm_np = np.empty((R, T), dtype=np.float64)
    logdet_np = np.empty((R, T), dtype=np.float64)
    theta_hat_np = np.empty((R, 4), dtype=np.float64)
    V_np = np.empty((R, 4, 4), dtype=np.float64)
    cdef double[:, ::1] snorm = snorm_np
    cdef double[:, ::1] logdet = logdet_np
    cdef double[:, ::1] theta_hat = theta_hat_np
    cdef double[:, :, ::1] Vout = V_np

    cdef double[4][4] Pl, V, H, L
    cdef double[4] s, b, M, rhs, tmp, sol
    cdef double ld_pbar, ysum, r_t, u, y, acc
    cdef Py_ssize_t r, t
    cdef int i, j

    for i in range(4):
        for j in range(4):
            Pl[i][j] = P[i, j]
    chol4(Pl, L)
    ld_pbar = 0.0
    for i in range(4):
        ld_pbar += 2.0 * log(L[i][i])

    with nogil:
        for r in range(R):
            for i in range(4):
                s[i] = 0.0
                b[i] = 0.0
                for j in range(4):
                    V[i][j] = 0.0
            ysum = 0.0
            for t in range(T):
                r_t = 2.0 * sin(0.1 * t + phase[r])
                u = r_t - ysum
                if u > 1.0:
                    u = 1.0
                elif u < -1.0:
                    u = -1.0
                M[0] = 1.0
                M[1] = u
                M[2] = u * u
                M[3] = u * u * u
                y = w[r, t]
                for i in range(4):
                    y += M[i] * theta[i]
                for i in range(4):
                    for j in range(4):
                        V[i][j] += M[i] * M[j]
                    s[i] += M[i] * w[r, t]
                    b[i] += M[i] * y
                ysum += y

                for i in range(4):
                    for j in range(4):
                        H[i][j] = Pl[i][j] + V[i][j]
                chol4(H, L)
                acc = -ld_pbar
                for i in range(4):
                    acc += 2.0 * log(L[i][i])
                logdet[r, t] = acc
                for i in range(4):
                    rhs[i] = zv[i] + s[i]
                solve_lower4(L, rhs, tmp)
                acc = 0.0
                for i in range(4):
                    acc += tmp[i] * tmp[i]
                snorm[r, t] = acc

            solve_lower4(L, b, tmp)
            solve_upper4(L, tmp, sol)
            for i in range(4):
                theta_hat[r, i] = sol[i]
                for j in range(4):
                    Vout[r, i, j] = V[i][j]

    return snorm_np, logdet_np, theta_hat_np, V_np
