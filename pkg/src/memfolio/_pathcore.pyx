# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path-stepping core.

Twin of `_pathcore_py`: same signatures, same per-element expression trees,
same accumulation order, so results are bit-identical across backends.
Compiled without fp-contraction to keep IEEE semantics aligned with numpy.
"""

NAME = "cython"


def noise_block(double[:, ::1] xi, double[:, ::1] y, double[:, :, ::1] z,
                double[:, ::1] phi, double[:, ::1] add, double[:, ::1] gain,
                double sqrt_dt, double dt, double[:, :, ::1] xi_left,
                bint track_y):
    cdef Py_ssize_t n_steps = z.shape[0]
    cdef Py_ssize_t m = z.shape[1]
    cdef Py_ssize_t n = z.shape[2]
    cdef Py_ssize_t k, i, j
    cdef double x
    for k in range(n_steps):
        for i in range(m):
            for j in range(n):
                x = xi[i, j]
                xi_left[k, i, j] = x
                if track_y:
                    y[i, j] += sqrt_dt * z[k, i, j] - x * dt
                xi[i, j] = phi[k, j] * x + add[k, j] + gain[k, j] * z[k, i, j]


def wealth_block(double[::1] logx, double[:, :, ::1] z, double[:, :, ::1] xi_left,
                 double[::1] r, double[:, ::1] lam, double[:, ::1] a_coef,
                 double[:, ::1] d_coef, double sqrt_dt, double dt):
    cdef Py_ssize_t n_steps = z.shape[0]
    cdef Py_ssize_t m = z.shape[1]
    cdef Py_ssize_t n = z.shape[2]
    cdef Py_ssize_t k, i, j
    cdef double x, u, drift, stoch
    for k in range(n_steps):
        for i in range(m):
            drift = 0.0
            stoch = 0.0
            for j in range(n):
                x = xi_left[k, i, j]
                u = a_coef[k, j] + d_coef[k, j] * x
                drift += u * (lam[k, j] - x) - 0.5 * u * u
                stoch += u * z[k, i, j]
            logx[i] += (r[k] + drift) * dt + stoch * sqrt_dt


def quad_block(double[::1] acc, double[:, :, ::1] xi_left, double[:, ::1] xi_end,
               double[:, ::1] qdiag, double[:, ::1] hvec, double dt):
    cdef Py_ssize_t n_steps = xi_left.shape[0]
    cdef Py_ssize_t m = xi_left.shape[1]
    cdef Py_ssize_t n = xi_left.shape[2]
    cdef Py_ssize_t k, i, j
    cdef double xl, xr, left, right
    for k in range(n_steps):
        for i in range(m):
            left = 0.0
            right = 0.0
            for j in range(n):
                xl = xi_left[k, i, j]
                if k + 1 < n_steps:
                    xr = xi_left[k + 1, i, j]
                else:
                    xr = xi_end[i, j]
                left += 0.5 * qdiag[k, j] * xl * xl + hvec[k, j] * xl
                right += 0.5 * qdiag[k + 1, j] * xr * xr + hvec[k + 1, j] * xr
            acc[i] += 0.5 * dt * (left + right)
