# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sqrt, pow, INFINITY

cnp.import_array()


cdef inline double _ipow(double x, int n) noexcept nogil:
    # x**n for small n >= 0 by repeated squaring
    cdef double r = 1.0
    while n:
        if n & 1:
            r *= x
        x *= x
        n >>= 1
    return r


cdef inline int _small_int(double e) noexcept nogil:
    """``e`` as an int when it is a whole number in [1, 16], else -1."""
    if e >= 1.0 and e <= 16.0 and <int>e == e:
        return <int>e
    return -1


def lindley_sojourns(interarrivals, services):
    cdef double[::1] a = np.ascontiguousarray(interarrivals, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(services, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double w = 0.0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            if k > 0:
                w = w + s[k - 1] - a[k]
                if w < 0.0:
                    w = 0.0
            out[k] = w + s[k]
    return out_arr


def scene_interference(fn_d2, own_d2, angle, fade, counts, double alpha,
                       double eps):
    cdef double[::1] x = np.ascontiguousarray(fn_d2, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(own_d2, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(angle, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(fade, dtype=np.float64)
    cdef long long[::1] cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t m = cnt.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double pr = 0.5 * alpha * eps
    cdef double py = -0.5 * alpha
    cdef int ny = _small_int(-py)
    cdef double acc, y2, dist
    cdef Py_ssize_t i, j, pos = 0
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(pos, pos + cnt[i]):
                y2 = x[j] + r[j] - 2.0 * sqrt(x[j] * r[j]) * cos(g[j])
                if ny > 0:
                    dist = 1.0 / _ipow(y2, ny)
                else:
                    dist = pow(y2, py)
                acc += h[j] * pow(r[j], pr) * dist
            out[i] = acc
            pos += cnt[i]
    return out_arr


def h_kernel_grid(xs, double v, double tau, double alpha, double eps,
                  u_nodes, u_weights, y_nodes, y_weights):
    cdef double[::1] xv = np.ascontiguousarray(np.atleast_1d(xs), dtype=np.float64)
    cdef double[::1] un = np.ascontiguousarray(u_nodes, dtype=np.float64)
    cdef double[::1] uw = np.ascontiguousarray(u_weights, dtype=np.float64)
    cdef double[::1] yn = np.ascontiguousarray(y_nodes, dtype=np.float64)
    cdef double[::1] yw = np.ascontiguousarray(y_weights, dtype=np.float64)
    cdef Py_ssize_t nx = xv.shape[0], nu = un.shape[0], ny = yn.shape[0]
    cy_arr = np.cos(np.asarray(yn))
    cdef double[::1] cy = cy_arr
    out_arr = np.empty(nx, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double half = 0.5 * alpha
    cdef double vfac = pow(v, 1.0 - eps)
    cdef int nh = _small_int(half)
    cdef double x, u, num, sq, d, acc, row, ratio
    cdef Py_ssize_t i, a, b
    with nogil:
        for i in range(nx):
            x = xv[i]
            acc = 0.0
            for a in range(nu):
                u = un[a]
                num = pow(u, eps) * vfac
                sq = 2.0 * sqrt(x * u)
                row = 0.0
                for b in range(ny):
                    d = x + u - sq * cy[b]
                    if d > 0.0:
                        ratio = num / d
                        if nh > 0:
                            row += yw[b] / (1.0 + tau * _ipow(ratio, nh))
                        else:
                            row += yw[b] / (1.0 + tau * pow(ratio, half))
                acc += uw[a] * row
            out[i] = acc
    return out_arr
