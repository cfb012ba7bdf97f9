# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled table kernels: Hermite tables on uniform grids and Fourier lifts.

Same contracts as ``qrlin._kernels_py``.
"""

import numpy as np
from libc.math cimport floor, fabs, cos, sin, M_PI, isfinite

cdef int NEWTON_ITERS = 80


cdef inline void _cell(double s, double y0, double y1, double m0, double m1,
                       double *val, double *der) nogil:
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    val[0] = ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0
              + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1)
    der[0] = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0
              + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1)


def hermite_eval(double t0, double h, y, dy, tq):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] dyv = np.ascontiguousarray(dy, dtype=np.float64)
    tq_arr = np.ascontiguousarray(tq, dtype=np.float64)
    shape = tq_arr.shape
    cdef double[::1] tv = tq_arr.ravel()
    cdef Py_ssize_t n = yv.shape[0], m = tv.shape[0], i, j
    out = np.empty(m)
    dout = np.empty(m)
    cdef double[::1] ov = out, dv = dout
    cdef double t_end = t0 + (n - 1) * h, u, s, val, der
    with nogil:
        for i in range(m):
            if tv[i] < t0:
                ov[i] = yv[0] + dyv[0] * (tv[i] - t0)
                dv[i] = dyv[0]
            elif tv[i] > t_end:
                ov[i] = yv[n - 1] + dyv[n - 1] * (tv[i] - t_end)
                dv[i] = dyv[n - 1]
            else:
                u = (tv[i] - t0) / h
                j = <Py_ssize_t>floor(u)
                if j > n - 2:
                    j = n - 2
                if j < 0:
                    j = 0
                s = u - j
                _cell(s, yv[j], yv[j + 1], dyv[j] * h, dyv[j + 1] * h, &val, &der)
                ov[i] = val
                dv[i] = der / h
    return out.reshape(shape), dout.reshape(shape)


def hermite_solve(double t0, double h, y, dy, wq):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] dyv = np.ascontiguousarray(dy, dtype=np.float64)
    wq_arr = np.ascontiguousarray(wq, dtype=np.float64)
    shape = wq_arr.shape
    cdef double[::1] wv = wq_arr.ravel()
    cdef Py_ssize_t n = yv.shape[0], m = wv.shape[0], i, j, a, b, c, it
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double t_end = t0 + (n - 1) * h
    cdef double w, s, lo, hi, f, fp, step, m0, m1, y0, y1
    with nogil:
        for i in range(m):
            w = wv[i]
            if w < yv[0]:
                ov[i] = t0 + (w - yv[0]) / dyv[0]
                continue
            if w > yv[n - 1]:
                ov[i] = t_end + (w - yv[n - 1]) / dyv[n - 1]
                continue
            a = 0
            b = n - 1
            while b - a > 1:
                c = (a + b) // 2
                if yv[c] <= w:
                    a = c
                else:
                    b = c
            j = a
            y0 = yv[j]
            y1 = yv[j + 1]
            m0 = dyv[j] * h
            m1 = dyv[j + 1] * h
            s = (w - y0) / (y1 - y0)
            if s < 0:
                s = 0
            if s > 1:
                s = 1
            lo = 0
            hi = 1
            for it in range(NEWTON_ITERS):
                _cell(s, y0, y1, m0, m1, &f, &fp)
                f -= w
                if f == 0:
                    break
                if f < 0:
                    lo = s
                else:
                    hi = s
                step = s - f / fp
                if not isfinite(step) or step <= lo or step >= hi:
                    step = 0.5 * (lo + hi)
                if fabs(step - s) <= 4e-16:
                    s = step
                    break
                s = step
            ov[i] = t0 + (j + s) * h
    return out.reshape(shape)


cdef inline void _series(double[::1] a, double[::1] b, double y,
                         double *val, double *der) nogil:
    cdef Py_ssize_t k, K = a.shape[0]
    cdef double c1 = cos(y), s1 = sin(y), ck = 1.0, sk = 0.0, tmp
    cdef double v = a[0], d = 0.0
    for k in range(1, K):
        tmp = ck * c1 - sk * s1
        sk = sk * c1 + ck * s1
        ck = tmp
        v += a[k] * ck + b[k] * sk
        d += k * (b[k] * ck - a[k] * sk)
    val[0] = v
    der[0] = d


def fourier_eval(a, b, yq):
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    yq_arr = np.ascontiguousarray(yq, dtype=np.float64)
    shape = yq_arr.shape
    cdef double[::1] yv = yq_arr.ravel()
    cdef Py_ssize_t m = yv.shape[0], i
    out = np.empty(m)
    dout = np.empty(m)
    cdef double[::1] ov = out, dv = dout
    cdef double val, der
    with nogil:
        for i in range(m):
            _series(av, bv, yv[i], &val, &der)
            ov[i] = val
            dv[i] = der
    return out.reshape(shape), dout.reshape(shape)


def fourier_solve(double slope, a, b, wq):
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    wq_arr = np.ascontiguousarray(wq, dtype=np.float64)
    shape = wq_arr.shape
    cdef double[::1] wv = wq_arr.ravel()
    cdef Py_ssize_t m = wv.shape[0], i, it
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double period = 2 * M_PI * slope
    cdef double p, dp, q_lo, shift, v, y, lo, hi, f, step
    _series(av, bv, -M_PI, &p, &dp)
    q_lo = -M_PI * slope + p
    with nogil:
        for i in range(m):
            shift = floor((wv[i] - q_lo) / period)
            v = wv[i] - shift * period
            y = -M_PI + (v - q_lo) / slope
            if y < -M_PI:
                y = -M_PI
            if y > M_PI:
                y = M_PI
            lo = -M_PI
            hi = M_PI
            for it in range(NEWTON_ITERS):
                _series(av, bv, y, &p, &dp)
                f = slope * y + p - v
                if f == 0:
                    break
                if f < 0:
                    lo = y
                else:
                    hi = y
                step = y - f / (slope + dp)
                if not isfinite(step) or step <= lo or step >= hi:
                    step = 0.5 * (lo + hi)
                if fabs(step - y) <= 4e-16 * (1 + fabs(y)):
                    y = step
                    break
                y = step
            ov[i] = y + 2 * M_PI * shift
    return out.reshape(shape)
