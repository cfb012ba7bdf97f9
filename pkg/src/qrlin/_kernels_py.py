"""Pure numpy versions of the hot table kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``QRLIN_PURE_PYTHON=1`` is set.  Signatures match the compiled module.
"""

import numpy as np

_NEWTON_ITERS = 80


def hermite_eval(t0, h, y, dy, tq):
    """Evaluate a cubic Hermite table on a uniform grid and its derivative.

    Outside the grid the table is continued affinely with the end slopes.
    """
    y = np.asarray(y, dtype=float)
    dy = np.asarray(dy, dtype=float)
    tq = np.asarray(tq, dtype=float)
    n = y.size
    u = (tq - t0) / h
    j = np.clip(np.floor(u).astype(np.int64), 0, n - 2)
    s = u - j
    y0, y1 = y[j], y[j + 1]
    m0, m1 = dy[j] * h, dy[j + 1] * h
    s2 = s * s
    s3 = s2 * s
    val = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 \
        + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1
    der = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0
           + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) / h
    t_end = t0 + (n - 1) * h
    lo = tq < t0
    hi = tq > t_end
    val = np.where(lo, y[0] + dy[0] * (tq - t0), val)
    der = np.where(lo, dy[0], der)
    val = np.where(hi, y[-1] + dy[-1] * (tq - t_end), val)
    der = np.where(hi, dy[-1], der)
    return val, der


def hermite_solve(t0, h, y, dy, wq):
    """Invert a strictly increasing Hermite table: find t with table(t) = w."""
    y = np.asarray(y, dtype=float)
    dy = np.asarray(dy, dtype=float)
    wq = np.asarray(wq, dtype=float)
    n = y.size
    t_end = t0 + (n - 1) * h
    j = np.clip(np.searchsorted(y, wq, side="right") - 1, 0, n - 2)
    y0, y1 = y[j], y[j + 1]
    m0, m1 = dy[j] * h, dy[j + 1] * h
    span = y1 - y0
    s = np.clip((wq - y0) / span, 0.0, 1.0)
    lo = np.zeros_like(s)
    hi = np.ones_like(s)
    for _ in range(_NEWTON_ITERS):
        s2 = s * s
        s3 = s2 * s
        f = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 \
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1 - wq
        fp = (6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 \
            + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1
        below = f < 0
        lo = np.where(below, s, lo)
        hi = np.where(below, hi, s)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = s - f / fp
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        s_new = np.where(bad, 0.5 * (lo + hi), step)
        s_new = np.where(f == 0, s, s_new)
        done = np.abs(s_new - s) <= 4e-16
        s = s_new
        if done.all():
            break
    t = t0 + (j + s) * h
    t = np.where(wq < y[0], t0 + (wq - y[0]) / dy[0], t)
    t = np.where(wq > y[-1], t_end + (wq - y[-1]) / dy[-1], t)
    return t


def fourier_eval(a, b, yq):
    """Evaluate ``a[0] + sum a[k] cos(k y) + b[k] sin(k y)`` and its derivative."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    yq = np.asarray(yq, dtype=float)
    k = np.arange(a.size, dtype=float)
    ky = np.multiply.outer(yq, k)
    c = np.cos(ky)
    s = np.sin(ky)
    val = c @ a + s @ b
    der = (c * k) @ b - (s * k) @ a
    return val, der


def fourier_solve(slope, a, b, wq):
    """Solve ``slope*y + p(y) = w`` for the increasing lift of a circle map.

    ``p`` is the periodic part given by Fourier coefficients.  Queries are
    reduced into the fundamental window ``[-pi, pi)`` by whole periods.
    """
    wq = np.asarray(wq, dtype=float)
    period = 2 * np.pi * slope
    q_lo = -np.pi * slope + fourier_eval(a, b, np.array([-np.pi]))[0][0]
    shift = np.floor((wq - q_lo) / period)
    v = wq - shift * period
    lo = np.full_like(v, -np.pi)
    hi = np.full_like(v, np.pi)
    y = -np.pi + (v - q_lo) / slope
    y = np.clip(y, -np.pi, np.pi)
    for _ in range(_NEWTON_ITERS):
        p, dp = fourier_eval(a, b, y)
        f = slope * y + p - v
        fp = slope + dp
        below = f < 0
        lo = np.where(below, y, lo)
        hi = np.where(below, hi, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = y - f / fp
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        y_new = np.where(bad, 0.5 * (lo + hi), step)
        y_new = np.where(f == 0, y, y_new)
        done = np.abs(y_new - y) <= 4e-16 * (1 + np.abs(y))
        y = y_new
        if done.all():
            break
    return y + 2 * np.pi * shift
