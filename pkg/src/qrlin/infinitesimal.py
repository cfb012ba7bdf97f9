"""Rescalings of a map at the origin, its generalized derivative and the asymptotic representative."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, NonSimpleError, WindingError
from .maps import PlanarMap, evaluate
from .radial import RadialProfile, mean_radius

SIMPLE_TOL = 1e-4
COEFF_FLOOR = 1e-15


def default_scales(radius, count=12):
    """Geometric scales ``R/4 * 2^-k`` for ``k = 0..count-1``."""
    return tuple(radius / 4 * 0.5 ** k for k in range(count))


def circle_grid(count):
    """``count`` uniform angles on ``[-pi, pi)``; index ``count // 2`` is 0."""
    return -np.pi + 2 * np.pi * np.arange(count) / count


def _rho(fmap, r, profile):
    if profile is not None:
        return float(profile.rho(r))
    return mean_radius(fmap, r)


def rescale(fmap, r, z, profile=None):
    """``f(r z) / rho_f(r)``; ``rho_f`` comes from ``profile`` when one is given."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(r * z) >= fmap.domain_radius):
        raise DomainError("rescaled point outside the domain")
    return evaluate(fmap, r * z) / _rho(fmap, r, profile)


def _neville(xs, ys, x0=0.0):
    """Value at ``x0`` of the interpolating polynomial through ``(xs, ys)`` (rows)."""
    p = [np.array(y, dtype=complex) for y in ys]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            p[i] = ((x0 - xs[j]) * p[i] + (xs[i] - x0) * p[i + 1]) / (xs[i] - xs[j])
    return p[0]


def _fourier(samples):
    """Real Fourier coefficients of samples on :func:`circle_grid`."""
    n = samples.size
    coef = np.fft.rfft(samples)
    sign = (-1.0) ** np.arange(coef.size)
    a = 2 / n * sign * coef.real
    b = -2 / n * sign * coef.imag
    a[0] = coef[0].real / n
    b[0] = 0.0
    if n % 2 == 0:  # drop the Nyquist mode, it is not resolvable as a sine/cosine pair
        a, b = a[:-1], b[:-1]
    big = np.nonzero((np.abs(a) > COEFF_FLOOR) | (np.abs(b) > COEFF_FLOOR))[0]
    keep = int(big[-1]) + 1 if big.size else 1
    return a[:keep].copy(), b[:keep].copy()


@dataclass(frozen=True, eq=False)
class CircleMap:
    """Generalized derivative ``g`` restricted to the unit circle.

    ``log g(e^{iy}) = g1(y) + i g2(y)`` with ``g1`` periodic and
    ``g2(y) = degree * y + periodic``; both periodic parts are stored as
    truncated real Fourier series.
    """

    theta_grid: np.ndarray
    values: np.ndarray
    degree: int
    defect: float
    simple: bool
    g1_coeffs: tuple
    g2_coeffs: tuple
    distances: tuple = field(default=(), repr=False)
    extrapolated: bool = False

    def log_parts(self, y):
        """``(g1, g2, g1', g2')`` at real ``y``."""
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        g1, dg1 = kernels.fourier_eval(*self.g1_coeffs, flat)
        p2, dp2 = kernels.fourier_eval(*self.g2_coeffs, flat)
        shape = y.shape
        return (g1.reshape(shape), (self.degree * flat + p2).reshape(shape),
                dg1.reshape(shape), (self.degree + dp2).reshape(shape))

    def __call__(self, theta):
        g1, g2, _, _ = self.log_parts(theta)
        return np.exp(g1 + 1j * g2)

    def solve_arg(self, v):
        """The ``y`` with ``g2(y) = v`` (``g2`` is increasing)."""
        v = np.asarray(v, dtype=float)
        a, b = self.g2_coeffs
        return kernels.fourier_solve(float(self.degree), a, b, v.ravel()).reshape(v.shape)

    def write_csv(self, stream):
        writer = csv.writer(stream)
        writer.writerow(["theta", "re_g", "im_g", "unwrapped_arg"])
        _, g2, _, _ = self.log_parts(self.theta_grid)
        for t, v, arg in zip(self.theta_grid, self.values, g2):
            writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)), repr(float(arg))])


def _circle_from_samples(values, theta, defect, simple, distances, extrapolated):
    if np.any(values == 0) or not np.all(np.isfinite(values)):
        raise WindingError("generalized derivative vanishes on the circle")
    n = theta.size
    arg = np.unwrap(np.angle(values))
    jump = np.angle(values[0] / values[-1])
    total = arg[-1] - arg[0] + jump
    degree = int(round(total / (2 * np.pi)))
    if degree < 1 or abs(total - 2 * np.pi * degree) > 1e-6:
        raise WindingError(f"circle map winding {total / (2 * np.pi)} is not a positive integer")
    mid = n // 2
    arg = arg - 2 * np.pi * np.round((arg[mid] - np.angle(values[mid])) / (2 * np.pi))
    g1 = np.log(np.abs(values))
    g2_periodic = arg - degree * theta
    a1, b1 = _fourier(g1)
    a2, b2 = _fourier(g2_periodic)
    return CircleMap(theta, values, degree, float(defect), bool(simple), (a1, b1), (a2, b2),
                     tuple(distances), extrapolated)


def _rescalings(fmap, r_seq, circle_count, profile):
    theta = circle_grid(circle_count)
    unit = np.exp(1j * theta)
    rows = np.array([rescale(fmap, r, unit, profile) for r in r_seq])
    dist = np.max(np.abs(np.diff(rows, axis=0)), axis=1)
    return theta, rows, dist


def _simplicity(dist, tol):
    tail = dist[-4:]
    defect = float(max(dist[-2:]))
    decreasing = bool(np.all(np.diff(tail) <= 1e-13 + 1e-9 * tail[:-1]))
    return defect, defect < tol and decreasing


def generalized_derivative(fmap, r_seq=None, circle_count=512, *, profile=None,
                           extrapolate=True, tol=SIMPLE_TOL):
    """Limit of the rescalings on the unit circle along ``r_seq``.

    The finest iterate is refined by polynomial extrapolation in ``r`` to
    ``r = 0`` from the last four scales when two neighbouring extrapolants
    agree; otherwise the finest iterate is returned unchanged.
    """
    if r_seq is None:
        r_seq = default_scales(fmap.domain_radius)
    r_seq = np.asarray(r_seq, dtype=float)
    if r_seq.size < 2 or np.any(np.diff(r_seq) >= 0):
        raise ValueError("r_seq must be strictly decreasing with at least two terms")
    theta, rows, dist = _rescalings(fmap, r_seq, circle_count, profile)
    defect, simple = _simplicity(dist, tol)
    values = rows[-1]
    used = False
    if extrapolate and r_seq.size >= 5 and dist[-1] > 1e-13:
        best = _neville(r_seq[-4:], rows[-4:])
        prev = _neville(r_seq[-5:-1], rows[-5:-1])
        if np.max(np.abs(best - prev)) < 0.1 * dist[-1]:
            values, used = best, True
    return _circle_from_samples(values, theta, defect, simple, dist, used)


def simplicity_check(fmap, r_seq=None, *, profile=None, circle_count=512, tol=SIMPLE_TOL):
    """``(simple, defect)``: the rescalings settle to one circle map.

    ``defect`` is the larger of the two finest consecutive sup-distances;
    the map counts as simple when it is below ``tol`` and the distances
    are non-increasing over the finest scales.
    """
    if r_seq is None:
        r_seq = default_scales(fmap.domain_radius)
    _, _, dist = _rescalings(fmap, np.asarray(r_seq, dtype=float), circle_count, profile)
    defect, simple = _simplicity(dist, tol)
    return simple, defect


@dataclass(frozen=True, eq=False)
class AsymptoticRep(PlanarMap):
    """``D(z) = rho_f(|z|) g(z/|z|)`` assembled from a profile and a circle map."""

    circle: CircleMap
    profile: RadialProfile
    domain_radius: float = 1.0

    kind = "asymptotic_rep"

    @property
    def index(self):
        return self.circle.degree

    def log_parts(self, w):
        """``(D~(w), D~_z, D~_zbar)`` for the separable lift ``rho~(x) + g1(y) + i g2(y)``."""
        w = np.asarray(w, dtype=complex)
        x, y = w.real, w.imag
        g1, g2, dg1, dg2 = self.circle.log_parts(y)
        rt = self.profile(x)
        drt = self.profile.derivative(x)
        val = rt + g1 + 1j * g2
        dz = 0.5 * (drt + dg2 - 1j * dg1)
        dzb = 0.5 * (drt - dg2 + 1j * dg1)
        return val, dz, dzb

    def _eval(self, z):
        z = np.asarray(z, dtype=complex)
        safe = np.where(z == 0, 1, z)
        val, _, _ = self.log_parts(np.log(safe))
        return np.where(z == 0, 0, np.exp(val))

    def wirtinger_exact(self, z):
        z = np.asarray(z, dtype=complex)
        val, dz, dzb = self.log_parts(np.log(z))
        big = np.exp(val)
        return big * dz / z, big * dzb / np.conj(z)


def asymptotic_rep(fmap, profile, circle):
    """Package ``D``; refuses circle maps that failed the simplicity test."""
    if not circle.simple:
        raise NonSimpleError(f"rescalings do not settle (defect {circle.defect:.3g})")
    if circle.degree != profile.degree:
        raise WindingError("circle map degree differs from the profile degree")
    return AsymptoticRep(circle, profile, fmap.domain_radius)
