"""Mean radius of image disks, its logarithmic transform and bi-Lipschitz bounds.

Areas are integrated from the Jacobian in the log-radius variable
``s = log |z|``: Gauss-Legendre in ``s`` on unit panels, trapezoid in angle.
The substitution absorbs the power-law singularity of radial Jacobians at 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConvergenceError, DegenerateDerivativeError, DomainError
from .maps import jacobian, local_index

PANEL_CUTOFF = 1e-17
MAX_PANELS = 4000
JACOBIAN_SLACK = 1e-12


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _angles(n_theta):
    return 2 * np.pi * np.arange(n_theta) / n_theta


def _jac(fmap, z):
    # relative FD step so deep annuli are differentiated at their own scale
    jac = jacobian(fmap, z, r_floor=0.0)
    scale = np.max(np.abs(jac)) if jac.size else 0.0
    if np.any(jac < -JACOBIAN_SLACK * max(scale, 1e-300)):
        raise DegenerateDerivativeError("negative Jacobian sample: map is not quasiregular here")
    return np.maximum(jac, 0.0)


def annulus_integrals(fmap, s_edges, *, n_gauss=8, n_theta=128):
    """``int J dA`` over each annulus ``e^{s_i} < |z| < e^{s_{i+1}}``."""
    s_edges = np.asarray(s_edges, dtype=float)
    x, w = _gauss(n_gauss)
    a, b = s_edges[:-1], s_edges[1:]
    half = 0.5 * (b - a)
    s = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    theta = _angles(n_theta)
    z = np.exp(s[:, :, None] + 1j * theta[None, None, :])
    jac = _jac(fmap, z)
    circle = jac.mean(axis=2) * 2 * np.pi
    return (circle * np.exp(2 * s) * w[None, :]).sum(axis=1) * half


def circle_jacobian(fmap, t, *, n_theta=128):
    """``int_0^{2pi} J(e^{t + i theta}) d theta`` for each ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.exp(t[:, None] + 1j * _angles(n_theta)[None, :])
    return _jac(fmap, z).mean(axis=1) * 2 * np.pi


def _disk_integral(fmap, log_r, n_gauss, n_theta):
    total = 0.0
    top = log_r
    for _ in range(MAX_PANELS):
        part = float(annulus_integrals(fmap, [top - 1.0, top], n_gauss=n_gauss, n_theta=n_theta)[0])
        total += part
        top -= 1.0
        if part <= PANEL_CUTOFF * total:
            return total
    raise ConvergenceError("area integral did not decay toward the origin")


def _resolve_degree(fmap, r, degree):
    if degree is not None:
        return int(degree)
    if fmap.index is not None:
        return int(fmap.index)
    return local_index(fmap, 0.5 * r)


def image_area(fmap, r, *, degree=None, n_gauss=8, n_theta=128, rtol=1e-8):
    """Area of ``f(B(0, r))`` as ``(1/d) int_{B(0,r)} J_f``.

    Two resolutions are compared and the finer one is returned.
    """
    if not 0 < r < fmap.domain_radius:
        raise DomainError(f"radius {r} outside (0, {fmap.domain_radius})")
    d = _resolve_degree(fmap, r, degree)
    log_r = math.log(r)
    coarse = _disk_integral(fmap, log_r, n_gauss, n_theta)
    fine = _disk_integral(fmap, log_r, 2 * n_gauss, 2 * n_theta)
    if abs(fine - coarse) > rtol * abs(fine):
        raise ConvergenceError(
            f"area quadrature unresolved at r={r}: {coarse!r} vs {fine!r}")
    return fine / d


def mean_radius(fmap, r, **kw):
    """Radius of the disk whose area equals ``image_area(fmap, r)``."""
    return math.sqrt(image_area(fmap, r, **kw) / math.pi)


def series_mean_radius(coeffs, r, degree=None):
    """Mean radius of a holomorphic germ from its Taylor coefficients ``a_1..a_N``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size == 0 or not np.any(coeffs):
        raise ValueError("series_mean_radius needs a nonzero coefficient")
    k = np.arange(1, coeffs.size + 1)
    if degree is None:
        degree = int(k[np.nonzero(coeffs)[0][0]])
    keep = k >= degree
    total = np.sum(k[keep] * np.abs(coeffs[keep]) ** 2 * float(r) ** (2 * k[keep]))
    return math.sqrt(total / degree)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """``rho~(t) = log rho_f(e^t)`` tabulated with exact slopes on a uniform grid.

    Between nodes the table is a cubic Hermite interpolant; outside it is
    continued affinely with the end slopes.
    """

    t_grid: np.ndarray
    rho_tilde: np.ndarray
    slopes: np.ndarray
    L_estimate: float
    degree: int

    @property
    def t0(self):
        return float(self.t_grid[0])

    @property
    def step(self):
        return float(self.t_grid[1] - self.t_grid[0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val, _ = kernels.hermite_eval(self.t0, self.step, self.rho_tilde, self.slopes, t.ravel())
        return _out(val.reshape(t.shape))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        _, der = kernels.hermite_eval(self.t0, self.step, self.rho_tilde, self.slopes, t.ravel())
        return _out(der.reshape(t.shape))

    def second_derivative(self, t, h=1e-4):
        t = np.asarray(t, dtype=float)
        return (self.derivative(t + h) - self.derivative(t - h)) / (2 * h)

    def inverse(self, w):
        w = np.asarray(w, dtype=float)
        t = kernels.hermite_solve(self.t0, self.step, self.rho_tilde, self.slopes, w.ravel())
        return _out(t.reshape(w.shape))

    def rho(self, r):
        return np.exp(self(np.log(r)))

    def rho_inverse(self, rho):
        return np.exp(self.inverse(np.log(rho)))

    def local_quotients(self):
        return np.diff(self.rho_tilde) / np.diff(self.t_grid)

    def write_csv(self, stream):
        q = self.local_quotients()
        writer = csv.writer(stream)
        writer.writerow(["t", "rho_tilde", "local_quotient"])
        for i, (t, v) in enumerate(zip(self.t_grid, self.rho_tilde)):
            writer.writerow([repr(float(t)), repr(float(v)), repr(float(q[min(i, q.size - 1)]))])


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _lipschitz_from_quotients(q):
    return float(max(1.0, np.max(np.maximum(q, 1 / q))))


def profile_from_function(func, deriv, t_min, t_max, count, degree):
    """Profile from a closed-form ``rho~`` and its derivative (used for tests and oracles)."""
    t = np.linspace(t_min, t_max, count)
    vals = np.asarray(func(t), dtype=float)
    slopes = np.asarray(deriv(t), dtype=float)
    q = np.diff(vals) / np.diff(t)
    if np.any(q <= 0):
        raise ValueError("profile must be strictly increasing")
    return RadialProfile(t, vals, slopes, _lipschitz_from_quotients(q), int(degree))


def radial_profile(fmap, t_min=-40.0, t_max=None, count=None, *, degree=None,
                   n_gauss=8, n_theta=128, rtol=1e-9, check_stride=16):
    """Tabulate ``rho~`` on a uniform grid from cumulative annulus integrals.

    ``t_max`` defaults to ``log(R) - 0.05``; ``count`` defaults to a spacing of
    about 0.05.  Node slopes come from the circle integral of the Jacobian,
    so the Hermite table reproduces both value and derivative at every node.
    """
    log_R = math.log(fmap.domain_radius)
    if t_max is None:
        t_max = log_R - 0.05
    if t_max >= log_R:
        raise DomainError("t_max must lie below log(domain_radius)")
    if count is None:
        count = max(8, int(math.ceil((t_max - t_min) / 0.05)) + 1)
    if count < 8:
        raise ValueError("profile needs at least 8 nodes")
    d = _resolve_degree(fmap, math.exp(t_max), degree)
    t = np.linspace(t_min, t_max, count)

    base = _disk_integral(fmap, t[0], n_gauss, n_theta)
    base_fine = _disk_integral(fmap, t[0], 2 * n_gauss, 2 * n_theta)
    if abs(base - base_fine) > rtol * base_fine:
        raise ConvergenceError("area quadrature unresolved at the profile floor")
    pieces = annulus_integrals(fmap, t, n_gauss=n_gauss, n_theta=n_theta)
    idx = np.arange(0, count - 1, check_stride)
    fine = annulus_integrals(fmap, np.stack([t[idx], t[idx + 1]], axis=1).ravel(),
                             n_gauss=2 * n_gauss, n_theta=2 * n_theta)[::2]
    if np.any(np.abs(fine - pieces[idx]) > rtol * np.abs(fine) + 1e-300):
        raise ConvergenceError("annulus quadrature unresolved on the profile grid")

    area = (base_fine + np.concatenate([[0.0], np.cumsum(pieces)])) / d
    if np.any(area <= 0):
        raise DegenerateDerivativeError("vanishing image area")
    d_area = np.exp(2 * t) * circle_jacobian(fmap, t, n_theta=n_theta) / d
    rho_t = 0.5 * np.log(area / math.pi)
    slopes = d_area / (2 * area)
    q = np.diff(rho_t) / np.diff(t)
    if np.any(q <= 0):
        raise ConvergenceError("mean radius is not strictly increasing on the grid")
    return RadialProfile(t, rho_t, slopes, _lipschitz_from_quotients(q), d)
