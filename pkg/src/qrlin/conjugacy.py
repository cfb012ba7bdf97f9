"""The linearizing iteration in logarithmic coordinates and its diagnostics.

Attracting mode evaluates ``psi~_k = D~^{-k} o f~^k`` pointwise; repelling
mode evaluates ``psi~_k = D~^k o f~^{-k}``.  No grid interpolation is used,
so errors do not compound across ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, DomainEscapeError, HypothesisError
from .estimates import envelope_fit, sample_window
from .lift import dtilde_inverse, lift_inverse

GAP_FLOOR = 1e-13
MU_FLOOR = 1e-8
FD_STEP = 1e-5


def probe_grid(window, n=33):
    """``n x n`` lattice over ``[t_lo, t_hi] x [-pi, pi]``."""
    x = np.linspace(window[0], window[1], n)
    y = np.linspace(-np.pi, np.pi, n)
    return (x[None, :] + 1j * y[:, None]).ravel()


def probe_disk(radius, n_r=12, n_theta=24):
    """Polar sample of the punctured disk ``0 < |z| <= radius``."""
    r = np.geomspace(radius * 1e-3, radius, n_r)
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def _forward(lift, w):
    if np.any(w.real >= lift.log_R):
        raise DomainEscapeError("forward orbit left the half-plane; the map is not attracting here")
    return np.asarray(lift(w))


def _backward(lift, sep, w, lam):
    guess = np.asarray(dtilde_inverse(sep, w, check=False))
    if np.any(guess.real >= lift.log_R):
        raise DomainEscapeError("inverse orbit left the half-plane; the map is not repelling here")
    try:
        p = np.asarray(lift_inverse(lift, w, guess, lam=lam))
    except ConvergenceError as exc:
        raise DomainEscapeError(f"inverse orbit cannot be continued: {exc}") from exc
    return p


class _Orbit:
    """Incremental evaluation of ``psi~_k`` at fixed points for ``k = 1, 2, ...``."""

    def __init__(self, lift, sep, z, mode, lam):
        self.lift, self.sep, self.mode, self.lam = lift, sep, mode, lam
        self.point = np.asarray(z, dtype=complex)
        self.k = 0

    def step(self):
        if self.mode == "attracting":
            self.point = _forward(self.lift, self.point)
        else:
            self.point = _backward(self.lift, self.sep, self.point, self.lam)
        self.k += 1
        w = self.point
        for _ in range(self.k):
            w = np.asarray(self.sep.inverse(w) if self.mode == "attracting" else self.sep(w))
        return w


def psi_tilde_eval(lift, sep, z, k, mode="attracting", lam=None):
    """``psi~_k(z)``: ``D~^{-k}(f~^k z)`` (attracting) or ``D~^k(f~^{-k} z)`` (repelling)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    z = np.asarray(z, dtype=complex)
    w = z
    for _ in range(k):
        w = _forward(lift, w) if mode == "attracting" else _backward(lift, sep, w, lam)
    for _ in range(k):
        w = np.asarray(sep.inverse(w) if mode == "attracting" else sep(w))
    return w[()] if w.ndim == 0 else w


@dataclass
class ConjugacyResult:
    """Outcome of the iteration on the probe lattice."""

    mode: str
    k_used: int
    lift: object = field(repr=False)
    sep: object = field(repr=False)
    lam: float
    window: tuple
    probe: np.ndarray = field(repr=False)
    error_history: list
    gaps: list
    ratios: list
    converged: bool
    bound_check: bool
    bound_applicable: bool
    first_step_check: bool
    bound_margin: float = math.inf
    residual: float = math.nan
    mu_decay: tuple = (math.nan, math.nan)

    @property
    def radius(self):
        return math.exp(self.lift.log_R)

    def psi_tilde(self, z):
        return psi_tilde_eval(self.lift, self.sep, z, self.k_used, self.mode, self.lam)

    def psi(self, z):
        return descend(self, z)

    def summary(self):
        from .estimates import _jsonable
        return _jsonable(dict(
            mode=self.mode, k_used=self.k_used, converged=self.converged,
            residual=self.residual, bound_check=self.bound_check,
            bound_applicable=self.bound_applicable, first_step_check=self.first_step_check,
            bound_margin=self.bound_margin, mu_decay=list(self.mu_decay),
            error_history=self.error_history, gaps=self.gaps, ratios=self.ratios,
            window=list(self.window), lam=self.lam))


def _contraction(report, mode):
    lam = report.lam if mode == "attracting" else 1 / report.lam
    if math.isinf(report.alpha):
        return 0.0
    return report.L * lam ** report.alpha


def iterate(lift, sep, report, probe=None, *, mode="attracting", tol=1e-10, k_max=60,
            patience=5):
    """Increase ``k`` until ``sup |psi~_k - psi~_{k-1}| < tol`` on the probe set.

    ``psi~_0`` is the identity.  The uniform bound
    ``|E_k| <= L T1 e^{alpha x} / (1 - L lam^alpha)`` and the first-step
    bound ``|E_1| <= L T1 e^{alpha x}`` are checked at every probe point when
    ``T1 > 0``; a violation is recorded, not raised.
    """
    if mode not in ("attracting", "repelling"):
        raise ValueError(f"unknown mode {mode!r}")
    window = tuple(report.window)
    if probe is None:
        probe = probe_grid(window)
    probe = np.asarray(probe, dtype=complex)
    lam_orbit = report.lam if mode == "repelling" else None
    orbit = _Orbit(lift, sep, probe, mode, lam_orbit)
    rate = _contraction(report, mode)
    applicable = report.T1 > 0 and rate < 1
    envelope = None
    if applicable:
        first = report.L * report.T1 * np.exp(report.alpha * probe.real)
        envelope = first / (1 - rate)
    prev = probe
    errors, gaps, ratios = [], [], []
    bound_ok = first_ok = True
    margin = math.inf
    best, stale = math.inf, 0
    converged = False
    for k in range(1, k_max + 1):
        cur = orbit.step()
        err = np.abs(cur - probe)
        gap = float(np.max(np.abs(cur - prev)))
        errors.append(float(err.max()))
        if gaps and gaps[-1] > GAP_FLOOR:
            ratios.append(gap / gaps[-1])
        gaps.append(gap)
        if envelope is not None:
            slack = float(np.min(envelope - err))
            margin = min(margin, slack)
            bound_ok &= slack >= 0
            if k == 1:
                first_ok = bool(np.all(err <= first))
        prev = cur
        if gap < tol:
            converged = True
            break
        if gap < best:
            best, stale = gap, 0
        else:
            stale += 1
            if stale >= patience:
                raise ConvergenceError(f"no Cauchy decrease over {patience} steps (gap {gap:.3g})")
    if not converged:
        raise ConvergenceError(f"gap {gaps[-1]:.3g} above tolerance after k_max={k_max}")
    return ConjugacyResult(
        mode=mode, k_used=k, lift=lift, sep=sep, lam=report.lam, window=window, probe=probe,
        error_history=errors, gaps=gaps, ratios=ratios, converged=converged,
        bound_check=bool(bound_ok), bound_applicable=bool(applicable),
        first_step_check=bool(first_ok), bound_margin=margin)


def iterate_attracting(lift, sep, report, probe=None, tol=1e-10, k_max=60):
    return iterate(lift, sep, report, probe, mode="attracting", tol=tol, k_max=k_max)


def iterate_repelling(lift, sep, report, probe=None, tol=1e-10, k_max=60):
    return iterate(lift, sep, report, probe, mode="repelling", tol=tol, k_max=k_max)


def descend(result, z):
    """``psi(z) = exp(psi~(log z))`` with ``psi(0) = 0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= result.radius):
        raise DomainError(f"descend needs |z| < {result.radius}")
    safe = np.where(z == 0, 1, z)
    out = np.exp(np.asarray(result.psi_tilde(np.log(safe))))
    out = np.where(z == 0, 0, out)
    return out[()] if out.ndim == 0 else out


def residual(result, fmap, rep, disk):
    """``sup |psi(f(z)) - D(psi(z))| / sup |D(psi(z))|`` over the disk sample."""
    disk = np.asarray(disk, dtype=complex)
    lhs = result.psi(fmap(disk))
    rhs = rep(result.psi(disk))
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


def psi_dilatation(result, z, h=FD_STEP):
    """``mu`` of ``psi~`` by second-order central differences."""
    z = np.asarray(z, dtype=complex)
    stencil = np.concatenate([z + h, z - h, z + 1j * h, z - 1j * h])
    vals = np.asarray(result.psi_tilde(stencil)).reshape(4, -1)
    fx = (vals[0] - vals[1]) / (2 * h)
    fy = (vals[2] - vals[3]) / (2 * h)
    dz = 0.5 * (fx - 1j * fy)
    dzb = 0.5 * (fx + 1j * fy)
    return dzb / dz


def dilatation_decay(result, window=None, count=200, seed=0):
    """Envelope ``|mu_psi~| <= C e^{nu x}``; ``(0, inf)`` when ``mu`` is below noise everywhere.

    Samples with ``|mu| < 1e-8`` are finite-difference noise and are dropped.
    A non-decaying envelope is reported as ``nu = 0``.
    """
    window = tuple(result.window if window is None else window)
    rng = np.random.default_rng(seed)
    z = sample_window(window, count, rng)
    mu = np.abs(psi_dilatation(result, z))
    keep = mu >= MU_FLOOR
    if keep.sum() < 20 or np.ptp(z.real[keep]) < 3:
        return 0.0, math.inf
    try:
        fit = envelope_fit(z.real[keep], mu[keep], "c", zero_floor=0.0)
    except HypothesisError:
        return math.inf, 0.0
    return fit.T, fit.exponent


def telescoping_defect(result, z, k):
    """``max |D~(psi~_k(z)) - psi~_{k-1}(f~(z))|`` (attracting), or the repelling analogue."""
    z = np.asarray(z, dtype=complex)
    lift, sep, mode, lam = result.lift, result.sep, result.mode, result.lam
    if mode == "attracting":
        lhs = np.asarray(sep(psi_tilde_eval(lift, sep, z, k, mode)))
        fz = np.asarray(lift(z))
        rhs = fz if k == 1 else np.asarray(psi_tilde_eval(lift, sep, fz, k - 1, mode))
    else:
        lhs = np.asarray(sep.inverse(psi_tilde_eval(lift, sep, z, k, mode, lam)))
        fz = _backward(lift, sep, z, lam)
        rhs = fz if k == 1 else np.asarray(psi_tilde_eval(lift, sep, fz, k - 1, mode, lam))
    return float(np.max(np.abs(lhs - rhs)))
