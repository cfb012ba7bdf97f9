"""Classical linearizing coordinates used as independent references.

Königs and Böttcher coordinates for holomorphic germs, and the radial
conjugacy ``H(r e^{i theta}) = h(r) e^{i theta}`` that straightens a
representative's mean-radius profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .maps import HolomorphicSeries
from .radial import RadialProfile


def _series_eval(coeffs, z):
    out = np.zeros_like(z, dtype=complex)
    for c in reversed(coeffs):
        out = out * z + c
    return out * z


def invert_series(coeffs, order=40):
    """Taylor coefficients ``b_1..b_order`` of the local inverse of ``sum a_k z^k`` (``a_1 != 0``)."""
    a = np.zeros(order + 1, dtype=complex)
    src = np.asarray(coeffs, dtype=complex)[:order]
    a[1:1 + src.size] = src
    if a[1] == 0:
        raise ValueError("series reversion needs a nonzero linear coefficient")
    b = np.zeros(order + 1, dtype=complex)
    b[1] = 1 / a[1]
    for _ in range(order):
        # g = (w - sum_{k>=2} a_k g^k) / a_1, truncated at ``order``
        acc = np.zeros(order + 1, dtype=complex)
        power = b.copy()
        for k in range(2, order + 1):
            power = np.convolve(power, b)[:order + 1]
            if a[k] != 0:
                acc += a[k] * power
        new = -acc / a[1]
        new[1] += 1 / a[1]
        if np.array_equal(new, b):
            break
        b = new
    return tuple(b[1:])


def koenigs(coeffs, lam, z, n_max=400, tol=1e-15):
    """``lim lam^{-n} f^n(z)`` for ``f(z) = sum a_k z^k`` with ``0 < |lam| < 1``."""
    lam = complex(lam)
    if not 0 < abs(lam) < 1:
        raise ValueError("Königs limit needs 0 < |lambda| < 1")
    z = np.asarray(z, dtype=complex)
    w = z.copy()
    prev = z.copy()
    scale = 1.0 + 0j
    for n in range(1, n_max + 1):
        w = _series_eval(coeffs, w)
        scale /= lam
        cur = w * scale
        if np.all(np.abs(cur - prev) <= tol * np.maximum(np.abs(cur), 1e-300)):
            return cur[()] if cur.ndim == 0 else cur
        prev = cur
    raise ConvergenceError(f"Königs iteration did not settle in {n_max} steps")


def boettcher(lift, d, z, n_max=60, tol=1e-15):
    """``exp(lim f~^n(log z) / d^n)`` for a superattracting holomorphic germ of index ``d``."""
    if d < 2:
        raise ValueError("Böttcher coordinate needs local index d >= 2")
    z = np.asarray(z, dtype=complex)
    w = np.log(z)
    prev = w.copy()
    for n in range(1, n_max + 1):
        w = np.asarray(lift(w))
        cur = w / d ** n
        if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
            out = np.exp(cur)
            return out[()] if out.ndim == 0 else out
        prev = cur
    raise ConvergenceError(f"Böttcher iteration did not settle in {n_max} steps")


def profile_multiplier(profile):
    """``rho'(0)`` read off the deepest profile node."""
    return math.exp(float(profile.rho_tilde[0] - profile.t_grid[0]))


def sternberg_radial(profile, mode, r, n_max=400, tol=1e-14, lam=None):
    """Radial conjugacy ``h`` straightening the profile.

    ``koenigs``: ``h(rho(r)) = lam h(r)`` via ``log h = lim rho~^n - n log lam``
    (through ``rho~^{-1}`` when ``lam > 1``).  ``boettcher``:
    ``h(rho(r)) = h(r)^d`` via ``log h = lim rho~^n / d^n``.
    """
    t = np.log(np.asarray(r, dtype=float))
    out = np.exp(_h_tilde(profile, mode, t, n_max, tol, lam))
    return out[()] if out.ndim == 0 else out


def _h_tilde(profile, mode, t, n_max, tol, lam):
    if mode == "koenigs":
        lam = profile_multiplier(profile) if lam is None else float(lam)
        if lam <= 0 or lam == 1:
            raise ValueError("Königs mode needs a multiplier other than 0 and 1")
        step = profile if lam < 1 else profile.inverse
        sign = 1.0 if lam < 1 else -1.0
        w, prev = t.copy(), t.copy()
        for n in range(1, n_max + 1):
            w = np.asarray(step(w))
            cur = w - sign * n * math.log(lam)
            if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
                return cur
            prev = cur
        raise ConvergenceError("radial Königs limit did not settle")
    if mode == "boettcher":
        d = profile.degree
        if d < 2:
            raise ValueError("Böttcher mode needs degree >= 2")
        w, prev = t.copy(), t.copy()
        for n in range(1, n_max + 1):
            w = np.asarray(profile(w))
            cur = w / d ** n
            if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
                return cur
            prev = cur
        raise ConvergenceError("radial Böttcher limit did not settle")
    raise ValueError(f"unknown mode {mode!r}")


def _h_tilde_inverse(profile, mode, s, n_max, tol, lam):
    if mode == "koenigs":
        lam = profile_multiplier(profile) if lam is None else float(lam)
        step = profile.inverse if lam < 1 else profile
        sign = 1.0 if lam < 1 else -1.0
        prev = s.copy()
        for n in range(1, n_max + 1):
            w = s + sign * n * math.log(lam)
            for _ in range(n):
                w = np.asarray(step(w))
            if np.all(np.abs(w - prev) <= tol * np.maximum(1.0, np.abs(w))):
                return w
            prev = w
        raise ConvergenceError("inverse radial Königs limit did not settle")
    d = profile.degree
    prev = s.copy()
    for n in range(1, n_max + 1):
        w = s * float(d) ** n
        for _ in range(n):
            w = np.asarray(profile.inverse(w))
        if np.all(np.abs(w - prev) <= tol * np.maximum(1.0, np.abs(w))):
            return w
        prev = w
    raise ConvergenceError("inverse radial Böttcher limit did not settle")


@dataclass(frozen=True, eq=False)
class RadialConjugacy:
    """``H(r e^{i theta}) = h(r) e^{i theta}`` built from a profile."""

    profile: RadialProfile
    mode: str
    lam: float = None
    tol: float = 1e-14

    def h(self, r):
        return sternberg_radial(self.profile, self.mode, r, tol=self.tol, lam=self.lam)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        safe = np.where(r == 0, 1.0, r)
        out = np.where(r == 0, 0, np.asarray(self.h(safe)) * z / safe)
        return out[()] if out.ndim == 0 else out

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        s = np.abs(w)
        safe = np.where(s == 0, 1.0, s)
        r = np.exp(_h_tilde_inverse(self.profile, self.mode, np.log(safe), 400, self.tol, self.lam))
        out = np.where(s == 0, 0, r * w / safe)
        return out[()] if out.ndim == 0 else out


def compare_full(psi_values, phi_values, H, *, return_constant=False):
    """``sup |c H(psi) - phi| / sup |phi|`` with the least-squares complex ``c``."""
    u = np.asarray(H(np.asarray(psi_values, dtype=complex)))
    phi = np.asarray(phi_values, dtype=complex)
    norm = np.vdot(u, u).real
    if norm == 0 or not np.isfinite(norm):
        raise ConvergenceError("degenerate normalization fit")
    c = np.vdot(u, phi) / norm
    err = float(np.max(np.abs(c * u - phi)) / np.max(np.abs(phi)))
    return (err, complex(c)) if return_constant else err


def oracle_for(fmap, lift, mode):
    """Classical coordinate for a holomorphic germ, as ``(callable, radial mode)``.

    Attracting ``d = 1``: Königs of ``f``; repelling ``d = 1``: Königs of the
    local inverse branch; ``d >= 2``: Böttcher in log coordinates.
    """
    if not isinstance(fmap, HolomorphicSeries):
        raise ValueError("oracle comparison needs a holomorphic_series map")
    d = fmap.order
    if d >= 2:
        return (lambda z: boettcher(lift, d, z)), "boettcher"
    a1 = fmap.coeffs[0]
    if abs(a1) < 1:
        return (lambda z: koenigs(fmap.coeffs, a1, z)), "koenigs"
    inv = invert_series(fmap.coeffs)
    return (lambda z: koenigs(inv, 1 / a1, z)), "koenigs"
