"""Logarithmic lifts on the half-plane ``Re z < log R`` and their inverses."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BranchTrackingError, ConvergenceError, DegenerateDerivativeError, DomainError
from .infinitesimal import AsymptoticRep, CircleMap, circle_grid
from .maps import PlanarMap, evaluate, wirtinger
from .radial import RadialProfile

TWO_PI = 2 * np.pi
PATH_STEP = 0.05
MAX_REFINE = 12
NEWTON_ITERS = 60
NEWTON_HALVINGS = 20


def _out(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


@dataclass(frozen=True, eq=False)
class HalfPlaneLift:
    """Branch-tracked ``f~`` with ``exp(f~(z)) = f(e^z)`` on ``Re z < log_R``.

    The branch is pinned at the real anchor ``t0`` by requiring
    ``Im f~(t0) = arg f(e^{t0})`` in ``(-pi, pi]``, then shifted by
    ``2 pi i * branch`` if the caller realigns it.
    """

    source: PlanarMap
    degree: int
    log_R: float
    anchor: float
    base_shift: float
    branch: int = 0

    @property
    def structured(self):
        return self.source.log_parts(np.zeros(1, dtype=complex)) is not None

    def with_branch(self, branch):
        return replace(self, branch=int(branch))

    def _offset(self):
        return 1j * (self.base_shift + TWO_PI * self.branch)

    def _check(self, z):
        if np.any(z.real >= self.log_R):
            raise DomainError(f"lift evaluated outside Re z < {self.log_R}")

    def __call__(self, z):
        return self.parts(z)[0]

    def parts(self, z):
        """``(f~(z), f~_z(z), f~_zbar(z))``."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        got = self.source.log_parts(z)
        if got is not None:
            val, dz, dzb = got
            return _out(val + self._offset()), _out(dz), _out(dzb)
        val = _continue_log(self.source, self.anchor, z) + self._offset()
        dz, dzb = _chain_wirtinger(self.source, z)
        return _out(val), _out(dz), _out(dzb)

    def wirtinger(self, z):
        _, dz, dzb = self.parts(z)
        return dz, dzb

    def inverse(self, w, guess=None, *, sep=None, lam=None):
        return lift_inverse(self, w, guess, sep=sep, lam=lam)


def _chain_wirtinger(fmap, z):
    ez = np.exp(z)
    if np.any(ez == 0):
        raise DomainError("lift evaluated too deep for a sampled map")
    fz, fzb = wirtinger(fmap, ez)
    val = evaluate(fmap, ez)
    if np.any(val == 0):
        raise DegenerateDerivativeError("f(e^z) vanishes")
    return fz * ez / val, fzb * np.conj(ez) / val


def _path_increment(fmap, path):
    vals = evaluate(fmap, np.exp(path))
    if np.any(vals == 0):
        raise DegenerateDerivativeError("f(e^z) vanishes on the continuation path")
    return vals, np.angle(vals[1:] / vals[:-1])


def _continue_segment(fmap, start, end):
    """Total argument change of ``f(e^z)`` along the straight segment."""
    n = max(2, int(math.ceil(abs(end - start) / PATH_STEP)))
    for _ in range(MAX_REFINE):
        path = start + (end - start) * np.linspace(0, 1, n + 1)
        _, inc = _path_increment(fmap, path)
        if np.max(np.abs(inc), initial=0.0) < np.pi / 4:
            return float(inc.sum())
        n *= 2
    raise BranchTrackingError("argument jumps persist on the continuation path")


def _continue_log(fmap, anchor, z):
    """``log f(e^z)`` continued from the anchor: real axis first, then vertically."""
    flat = z.ravel()
    out = np.empty_like(flat)
    f_anchor = complex(evaluate(fmap, math.exp(anchor)))
    arg0 = cmath.phase(f_anchor)
    for i, p in enumerate(flat):
        if not np.isfinite(p) or math.exp(p.real) == 0:
            raise DomainError("lift evaluated too deep for a sampled map")
        arg = arg0 + _continue_segment(fmap, complex(anchor), complex(p.real))
        arg += _continue_segment(fmap, complex(p.real), p)
        val = complex(evaluate(fmap, np.exp(p)))
        out[i] = math.log(abs(val)) + 1j * arg
    return out.reshape(z.shape)


def make_lift(source, degree=None, log_R=None, anchor=None):
    """Lift of ``source`` on ``Re z < log_R`` with the anchored branch."""
    if log_R is None:
        log_R = math.log(source.domain_radius)
    if anchor is None:
        anchor = log_R - 1.0
    if degree is None:
        degree = source.index
    if degree is None:
        raise ValueError("lift needs the local index of the source map")
    target = cmath.phase(complex(evaluate(source, math.exp(anchor))))
    got = source.log_parts(np.array([anchor], dtype=complex))
    shift = 0.0
    if got is not None:
        have = float(got[0][0].imag)
        shift = TWO_PI * round((target - have) / TWO_PI)
    return HalfPlaneLift(source, int(degree), float(log_R), float(anchor), shift)


def log_lift(source, z, **kw):
    """``f~(z)`` for a map or representative (builds the anchored lift)."""
    return make_lift(source, **kw)(z)


def lift_wirtinger(lift, z):
    """``(f~_z, f~_zbar)`` at ``z``."""
    return lift.wirtinger(z)


def periodicity_defect(func, z, degree):
    """``max |F(z + 2 pi i) - F(z) - 2 pi i d|`` over the sample."""
    z = np.asarray(z, dtype=complex)
    return float(np.max(np.abs(func(z + TWO_PI * 1j) - func(z) - TWO_PI * 1j * degree)))


@dataclass(frozen=True, eq=False)
class SeparableLift:
    """``D~(x + iy) = rho~(x) + g1(y) + i g2(y)`` with exact separable inversion."""

    profile: RadialProfile
    circle: CircleMap
    log_R: float

    @property
    def degree(self):
        return self.circle.degree

    @property
    def theta_grid(self):
        return self.circle.theta_grid

    @property
    def g1_table(self):
        return self.circle.log_parts(self.theta_grid)[0]

    @property
    def g2_table(self):
        return self.circle.log_parts(self.theta_grid)[1]

    def _rep(self):
        return AsymptoticRep(self.circle, self.profile, math.exp(self.log_R))

    def parts(self, z):
        z = np.asarray(z, dtype=complex)
        val, dz, dzb = self._rep().log_parts(z)
        return _out(val), _out(dz), _out(dzb)

    def __call__(self, z):
        return self.parts(z)[0]

    def wirtinger(self, z):
        _, dz, dzb = self.parts(z)
        return dz, dzb

    def inverse(self, w):
        return dtilde_inverse(self, w)


def build_separable(rep):
    """Separable lift of an asymptotic representative."""
    return SeparableLift(rep.profile, rep.circle, math.log(rep.domain_radius))


def dtilde_inverse(sep, w, *, check=True):
    """Solve ``D~(z) = w``: first ``g2(y) = Im w``, then ``rho~(x) = Re w - g1(y)``."""
    w = np.asarray(w, dtype=complex)
    y = sep.circle.solve_arg(w.imag)
    g1, _, _, _ = sep.circle.log_parts(y)
    x = np.asarray(sep.profile.inverse(w.real - g1))
    z = x + 1j * y
    if check:
        res = np.abs(sep(z) - w)
        if np.any(res > 1e-10 + 1e-13 * np.abs(w)):
            raise ConvergenceError(f"separable inverse residual {float(np.max(res)):.3g}")
    return _out(z)


def lift_inverse(lift, w, guess=None, *, sep=None, lam=None, tol=1e-12):
    """Solve ``f~(z) = w`` by damped Newton on the real 2x2 system.

    The starting point is ``guess`` or, failing that, ``D~^{-1}(w)`` from
    ``sep``.  With ``lam > 1`` the repelling bound
    ``Re z < Re w + log(1/lam)`` is verified on the result.
    """
    w = np.asarray(w, dtype=complex)
    if guess is None:
        if sep is None:
            raise ValueError("lift_inverse needs a guess or a separable lift")
        guess = dtilde_inverse(sep, w, check=False)
    z = np.array(np.broadcast_to(np.asarray(guess, dtype=complex), w.shape), dtype=complex)
    z = np.minimum(z.real, lift.log_R - 1e-9) + 1j * z.imag
    val, a, b = (np.asarray(v) for v in lift.parts(z))
    res = w - val
    scale = tol * (1 + np.abs(w))
    # polish past the acceptance tolerance until rounding stops further progress
    goal = 4e-16 * (1 + np.abs(w))
    for _ in range(NEWTON_ITERS):
        todo = np.abs(res) > goal
        if not todo.any():
            break
        det = np.abs(a) ** 2 - np.abs(b) ** 2
        if np.any(det[todo] <= 0):
            raise DegenerateDerivativeError("singular lift Jacobian during inversion")
        step = np.where(todo, (np.conj(a) * res - b * np.conj(res)) / np.where(det > 0, det, 1), 0)
        t = np.ones(w.shape)
        accepted = ~todo
        new_z, new_val, new_a, new_b = z, val, a, b
        for _ in range(NEWTON_HALVINGS):
            cand = z + t * step
            cand = np.where(cand.real < lift.log_R, cand, z)
            cv, ca, cb = (np.asarray(v) for v in lift.parts(cand))
            better = (~accepted) & (np.abs(w - cv) < np.abs(res))
            new_z = np.where(better, cand, new_z)
            new_val = np.where(better, cv, new_val)
            new_a = np.where(better, ca, new_a)
            new_b = np.where(better, cb, new_b)
            accepted |= better
            if accepted.all():
                break
            t = np.where(accepted, t, 0.5 * t)
        if not accepted.any() or np.array_equal(new_z, z):
            break
        z, val, a, b = new_z, new_val, new_a, new_b
        res = w - val
    if np.any(np.abs(res) > scale):
        raise ConvergenceError(f"lift inversion stalled at residual {float(np.max(np.abs(res))):.3g}")
    if lam is not None and lam > 1:
        if np.any(z.real >= w.real + math.log(1 / lam) + 1e-9):
            raise ConvergenceError("inverse lift violates the repelling contraction bound")
    return _out(z)


def _simpson(vals, h):
    return h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())


def bip_integral(lift, t, n=256, rtol=1e-10):
    """``int_{-pi}^{pi} |d/ds f~(t + is)|^2 ds`` by composite Simpson, checked at ``2n``."""
    if t >= lift.log_R:
        raise DomainError("bip_integral needs t < log_R")

    def energy(m):
        s = np.linspace(-np.pi, np.pi, m + 1)
        dz, dzb = lift.wirtinger(t + 1j * s)
        speed = np.abs(1j * (np.asarray(dz) - np.asarray(dzb))) ** 2
        return _simpson(speed, TWO_PI / m)

    coarse, fine = energy(n), energy(2 * n)
    if abs(fine - coarse) > rtol * abs(fine):
        raise ConvergenceError(f"BIP quadrature unresolved at t={t}")
    return float(fine)


def align_branch(lift, sep, x):
    """Shift the lift's branch so that ``f~`` and ``D~`` agree on ``Re z = x``."""
    gap = complex(np.asarray(sep(complex(x))) - np.asarray(lift(complex(x))))
    return lift.with_branch(lift.branch + int(round(gap.imag / TWO_PI)))
