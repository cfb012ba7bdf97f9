"""Planar map germs fixing the origin, Wirtinger calculus and fixed-point taxonomy.

Every map is vectorised: calls accept scalars or numpy arrays of complex
points.  Families that admit a closed form for ``log f(e^w)`` expose it via
:meth:`PlanarMap.log_parts`; the lift module uses it to evaluate the
logarithmic transform deep in the left half-plane without underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BranchPointError,
    DegenerateDerivativeError,
    DomainError,
    IndexMismatchError,
    WindingError,
)

BRANCH_FLOOR = 1e-9


def _log1p_complex(u):
    """Accurate ``log(1 + u)`` for complex ``u`` (principal branch)."""
    u = np.asarray(u, dtype=complex)
    re = 0.5 * np.log1p(2 * u.real + (u.real ** 2 + u.imag ** 2))
    im = np.arctan2(u.imag, 1 + u.real)
    return re + 1j * im


def _horner(coeffs, z):
    out = np.zeros_like(z, dtype=complex)
    for c in reversed(coeffs):
        out = out * z + c
    return out


class PlanarMap:
    """Base class for a map germ ``f`` with ``f(0) = 0`` on ``|z| < domain_radius``."""

    kind = "abstract"
    domain_radius: float
    declared_index: Optional[int] = None
    branch_points: tuple = ()
    smooth_origin = False

    def __call__(self, z):
        return evaluate(self, z)

    def _eval(self, z):
        raise NotImplementedError

    def wirtinger_exact(self, z):
        """Closed-form ``(f_z, f_zbar)`` or ``None`` when unavailable."""
        return None

    @property
    def has_analytic_wirtinger(self):
        return type(self).wirtinger_exact is not PlanarMap.wirtinger_exact

    def log_parts(self, w):
        """Return ``(F(w), F_z(w), F_zbar(w))`` for a continuous lift ``F`` of ``f``.

        ``F`` satisfies ``exp(F(w)) = f(exp(w))`` and is continuous on the
        half-plane; its branch may differ from the anchored one by ``2*pi*i*k``.
        ``None`` for maps without a structural formula.
        """
        return None

    @property
    def index(self):
        return self.declared_index

    def to_spec(self):
        raise TypeError(f"{self.kind} maps have no JSON representation")


@dataclass(frozen=True, eq=False)
class RadialPower(PlanarMap):
    """``f(z) = C z^n |z|^m`` with ``n >= 1`` and ``n + m > 0``."""

    C: complex
    n: int
    m: float
    domain_radius: float = 1.0
    declared_index: Optional[int] = None

    kind = "radial_power"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("radial_power needs an integer n >= 1")
        if self.n + self.m <= 0:
            raise ValueError("radial_power needs n + m > 0")
        if self.C == 0:
            raise ValueError("radial_power needs C != 0")
        object.__setattr__(self, "C", complex(self.C))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", float(self.m))

    def _eval(self, z):
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.C * z ** self.n * r ** self.m
        return np.where(r > 0, val, 0)

    def wirtinger_exact(self, z):
        r = np.abs(z)
        n, m = self.n, self.m
        fz = self.C * (n + m / 2) * z ** (n - 1) * r ** m
        fzb = self.C * (m / 2) * z ** (n + 1) * r ** (m - 2)
        return fz, fzb

    def log_parts(self, w):
        w = np.asarray(w, dtype=complex)
        n, m = self.n, self.m
        val = (n + m) * w.real + 1j * n * w.imag + cmath.log(self.C)
        return val, np.full(w.shape, n + m / 2, dtype=complex), np.full(w.shape, m / 2, dtype=complex)

    @property
    def index(self):
        return self.declared_index or self.n

    def to_spec(self):
        return {"kind": self.kind, "C": [self.C.real, self.C.imag], "n": self.n,
                "m": self.m, "R": self.domain_radius}


@dataclass(frozen=True, eq=False)
class HolomorphicSeries(PlanarMap):
    """``f(z) = sum_{k>=1} a_k z^k`` for a finite coefficient list ``a_1..a_N``."""

    coeffs: tuple
    domain_radius: float = 1.0
    declared_index: Optional[int] = None

    kind = "holomorphic_series"
    smooth_origin = True

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs or all(c == 0 for c in coeffs):
            raise ValueError("holomorphic_series needs a nonzero coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self):
        """Index ``d`` of the first nonzero coefficient."""
        return next(k for k, c in enumerate(self.coeffs, start=1) if c != 0)

    def _eval(self, z):
        return z * _horner(self.coeffs, z)

    def wirtinger_exact(self, z):
        deriv = [k * c for k, c in enumerate(self.coeffs, start=1)]
        return _horner(deriv, z), np.zeros_like(z, dtype=complex)

    def log_parts(self, w):
        w = np.asarray(w, dtype=complex)
        d = self.order
        lead = self.coeffs[d - 1]
        tail = [c / lead for c in self.coeffs[d:]]
        e = np.exp(w)
        u = e * _horner(tail, e) if tail else np.zeros_like(w)
        du = e * _horner([(j + 1) * c for j, c in enumerate(tail)], e) if tail else np.zeros_like(w)
        val = cmath.log(lead) + d * w + _log1p_complex(u)
        return val, d + du / (1 + u), np.zeros_like(w)

    @property
    def index(self):
        return self.declared_index or self.order

    def to_spec(self):
        return {"kind": self.kind, "coeffs": [[c.real, c.imag] for c in self.coeffs],
                "R": self.domain_radius}


@dataclass(frozen=True, eq=False)
class PerturbedRadial(PlanarMap):
    """``f(z) = C z^n |z|^m (1 + eps * sum_j p_j z^j)``, series starting at ``z^1``."""

    C: complex
    n: int
    m: float
    eps: float
    series: tuple
    domain_radius: float = 1.0
    declared_index: Optional[int] = None

    kind = "perturbed_radial"

    def __post_init__(self):
        base = RadialPower(self.C, self.n, self.m, self.domain_radius)
        object.__setattr__(self, "C", base.C)
        object.__setattr__(self, "n", base.n)
        object.__setattr__(self, "m", base.m)
        object.__setattr__(self, "series", tuple(complex(c) for c in self.series))

    @property
    def base(self):
        return RadialPower(self.C, self.n, self.m, self.domain_radius)

    def _pert(self, z):
        return self.eps * z * _horner(self.series, z)

    def _dpert(self, z):
        return self.eps * _horner([(j + 1) * c for j, c in enumerate(self.series)], z)

    def _eval(self, z):
        return self.base._eval(z) * (1 + self._pert(z))

    def wirtinger_exact(self, z):
        bz, bzb = self.base.wirtinger_exact(z)
        b = self.base._eval(z)
        p = 1 + self._pert(z)
        return bz * p + b * self._dpert(z), bzb * p

    def log_parts(self, w):
        val, dz, dzb = self.base.log_parts(w)
        e = np.exp(w)
        u = self._pert(e)
        du = e * self._dpert(e)
        return val + _log1p_complex(u), dz + du / (1 + u), dzb

    @property
    def index(self):
        return self.declared_index or self.n

    def to_spec(self):
        return {"kind": self.kind, "C": [self.C.real, self.C.imag], "n": self.n, "m": self.m,
                "eps": self.eps, "series": [[c.real, c.imag] for c in self.series],
                "R": self.domain_radius}


@dataclass(frozen=True, eq=False)
class Composition(PlanarMap):
    """``maps[0] o maps[1] o ... o maps[-1]`` (applied right to left)."""

    maps: tuple
    radius: Optional[float] = None
    declared_index: Optional[int] = None

    kind = "composition"

    def __post_init__(self):
        if not self.maps:
            raise ValueError("composition needs at least one map")
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def domain_radius(self):
        return self.radius if self.radius is not None else self.maps[-1].domain_radius

    @property
    def smooth_origin(self):
        return all(f.smooth_origin for f in self.maps)

    def _eval(self, z):
        for f in reversed(self.maps):
            z = evaluate(f, z)
        return z

    @property
    def has_analytic_wirtinger(self):
        return all(f.has_analytic_wirtinger for f in self.maps)

    def wirtinger_exact(self, z):
        if not self.has_analytic_wirtinger:
            return None
        z = np.asarray(z, dtype=complex)
        a = np.ones_like(z)
        b = np.zeros_like(z)
        for f in reversed(self.maps):
            fz, fzb = f.wirtinger_exact(z)
            a, b = fz * a + fzb * np.conj(b), fz * b + fzb * np.conj(a)
            z = f._eval(z)
        return a, b

    def log_parts(self, w):
        w = np.asarray(w, dtype=complex)
        a = np.ones_like(w)
        b = np.zeros_like(w)
        for f in reversed(self.maps):
            parts = f.log_parts(w)
            if parts is None:
                return None
            w, fz, fzb = parts
            a, b = fz * a + fzb * np.conj(b), fz * b + fzb * np.conj(a)
        return w, a, b

    @property
    def index(self):
        if self.declared_index:
            return self.declared_index
        inds = [f.index for f in self.maps]
        return None if any(i is None for i in inds) else int(np.prod(inds))

    def to_spec(self):
        spec = {"kind": self.kind, "maps": [f.to_spec() for f in self.maps]}
        if self.radius is not None:
            spec["R"] = self.radius
        return spec


@dataclass(frozen=True, eq=False)
class CustomMap(PlanarMap):
    """User-supplied vectorised callable with optional Wirtinger derivatives."""

    func: Callable
    domain_radius: float = 1.0
    wirtinger_fn: Optional[Callable] = None
    declared_index: Optional[int] = None
    branch_points: tuple = ()
    name: str = "custom"

    kind = "custom_sampled"

    def _eval(self, z):
        return np.asarray(self.func(z), dtype=complex)

    @property
    def has_analytic_wirtinger(self):
        return self.wirtinger_fn is not None

    def wirtinger_exact(self, z):
        if self.wirtinger_fn is None:
            return None
        fz, fzb = self.wirtinger_fn(z)
        return np.asarray(fz, dtype=complex), np.asarray(fzb, dtype=complex)


# -- pointwise operations ---------------------------------------------------


def _check_domain(fmap, z):
    if np.any(np.abs(z) >= fmap.domain_radius):
        raise DomainError(f"point outside |z| < {fmap.domain_radius}")


def _check_branch(fmap, z):
    # the origin of a non-smooth family is refused only exactly: deep
    # quadrature and lifts legitimately sample |z| far below any fixed floor
    if not fmap.smooth_origin and np.any(z == 0):
        raise BranchPointError("derivatives are undefined at the origin for this family")
    for p in fmap.branch_points:
        if np.any(np.abs(z - p) <= BRANCH_FLOOR):
            raise BranchPointError(f"evaluation within {BRANCH_FLOOR} of branch point {p}")


def evaluate(fmap, z):
    """``f(z)``; composition maps are applied right to left, ``f(0) = 0`` exactly."""
    z = np.asarray(z, dtype=complex)
    _check_domain(fmap, z)
    out = np.asarray(fmap._eval(z), dtype=complex)
    out = np.where(z == 0, 0, out)
    return out[()] if out.ndim == 0 else out


def _fd_wirtinger(fmap, z, step_scale, r_floor):
    h = step_scale * np.maximum(np.abs(z), r_floor)
    if np.any(h == 0) or np.any(z + h == z):
        raise DegenerateDerivativeError("finite-difference step underflow")
    f = fmap._eval
    fx = (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)
    ih = 1j * h
    fy = (-f(z + 2 * ih) + 8 * f(z + ih) - 8 * f(z - ih) + f(z - 2 * ih)) / (12 * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def wirtinger(fmap, z, *, method="auto", step_scale=1e-6, r_floor=1e-4):
    """Return ``(f_z, f_zbar)`` at ``z``.

    ``method`` is ``"analytic"``, ``"fd"`` (4th-order central differences with
    step ``step_scale * max(|z|, r_floor)``) or ``"auto"`` (analytic if the
    family has a closed form).
    """
    z = np.asarray(z, dtype=complex)
    _check_domain(fmap, z)
    _check_branch(fmap, z)
    if method == "analytic" or (method == "auto" and fmap.has_analytic_wirtinger):
        res = fmap.wirtinger_exact(z)
        if res is None:
            raise ValueError(f"{fmap.kind} map has no analytic Wirtinger derivatives")
        fz, fzb = res
    elif method in ("fd", "auto"):
        fz, fzb = _fd_wirtinger(fmap, z, step_scale, r_floor)
    else:
        raise ValueError(f"unknown method {method!r}")
    fz = np.asarray(fz, dtype=complex)
    fzb = np.asarray(fzb, dtype=complex)
    if fz.ndim == 0:
        return complex(fz), complex(fzb)
    return fz, fzb


def jacobian(fmap, z, **kw):
    fz, fzb = wirtinger(fmap, z, **kw)
    return np.abs(fz) ** 2 - np.abs(fzb) ** 2


def dilatation(fmap, z, **kw):
    """Complex dilatation ``mu_f = f_zbar / f_z``; raises if ``|mu| >= 1``."""
    fz, fzb = wirtinger(fmap, z, **kw)
    fz = np.asarray(fz)
    fzb = np.asarray(fzb)
    if np.any(np.abs(fz) <= np.abs(fzb)):
        raise DegenerateDerivativeError("|f_z| <= |f_zbar|: sample is not quasiregular")
    mu = fzb / fz
    return complex(mu) if mu.ndim == 0 else mu


def mu_compose(mu_f, r_f, mu_g_at_fz, *, tol=1e-14):
    """Dilatation of ``g o f`` from ``mu_f``, ``r_f = conj(f_z)/f_z`` and ``mu_g(f(z))``."""
    mu_f = np.asarray(mu_f, dtype=complex)
    r_f = np.asarray(r_f, dtype=complex)
    mu_g = np.asarray(mu_g_at_fz, dtype=complex)
    den = 1 + r_f * np.conj(mu_f) * mu_g
    if np.any(np.abs(den) < tol):
        raise DegenerateDerivativeError("composition dilatation denominator vanishes")
    out = (mu_f + r_f * mu_g) / den
    return complex(out) if out.ndim == 0 else out


def wirtinger_inverse(f_z, f_zbar):
    """Derivatives of ``f^{-1}`` at ``f(z)`` from ``(f_z, f_zbar)`` at ``z``."""
    f_z = np.asarray(f_z, dtype=complex)
    f_zbar = np.asarray(f_zbar, dtype=complex)
    jac = np.abs(f_z) ** 2 - np.abs(f_zbar) ** 2
    if np.any(jac <= 0):
        raise DegenerateDerivativeError("vanishing or negative Jacobian")
    gz = np.conj(f_z) / jac
    gzb = -f_zbar / jac
    if gz.ndim == 0:
        return complex(gz), complex(gzb)
    return gz, gzb


def local_index(fmap, probe_radius, *, n_theta=512, max_theta=1 << 16):
    """Winding number of ``theta -> f(r e^{i theta})`` about 0."""
    n = n_theta
    while n <= max_theta:
        theta = 2 * np.pi * np.arange(n + 1) / n
        vals = evaluate(fmap, probe_radius * np.exp(1j * theta))
        if np.any(vals == 0):
            raise WindingError("f vanishes on the probe circle")
        inc = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(inc)) < np.pi / 2:
            wind = inc.sum() / (2 * np.pi)
            d = int(round(wind))
            if abs(wind - d) > 1e-6:
                raise WindingError(f"non-integer winding {wind}")
            if fmap.declared_index is not None and fmap.declared_index != d:
                raise IndexMismatchError(
                    f"computed index {d} != declared index {fmap.declared_index}")
            return d
        n *= 2
    raise WindingError("argument jumps persist after grid refinement")


# -- fixed point classification ---------------------------------------------

ATTRACTING = "geometrically_attracting"
SUPERATTRACTING = "superattracting"
REPELLING = "geometrically_repelling"
SUPERREPELLING = "superrepelling"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class FixedPointClass:
    tag: str
    lambda_estimate: float
    radius_of_validity: float
    radii: tuple = field(default=(), repr=False)
    max_ratio: tuple = field(default=(), repr=False)
    min_ratio: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.tag == ATTRACTING and not 0 < self.lambda_estimate < 1:
            raise ValueError("attracting class needs lambda in (0, 1)")
        if self.tag == REPELLING and not self.lambda_estimate > 1:
            raise ValueError("repelling class needs lambda > 1")

    @property
    def attracting(self):
        return self.tag in (ATTRACTING, SUPERATTRACTING)

    @property
    def repelling(self):
        return self.tag in (REPELLING, SUPERREPELLING)

    @property
    def is_super(self):
        return self.tag in (SUPERATTRACTING, SUPERREPELLING)


def default_ladder(radius, count=16):
    return tuple(radius / 2 * 0.5 ** k for k in range(count))


def circle_ratios(fmap, radii, n_theta=512):
    """``(M(r), m(r))``: max and min of ``|f(z)|/r`` over each circle ``|z| = r``."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    unit = np.exp(1j * theta)
    big, small = [], []
    for r in radii:
        mod = np.abs(evaluate(fmap, r * unit)) / r
        big.append(float(mod.max()))
        small.append(float(mod.min()))
    return np.array(big), np.array(small)


def _tail_start(ok):
    """First index from which ``ok`` holds for the rest of the ladder, else None."""
    if not ok[-1]:
        return None
    i = len(ok) - 1
    while i > 0 and ok[i - 1]:
        i -= 1
    return i


def classify_fixed_point(fmap, radii=None, *, n_theta=512, super_threshold=0.05):
    """Classify the fixed point at 0 on a decreasing ladder of radii.

    Superattracting needs ``M(r)`` to decrease along the ladder and drop below
    ``super_threshold`` at the smallest radius; superrepelling is the dual with
    ``m(r) > 1/super_threshold``.  The verdict is empirical: a ladder can only
    falsify the "for every lambda" quantifier, not prove it.
    """
    if radii is None:
        radii = default_ladder(fmap.domain_radius)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    if np.any(radii >= fmap.domain_radius):
        raise DomainError("ladder radius outside the domain")
    big, small = circle_ratios(fmap, radii, n_theta)
    extra = dict(radii=tuple(radii), max_ratio=tuple(big), min_ratio=tuple(small))
    slack = 1e-12

    i_att = _tail_start(big < 1)
    if i_att is not None:
        tail = big[i_att:]
        decreasing = np.all(np.diff(tail) <= slack * tail[:-1])
        tag = SUPERATTRACTING if decreasing and tail[-1] < super_threshold else ATTRACTING
        return FixedPointClass(tag, float(tail.max()), float(radii[i_att]), **extra)

    i_rep = _tail_start(small > 1)
    if i_rep is not None:
        tail = small[i_rep:]
        increasing = np.all(np.diff(tail) >= -slack * tail[:-1])
        tag = SUPERREPELLING if increasing and tail[-1] > 1 / super_threshold else REPELLING
        return FixedPointClass(tag, float(tail.min()), float(radii[i_rep]), **extra)

    return FixedPointClass(INDETERMINATE, float(big.max()), float(radii[0]), **extra)


# -- JSON records -----------------------------------------------------------


def _complex(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise ValueError(f"cannot read complex number from {value!r}")


def map_from_spec(record) -> PlanarMap:
    """Build a map from its JSON record (a list means a right-to-left composition)."""
    if isinstance(record, list):
        return Composition(tuple(map_from_spec(r) for r in record))
    if not isinstance(record, dict) or "kind" not in record:
        raise ValueError("map record must be an object with a 'kind' field")
    kind = record["kind"]
    radius = float(record.get("R", 1.0))
    index = record.get("index")
    if kind == "radial_power":
        return RadialPower(_complex(record.get("C", 1.0)), int(record["n"]), float(record["m"]),
                           radius, index)
    if kind == "holomorphic_series":
        return HolomorphicSeries(tuple(_complex(c) for c in record["coeffs"]), radius, index)
    if kind == "perturbed_radial":
        return PerturbedRadial(_complex(record.get("C", 1.0)), int(record["n"]),
                               float(record["m"]), float(record["eps"]),
                               tuple(_complex(c) for c in record["series"]), radius, index)
    if kind == "composition":
        maps = tuple(map_from_spec(r) for r in record["maps"])
        return Composition(maps, float(record["R"]) if "R" in record else None, index)
    if kind == "custom_sampled":
        raise ValueError("custom_sampled maps are only available through the Python API")
    raise ValueError(f"unknown map kind {kind!r}")
