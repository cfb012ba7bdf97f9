"""Empirical constants for the closeness, Hölder and derivative hypotheses.

Every fitted pair ``(T, exponent)`` is certified against the samples it was
fitted on: a bound that fails to dominate a sample is raised until it does.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateDerivativeError, HypothesisError

SAFETY = 1.1
ZERO_FLOOR = 1e-11
N_BINS = 10
MIN_SAMPLES = 20
MIN_SPAN = 3.0
# an envelope must shrink by at least this many log-units across the sampled span
MIN_DECAY = 0.1


@dataclass(frozen=True)
class EnvelopeFit:
    """Upper envelope ``T * e^{exponent * x}`` with its certification record."""

    T: float
    exponent: float
    n_samples: int
    certified: bool
    raised: bool = False

    @property
    def sentinel(self):
        return self.T == 0.0


def sample_window(window, count, rng):
    """``count`` points uniform in ``[t_lo, t_hi] x [-pi, pi]``."""
    lo, hi = window
    return rng.uniform(lo, hi, count) + 1j * rng.uniform(-np.pi, np.pi, count)


def envelope_fit(x, dev, which="a", *, safety=SAFETY, zero_floor=ZERO_FLOOR, n_bins=N_BINS):
    """Fit ``dev <= T e^{exponent x}`` from the top decile of each ``x`` bin.

    Deviations at or below ``zero_floor`` are treated as rounding and do not
    steer the fit; if every deviation is that small the result is the exact
    sentinel ``T = 0``, ``exponent = inf``.
    """
    x = np.asarray(x, dtype=float).ravel()
    dev = np.asarray(dev, dtype=float).ravel()
    if x.size < MIN_SAMPLES or x.max() - x.min() < MIN_SPAN:
        raise ValueError(f"need >= {MIN_SAMPLES} samples spanning >= {MIN_SPAN} units of Re z")
    if not np.all(np.isfinite(dev)):
        raise HypothesisError(which, "non-finite deviation sample")
    if dev.max() <= zero_floor:
        return EnvelopeFit(0.0, math.inf, x.size, True)
    keep = dev > zero_floor
    xs, ds = x[keep], dev[keep]
    if xs.size < 2 or xs.max() - xs.min() < 1e-9:
        raise HypothesisError(which, "too few resolvable deviations to fit a decay rate")
    edges = np.linspace(xs.min(), xs.max(), n_bins + 1)
    bins = np.clip(np.digitize(xs, edges) - 1, 0, n_bins - 1)
    top_x, top_d = [], []
    for b in range(n_bins):
        sel = bins == b
        if not sel.any():
            continue
        cut = np.quantile(ds[sel], 0.9)
        pick = sel & (ds >= cut)
        top_x.append(xs[pick])
        top_d.append(ds[pick])
    top_x = np.concatenate(top_x)
    top_d = np.concatenate(top_d)
    slope, intercept = np.polyfit(top_x, np.log(top_d), 1)
    if not slope * (x.max() - x.min()) > MIN_DECAY:
        raise HypothesisError(which, f"deviations do not decay toward Re z -> -inf (rate {slope:.3g})")
    T = safety * math.exp(intercept)
    need = float(np.max(ds / np.exp(slope * xs)))
    raised = need > T
    if raised:
        T = safety * need
    return EnvelopeFit(T, float(slope), x.size, True, raised)


def fit_exponential_bound(x, dev, which="a"):
    """``(T, exponent)`` with ``dev <= T e^{exponent x}`` on every sample."""
    fit = envelope_fit(x, dev, which)
    return fit.T, fit.exponent


def closeness_samples(lift, sep, window, count, rng):
    z = sample_window(window, count, rng)
    return z.real, np.abs(np.asarray(lift(z)) - np.asarray(sep(z)))


def derivative_samples(lift, sep, window, count, rng):
    z = sample_window(window, count, rng)
    fz, fzb = lift.wirtinger(z)
    dz, dzb = sep.wirtinger(z)
    return z.real, np.maximum(np.abs(fz - dz), np.abs(fzb - dzb))


def fit_derivative_closeness(lift, sep, window, count=400, rng=None):
    """``(T3, beta')`` bounding both Wirtinger gaps between ``f~`` and ``D~``."""
    rng = np.random.default_rng(0) if rng is None else rng
    x, dev = derivative_samples(lift, sep, window, count, rng)
    return fit_exponential_bound(x, dev, "c")


def holder_samples(field_fn, window, pair_count, rng, deltas=None, directions=8):
    """``(delta, max gap)`` for the Wirtinger fields over pairs at each distance.

    Centres are ``pair_count`` random points plus a fixed column through
    ``y = 0`` and ``y = +-pi`` where the circle tables join.
    """
    lo, hi = window
    if deltas is None:
        deltas = np.geomspace(1e-2, 0.99, 16)
    xs = np.linspace(lo, hi, 7)
    fixed = (xs[:, None] + 1j * np.array([0.0, np.pi, -np.pi])[None, :]).ravel()
    centres = np.concatenate([sample_window(window, pair_count, rng), fixed])
    phis = np.exp(2j * np.pi * np.arange(directions) / directions)
    az, azb = field_fn(centres)
    gaps = []
    for d in deltas:
        other = centres[:, None] + d * phis[None, :]
        bz, bzb = field_fn(other)
        gap = np.maximum(np.abs(bz - np.asarray(az)[:, None]), np.abs(bzb - np.asarray(azb)[:, None]))
        gaps.append(gap.max())
    return np.asarray(deltas), np.asarray(gaps)


def fit_holder(sep, window, pair_count=64, rng=None, *, zero_floor=ZERO_FLOOR):
    """``(T2, beta)`` with ``|D~_z(u) - D~_z(v)| <= T2 |u - v|^beta`` for ``|u - v| < 1``.

    Affine ``D~`` returns the sentinel ``(0, 1)``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    deltas, gaps = holder_samples(sep.wirtinger, window, pair_count, rng)
    if not np.all(np.isfinite(gaps)):
        raise HypothesisError("b", "non-finite derivative samples")
    if gaps.max() <= zero_floor:
        return 0.0, 1.0
    keep = gaps > zero_floor
    if keep.sum() < 3:
        raise HypothesisError("b", "too few resolvable derivative gaps")
    beta, _ = np.polyfit(np.log(deltas[keep]), np.log(gaps[keep]), 1)
    if not beta > 0:
        raise HypothesisError("b", f"derivative gaps do not shrink with distance (slope {beta:.3g})")
    beta = float(min(beta, 1.0))
    T2 = SAFETY * float(np.max(gaps / deltas ** beta))
    return T2, beta


def _jacobian_bounds(sep, z):
    a, b = sep.wirtinger(z)
    a, b = np.abs(a), np.abs(b)
    return a + b, np.abs(a - b), a, b


def maximal_dilatation(sep, window, count=400, rng=None):
    """``sup (1 + |mu|)/(1 - |mu|)`` of ``D~`` over samples in the window."""
    rng = np.random.default_rng(0) if rng is None else rng
    z = sample_window(window, count, rng)
    _, _, a, b = _jacobian_bounds(sep, z)
    if np.any(b >= a):
        raise DegenerateDerivativeError("|mu| >= 1 sample in the representative lift")
    mu = b / a
    return float(np.max((1 + mu) / (1 - mu)))


def dilatation_sup(sep, window, count=400, rng=None):
    rng = np.random.default_rng(0) if rng is None else rng
    _, _, a, b = _jacobian_bounds(sep, sample_window(window, count, rng))
    return float(np.max(b / a))


def lipschitz_constant(sep, window, count=400, rng=None):
    """Bi-Lipschitz constant of ``D~``: singular values on the window and the profile quotients."""
    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = window
    z = sample_window((sep.profile.t0, hi), count, rng)
    z = np.concatenate([z, sample_window(window, count, rng)])
    smax, smin, _, _ = _jacobian_bounds(sep, z)
    if np.any(smin <= 0):
        raise DegenerateDerivativeError("singular representative lift")
    return float(max(1.0, np.max(smax), np.max(1 / smin), sep.profile.L_estimate))


def combine_nu(alpha, beta, beta_prime):
    return min(alpha * beta, beta_prime)


def _power(base, expo):
    if math.isinf(expo):
        return 1.0
    return base ** expo


def threshold_bound(L, alpha, K, nu, mode):
    """Admissible multiplier bound: ``min(L^{-1/a}, K^{-1/nu})`` or its repelling dual."""
    if mode == "attracting":
        return min(_power(L, -1 / alpha), _power(K, -1 / nu))
    if mode == "repelling":
        return max(_power(L, 1 / alpha), _power(K, 1 / nu))
    raise ValueError(f"unknown mode {mode!r}")


def threshold_check(L, alpha, K, nu, lam, mode, *, bypass=False):
    """``(ok, margin)`` for the multiplier condition; super classes pass via ``bypass``."""
    bound = threshold_bound(L, alpha, K, nu, mode)
    margin = bound - lam if mode == "attracting" else lam - bound
    return (True if bypass else margin > 0), float(margin)


def repelling_transfer(S1, S2, S3, L, lam, alpha, beta, beta_prime, *, mu_sup=0.0, t_hi=0.0):
    """Constants for ``f~^{-1}``, ``D~^{-1}`` from those of ``f~``, ``D~`` (``lam > 1``).

    ``T1 = L S1 lam^-alpha``; ``T2 = S2' L^beta`` with
    ``S2' = 5 L^6 S2 / (1 - m^2)^2`` where ``m = sup |mu_D~|``; ``T3`` follows
    the inverse-derivative chain with ``delta = S3 e^{beta' t_hi}`` and holds
    with exponent ``nu = min(alpha beta, beta')``.
    """
    if not lam > 1:
        raise ValueError("repelling transfer needs lambda > 1")
    if not 0 <= mu_sup < 1:
        raise ValueError("need sup |mu| < 1")
    T1 = L * S1 * lam ** (-alpha) if S1 > 0 else 0.0
    damp = 1 - mu_sup ** 2
    T2 = 5 * L ** 6 * S2 / damp ** 2 * L ** beta if S2 > 0 else 0.0
    if S3 == 0 and (S2 == 0 or T1 == 0):
        return T1, T2, 0.0
    bp = 0.0 if math.isinf(beta_prime) else beta_prime
    delta = S3 * math.exp(bp * t_hi)
    pq = S2 * T1 ** beta
    s3 = S3 * lam ** (-bp)
    num = (L + delta) * (4 * L * pq + 2 * (2 * L + delta) * s3) + (L + delta) ** 2 * (s3 + pq)
    T3 = 2 * L ** 2 / damp * num
    return T1, T2, T3


@dataclass
class HypothesisReport:
    """Fitted hypothesis constants, the multiplier verdict and sampling record."""

    T1: float
    alpha: float
    T2: float
    beta: float
    T3: float
    beta_prime: float
    L: float
    K_dtilde: float
    nu: float
    lam: float
    threshold_ok: bool
    margin: float
    window: tuple
    mode: str
    bypass: bool = False
    seed: int = 0
    sample_counts: dict = field(default_factory=dict)
    certified: dict = field(default_factory=dict)
    direct: dict = field(default_factory=dict)

    def __post_init__(self):
        nu = combine_nu(self.alpha, self.beta, self.beta_prime)
        if nu != self.nu:
            raise ValueError("nu must equal min(alpha * beta, beta')")

    def to_dict(self):
        out = asdict(self)
        out["window"] = list(self.window)
        return _jsonable(out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def fit_hypotheses(lift, sep, window, lam, mode, *, count=400, pair_count=64, seed=0,
                   bypass=False):
    """Fit (a), (b), (c) for ``(f~, D~)`` on the window and assemble the report.

    In repelling mode the constants are fitted for the forward lifts (the
    ``S`` constants), transferred to the inverse lifts, and checked against a
    direct refit on ``f~^{-1}``, ``D~^{-1}`` with the exponents held fixed.
    """
    rng = np.random.default_rng(seed)
    x, dev = closeness_samples(lift, sep, window, count, rng)
    fit_a = envelope_fit(x, dev, "a")
    T2, beta = fit_holder(sep, window, pair_count, rng)
    xc, devc = derivative_samples(lift, sep, window, count, rng)
    fit_c = envelope_fit(xc, devc, "c")
    L = lipschitz_constant(sep, window, count, rng)
    K = maximal_dilatation(sep, window, count, rng)
    T1, alpha, T3, beta_prime = fit_a.T, fit_a.exponent, fit_c.T, fit_c.exponent
    direct = {}
    if mode == "repelling":
        S = dict(S1=T1, S2=T2, S3=T3)
        T1, T2, T3 = repelling_transfer(T1, T2, T3, L, lam, alpha, beta, beta_prime,
                                        mu_sup=dilatation_sup(sep, window, count, rng),
                                        t_hi=window[1])
        beta_prime = combine_nu(alpha, beta, beta_prime)
        direct = dict(S, **inverse_refit(lift, sep, window, lam, alpha, beta_prime, count, rng))
    nu = combine_nu(alpha, beta, beta_prime)
    ok, margin = threshold_check(L, alpha, K, nu, lam, mode, bypass=bypass)
    return HypothesisReport(
        T1=T1, alpha=alpha, T2=T2, beta=beta, T3=T3, beta_prime=beta_prime, L=L, K_dtilde=K,
        nu=nu, lam=lam, threshold_ok=ok, margin=margin, window=tuple(window), mode=mode,
        bypass=bypass, seed=seed, sample_counts=dict(a=fit_a.n_samples, c=fit_c.n_samples),
        certified=dict(a=fit_a.certified, c=fit_c.certified, a_raised=fit_a.raised,
                       c_raised=fit_c.raised),
        direct=direct)


def inverse_refit(lift, sep, window, lam, alpha, nu, count, rng):
    """Smallest constants for the inverse lifts with the exponents held fixed."""
    from .lift import dtilde_inverse, lift_inverse

    w = sample_window(window, count, rng)
    q = dtilde_inverse(sep, w)
    p = lift_inverse(lift, w, q, lam=lam)
    gap = np.abs(p - q)
    fz, fzb = lift.wirtinger(p)
    dz, dzb = sep.wirtinger(q)
    jf = np.abs(fz) ** 2 - np.abs(fzb) ** 2
    jd = np.abs(dz) ** 2 - np.abs(dzb) ** 2
    dgap = np.maximum(np.abs(np.conj(fz) / jf - np.conj(dz) / jd), np.abs(fzb / jf - dzb / jd))
    t1 = float(np.max(gap / np.exp(alpha * w.real))) if math.isfinite(alpha) else float(gap.max())
    t3 = float(np.max(dgap / np.exp(nu * w.real))) if math.isfinite(nu) else float(dgap.max())
    return dict(T1_direct=t1, T3_direct=t3)
