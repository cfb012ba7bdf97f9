"""End-to-end orchestration: representative, lifts, constants, iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conjugacy import (
    _backward, _forward, dilatation_decay, iterate, probe_disk, probe_grid, residual,
)
from .errors import DomainEscapeError, HypothesisError, QrlinError
from .estimates import HypothesisReport, fit_hypotheses, threshold_bound
from .infinitesimal import asymptotic_rep, generalized_derivative, simplicity_check
from .lift import align_branch, bip_integral, build_separable, make_lift
from .maps import (
    ATTRACTING, INDETERMINATE, REPELLING, SUPERATTRACTING, SUPERREPELLING,
    circle_ratios, classify_fixed_point, default_ladder, local_index, map_from_spec,
)
from .radial import radial_profile

WINDOW_DEPTH = 8.0
WINDOW_GAP = 1.0
SUPER_FACTOR = 0.9
BIP_LADDER = (-4.0, -8.0, -12.0)


class NumericalFailure(QrlinError):
    """Wraps a failure with the name of the operation that raised it."""

    def __init__(self, operation, exc):
        self.operation = operation
        self.cause = exc
        super().__init__(f"{operation}: {type(exc).__name__}: {exc}")


def _run(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (HypothesisError, DomainEscapeError):
        raise
    except (QrlinError, ValueError, ArithmeticError) as exc:
        raise NumericalFailure(name, exc) from exc


def load_spec(record):
    """``(map, representative_map_or_None)`` from a JSON record.

    A bare map record (or list) is accepted, as is
    ``{"map": ..., "representative": ...}`` where the optional representative
    replaces the computed one.
    """
    if isinstance(record, dict) and "map" in record:
        rep = record.get("representative")
        return map_from_spec(record["map"]), (map_from_spec(rep) if rep is not None else None)
    return map_from_spec(record), None


def default_window(log_r):
    return (log_r - WINDOW_DEPTH, log_r - WINDOW_GAP)


def analyze(fmap, *, seed=0):
    """Fixed-point class, index, simplicity and BIP ladder for a map."""
    cls = _run("classify_fixed_point", classify_fixed_point, fmap)
    d = _run("local_index", local_index, fmap, fmap.domain_radius / 4)
    profile = _run("radial_profile", radial_profile, fmap, degree=d)
    simple, defect = _run("simplicity_check", simplicity_check, fmap, profile=profile)
    lift = _run("log_lift", make_lift, fmap, degree=d)
    ladder = [t for t in BIP_LADDER if t < lift.log_R]
    bip = {repr(t): _run("bip_integral", bip_integral, lift, t) for t in ladder}
    return dict(
        kind=fmap.kind, spec=_spec_or_none(fmap), seed=seed,
        **{"class": cls.tag}, lambda_estimate=cls.lambda_estimate,
        radius_of_validity=cls.radius_of_validity, d=d, simple=simple, defect=defect,
        L=profile.L_estimate, bip=bip, bip_max=max(bip.values()) if bip else None)


def _spec_or_none(fmap):
    try:
        return fmap.to_spec()
    except TypeError:
        return None


@dataclass
class Setup:
    """Prepared objects for one linearization run."""

    fmap: object
    fixed_class: object
    degree: int
    profile: object
    circle: object
    rep: object
    lift: object
    sep: object
    mode: str
    lam: float
    radius: float
    window: tuple
    report: HypothesisReport = None
    notes: list = field(default_factory=list)


def _mode_for(cls, mode):
    if mode != "auto":
        return mode
    if cls.tag in (ATTRACTING, SUPERATTRACTING):
        return "attracting"
    if cls.tag in (REPELLING, SUPERREPELLING):
        return "repelling"
    raise NumericalFailure("classify_fixed_point",
                           ValueError("fixed point is indeterminate; pass --mode explicitly"))


def _representative(fmap, degree, rep_map):
    source = fmap if rep_map is None else rep_map
    profile = _run("radial_profile", radial_profile, source, degree=degree)
    circle = _run("generalized_derivative", generalized_derivative, source, profile=profile)
    rep = _run("asymptotic_rep", asymptotic_rep, source, profile, circle)
    return profile, circle, rep


def _super_radius(fmap, cls, bound, mode):
    """Largest ladder radius whose whole tail beats the admissible multiplier."""
    radii = np.asarray(cls.radii)
    big, small = np.asarray(cls.max_ratio), np.asarray(cls.min_ratio)
    if mode == "attracting":
        ok = big < SUPER_FACTOR * bound
        vals = big
    else:
        ok = small > bound / SUPER_FACTOR
        vals = small
    if not ok[-1]:
        raise HypothesisError("threshold", "no ladder radius meets the multiplier condition")
    i = len(ok) - 1
    while i > 0 and ok[i - 1]:
        i -= 1
    tail = vals[i:]
    lam = float(tail.max() if mode == "attracting" else tail.min())
    return float(radii[i]), lam


def _preflight(lift, sep, window, mode, steps=8):
    """Short orbit test: forward (attracting) or inverse (repelling) orbits stay inside."""
    z = probe_grid(window, 9)
    for _ in range(steps):
        z = _forward(lift, z) if mode == "attracting" else _backward(lift, sep, z, None)


def prepare(fmap, *, rep_map=None, mode="auto", seed=0):
    """Build representative, lifts and the hypothesis report."""
    cls = _run("classify_fixed_point", classify_fixed_point, fmap)
    mode = _mode_for(cls, mode)
    degree = _run("local_index", local_index, fmap, fmap.domain_radius / 4)
    profile, circle, rep = _representative(fmap, degree, rep_map)
    notes = []
    radius = fmap.domain_radius
    lam = cls.lambda_estimate
    consistent = (mode == "attracting") == cls.attracting

    def objects(r):
        log_r = math.log(r)
        sep = build_separable(rep)
        sep = type(sep)(sep.profile, sep.circle, log_r)
        lift = _run("log_lift", make_lift, fmap, degree=degree, log_R=log_r)
        lift = align_branch(lift, sep, log_r - WINDOW_DEPTH / 2)
        return lift, sep

    if cls.tag in (ATTRACTING, REPELLING) and consistent:
        radius = cls.radius_of_validity
    lift, sep = objects(radius)
    window = default_window(math.log(radius))
    _preflight(lift, sep, window, mode)
    if cls.is_super and consistent:
        pre = fit_hypotheses(lift, sep, window, 0.5 if mode == "attracting" else 2.0, mode,
                             seed=seed, bypass=True)
        bound = threshold_bound(pre.L, pre.alpha, pre.K_dtilde, pre.nu, mode)
        radius, lam = _super_radius(fmap, cls, bound, mode)
        notes.append(f"working radius {radius:.6g} with effective multiplier {lam:.6g}")
        lift, sep = objects(radius)
        window = default_window(math.log(radius))
    if not consistent:
        raise DomainEscapeError(
            f"{mode} mode requested for a {cls.tag} fixed point; orbits leave the domain")
    report = fit_hypotheses(lift, sep, window, lam, mode, seed=seed, bypass=cls.is_super)
    if not report.threshold_ok:
        raise HypothesisError("threshold", f"multiplier {lam:.6g} violates the admissible bound "
                                           f"(margin {report.margin:.3g})")
    return Setup(fmap, cls, degree, profile, circle, rep, lift, sep, mode, lam, radius,
                 window, report, notes)


def linearize(fmap, *, rep_map=None, mode="auto", tol=1e-10, k_max=60, grid=33, seed=0,
              disk_radius=0.05):
    """Run the whole pipeline; returns ``(setup, result)``."""
    setup = prepare(fmap, rep_map=rep_map, mode=mode, seed=seed)
    probe = probe_grid(setup.window, grid)
    result = iterate(setup.lift, setup.sep, setup.report, probe, mode=setup.mode, tol=tol,
                     k_max=k_max)
    disk = probe_disk(min(disk_radius, 0.5 * setup.radius))
    if setup.mode == "repelling":
        disk = disk[np.abs(fmap(disk)) < 0.9 * setup.radius]
    result.residual = _run("residual", residual, result, fmap, setup.rep, disk)
    result.mu_decay = _run("dilatation_decay", dilatation_decay, result, seed=seed)
    return setup, result
