"""Acceptance criteria 1-10, one printed PASS/FAIL line each.

Runs under pytest (``pytest tests/test_acceptance.py -s`` shows the lines
inline; they are also printed with capture disabled) or directly with
``python3 tests/test_acceptance.py``.
"""

import math

import numpy as np
import pytest

from qrlin.conjugacy import probe_disk
from qrlin.lift import bip_integral, make_lift, periodicity_defect
from qrlin.maps import (
    CustomMap, HolomorphicSeries, PerturbedRadial, RadialPower, dilatation, mu_compose,
    wirtinger, wirtinger_inverse,
)
from qrlin.oracles import RadialConjugacy, compare_full, oracle_for
from qrlin.pipeline import linearize
from qrlin.radial import mean_radius, series_mean_radius

SEED = 20240601
_RUNS = {}


def _run(key, factory):
    if key not in _RUNS:
        fmap = factory()
        _RUNS[key] = (fmap,) + linearize(fmap)
    return _RUNS[key]


def _koenigs():
    return _run("koenigs", lambda: HolomorphicSeries((0.5, 0.1), 0.5))


def _boettcher():
    return _run("boettcher", lambda: HolomorphicSeries((0, 1, 0.1), 0.5))


def _repelling():
    return _run("repelling", lambda: HolomorphicSeries((2, 0.3), 0.5))


def _perturbed():
    return _run("perturbed", lambda: PerturbedRadial(1, 1, 1, 0.05, (1,), 0.5))


def _oracle_gap(fmap, setup, result):
    phi, radial_mode = oracle_for(fmap, setup.lift, setup.mode)
    disk = probe_disk(min(0.05, 0.5 * setup.radius))
    if setup.mode == "repelling":
        disk = disk[np.abs(fmap(disk)) < 0.9 * setup.radius]
    return compare_full(result.psi(disk), phi(disk), RadialConjugacy(setup.profile, radial_mode))


def criterion_1():
    parts = []
    ok = True
    for C, n, m, R in ((1, 1, 1, 0.5), (1, 2, -1.5, 1.0), (2j, 1, 0.5, 0.2)):
        fmap, setup, result = _run(("radial", C, n, m), lambda: RadialPower(C, n, m, R))
        disk = probe_disk(min(0.05, 0.5 * setup.radius))
        ident = float(np.max(np.abs(result.psi(disk) - disk) / np.abs(disk)))
        hist = max(result.error_history)
        good = result.residual < 1e-10 and hist < 1e-10 and ident < 1e-10
        if (n, m) == (2, -1.5):
            good &= setup.mode == "repelling"
        ok &= good
        parts.append(f"({C},{n},{m}) {setup.mode} res={result.residual:.1e} hist={hist:.1e}")
    return ok, "; ".join(parts)


def criterion_2():
    fmap, setup, result = _koenigs()
    gap = _oracle_gap(fmap, setup, result)
    return (result.residual < 1e-6 and gap < 1e-4,
            f"residual={result.residual:.2e} Königs discrepancy={gap:.2e} k={result.k_used}")


def criterion_3():
    fmap, setup, result = _boettcher()
    gap = _oracle_gap(fmap, setup, result)
    return (result.residual < 1e-6 and gap < 1e-4,
            f"residual={result.residual:.2e} Böttcher discrepancy={gap:.2e} k={result.k_used}")


def criterion_4():
    fmap, setup, result = _repelling()
    gap = _oracle_gap(fmap, setup, result)
    ok = setup.mode == "repelling" and result.converged and result.residual < 1e-6 and gap < 1e-3
    return ok, f"mode={setup.mode} residual={result.residual:.2e} inverse-branch Königs discrepancy={gap:.2e}"


def criterion_5():
    fmap, setup, result = _perturbed()
    rep = setup.report
    certified = rep.certified["a"] and rep.certified["c"] and rep.T1 > 0 and rep.beta > 0
    nu_fit = result.mu_decay[1]
    ok = (setup.fixed_class.tag == "superattracting" and certified and abs(rep.alpha - 1) <= 0.2
          and result.residual < 1e-5 and nu_fit > 0)
    return ok, (f"alpha={rep.alpha:.3f} beta={rep.beta:.3f} beta'={rep.beta_prime:.3f} "
                f"residual={result.residual:.2e} nu_fit={nu_fit:.3f}")


def criterion_6():
    ok = True
    parts = []
    for name, getter in (("koenigs", _koenigs), ("boettcher", _boettcher),
                         ("repelling", _repelling), ("perturbed", _perturbed)):
        _, setup, result = getter()
        rep = setup.report
        lam = rep.lam if setup.mode == "attracting" else 1 / rep.lam
        rate = 0.0 if math.isinf(rep.alpha) else rep.L * lam ** rep.alpha
        worst = max(result.ratios[1:], default=0.0)
        good = (worst <= rate + 0.1 and result.bound_applicable and result.bound_check
                and result.first_step_check)
        ok &= good
        parts.append(f"{name}: ratio {worst:.3f} <= {rate + 0.1:.3f}, envelope "
                     f"{'ok' if result.bound_check else 'violated'}")
    return ok, "; ".join(parts)


def criterion_7():
    errs = []
    for d in (1, 2, 3):
        lift = make_lift(HolomorphicSeries((0,) * (d - 1) + (1,), 1.0))
        errs.append(abs(bip_integral(lift, -3.0) / (2 * math.pi * d * d) - 1))
    return max(errs) < 1e-8, "relative errors " + ", ".join(f"{e:.1e}" for e in errs)


def criterion_8():
    f = HolomorphicSeries((1, 1), 1.0)
    series = [abs(mean_radius(f, r) / series_mean_radius((1, 1), r) - 1) for r in (0.3, 0.1, 0.01)]
    radial = []
    for C, n, m in ((1, 1, 1), (1, 2, -1.5), (2j, 1, 0.5), (0.3, 3, 0.25)):
        g = RadialPower(C, n, m, 1.0)
        for r in (0.3, 0.01):
            radial.append(abs(mean_radius(g, r, degree=n) / (abs(C) * r ** (n + m)) - 1))
    ok = max(series) < 1e-6 and max(radial) < 1e-8
    return ok, f"series max rel {max(series):.1e}; radial max rel {max(radial):.1e}"


def _inner():
    return CustomMap(lambda z: z + 0.3 * np.conj(z) + 0.1 * z * z, 1.0,
                     wirtinger_fn=lambda z: (1 + 0.2 * np.asarray(z), 0.3 + 0 * np.asarray(z)))


def _inverse_of(f):
    def g(w):
        w = np.asarray(w, dtype=complex)
        z = w / 1.3
        for _ in range(60):
            a, b = wirtinger(f, z, method="analytic")
            res = w - f(z)
            z = z + (np.conj(a) * res - b * np.conj(res)) / (abs(a) ** 2 - abs(b) ** 2)
        return z
    return g


def criterion_9():
    rng = np.random.default_rng(SEED)
    z = rng.uniform(0.05, 0.3, 100) * np.exp(1j * rng.uniform(0, 2 * np.pi, 100))
    inner, outer = _inner(), PerturbedRadial(1, 1, 1, 0.05, (1,), 0.5)
    fz, fzb = wirtinger(inner, z, method="analytic")
    predicted = mu_compose(fzb / fz, np.conj(fz) / fz, dilatation(outer, inner(z)))
    both = CustomMap(lambda u: outer(inner(u)), 1.0)
    comp_err = float(np.max(np.abs(predicted - dilatation(both, z, method="fd"))))

    gz, gzb = wirtinger_inverse(fz, fzb)
    inv = CustomMap(_inverse_of(inner), 1.0)
    hz, hzb = wirtinger(inv, inner(z), method="fd")
    inv_err = float(max(np.max(np.abs(hz - gz)), np.max(np.abs(hzb - gzb))))

    mu1 = abs(dilatation(RadialPower(1, 1, 1, 1), 0.4 + 0.2j, method="fd"))
    mu2 = abs(dilatation(RadialPower(1, 2, -1.5, 1), 0.4 + 0.2j, method="fd"))
    mu_err = max(abs(mu1 - 1 / 3), abs(mu2 - 3 / 5))
    ok = comp_err < 1e-5 and inv_err < 1e-5 and mu_err < 1e-6
    return ok, (f"composition {comp_err:.1e}, inverse {inv_err:.1e}, "
                f"|mu| 1/3 and 3/5 to {mu_err:.1e}")


def criterion_10():
    rng = np.random.default_rng(SEED)
    worst = {"lift periodicity": 0.0, "exp conjugation": 0.0, "descend branch": 0.0,
             "psi periodicity": 0.0}
    for getter in (_koenigs, _boettcher, _repelling, _perturbed):
        fmap, setup, result = getter()
        lo, hi = setup.window
        z = rng.uniform(lo, hi, 200) + 1j * rng.uniform(-np.pi, np.pi, 200)
        lift = setup.lift
        worst["lift periodicity"] = max(worst["lift periodicity"],
                                        periodicity_defect(lift, z, setup.degree))
        conj = float(np.max(np.abs(np.exp(lift(z)) / fmap(np.exp(z)) - 1)))
        worst["exp conjugation"] = max(worst["exp conjugation"], conj)
        zs = z[:40]
        a, b = np.exp(result.psi_tilde(zs)), np.exp(result.psi_tilde(zs + 2j * np.pi))
        worst["descend branch"] = max(worst["descend branch"],
                                      float(np.max(np.abs(a - b) / np.abs(a))))
        worst["psi periodicity"] = max(worst["psi periodicity"],
                                       periodicity_defect(result.psi_tilde, zs, 1))
    ok = all(v < 1e-9 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


def _report(i):
    ok, detail = CRITERIA[i - 1]()
    line = f"criterion {i:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok, line


@pytest.mark.parametrize("i", range(1, 11))
def test_criterion(i, capsys):
    ok, line = _report(i)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_report(i) for i in range(1, 11)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
