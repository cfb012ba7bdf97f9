import math
from types import SimpleNamespace

import numpy as np
import pytest

from qrlin.conjugacy import (
    descend, dilatation_decay, iterate, probe_disk, psi_tilde_eval, residual,
    telescoping_defect,
)
from qrlin.errors import ConvergenceError, DomainError, DomainEscapeError
from qrlin.lift import periodicity_defect
from qrlin.pipeline import linearize

EXACT = ["z|z|", "z2|z|^-3/2", "2i z|z|^1/2"]
INEXACT = ["koenigs", "boettcher", "repelling", "perturbed"]


def _probe(setup, rng, n=50):
    lo, hi = setup.window
    return rng.uniform(lo, hi, n) + 1j * rng.uniform(-np.pi, np.pi, n)


@pytest.mark.parametrize("name", EXACT)
def test_exact_representative_gives_identity(run, name, rng):
    _, setup, result = run(name)
    assert result.k_used == 1 and max(result.error_history) < 1e-10
    z = _probe(setup, rng)
    for k in (1, 2, 3):
        np.testing.assert_allclose(psi_tilde_eval(setup.lift, setup.sep, z, k, setup.mode, setup.lam),
                                   z, atol=1e-10)
    assert result.residual < 1e-10


def test_superrepelling_case_uses_the_inverse_iteration(run):
    _, setup, result = run("z2|z|^-3/2")
    assert setup.mode == result.mode == "repelling"


def test_first_step_respects_the_one_step_bound(run):
    _, setup, _ = run("koenigs")
    rep = setup.report
    z = -3.0 + 0j
    if z.real < setup.window[0]:
        z = complex(setup.window[0] + 0.5)
    err = abs(psi_tilde_eval(setup.lift, setup.sep, z, 1) - z)
    assert err <= rep.L * rep.T1 * math.exp(rep.alpha * z.real)


@pytest.mark.parametrize("name", INEXACT)
def test_cauchy_ratio_respects_contraction_rate(run, name):
    _, setup, result = run(name)
    rep = setup.report
    lam = rep.lam if setup.mode == "attracting" else 1 / rep.lam
    rate = 0.0 if math.isinf(rep.alpha) else rep.L * lam ** rep.alpha
    tail = result.ratios[1:]
    assert all(r <= rate + 0.1 for r in tail)


def test_geometric_cauchy_ratio_is_near_multiplier(run):
    _, _, result = run("koenigs")
    assert np.median(result.ratios[2:]) == pytest.approx(0.5, abs=0.05)


@pytest.mark.parametrize("name", INEXACT)
def test_error_envelope_and_first_step_bound_hold(run, name):
    _, _, result = run(name)
    assert result.bound_applicable
    assert result.bound_check and result.first_step_check


@pytest.mark.parametrize("name", INEXACT)
def test_telescoping_identity(run, name, rng):
    _, setup, result = run(name)
    z = _probe(setup, rng, 30)
    for k in sorted({1, 2, result.k_used // 2, result.k_used}):
        assert telescoping_defect(result, z, max(k, 1)) < 1e-9


@pytest.mark.parametrize("name", INEXACT + EXACT)
def test_psi_tilde_is_periodic(run, name, rng):
    _, setup, result = run(name)
    z = _probe(setup, rng, 30)
    assert periodicity_defect(result.psi_tilde, z, 1) < 1e-9


def test_descend_examples():
    stub = SimpleNamespace(radius=1.0, psi_tilde=lambda w: w)
    z = np.array([0.1 + 0.2j, -0.3j, 0])
    np.testing.assert_allclose(descend(stub, z), z)
    c = 0.2 - 0.7j
    shifted = SimpleNamespace(radius=1.0, psi_tilde=lambda w: np.asarray(w) + c)
    np.testing.assert_allclose(descend(shifted, z), np.exp(c) * z)
    with pytest.raises(DomainError):
        descend(stub, 1.5)


@pytest.mark.parametrize("name", INEXACT)
def test_descend_is_branch_independent(run, name):
    _, setup, result = run(name)
    lz = np.log(probe_disk(min(0.05, 0.5 * setup.radius), 6, 12))
    a = np.exp(result.psi_tilde(lz))
    b = np.exp(result.psi_tilde(lz + 2j * np.pi))
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(a)) + 1e-15


@pytest.mark.parametrize("name,limit", [("koenigs", 1e-6), ("boettcher", 1e-6), ("repelling", 1e-6),
                                        ("perturbed", 1e-5)])
def test_conjugacy_residual(run, name, limit):
    assert run(name)[2].residual < limit


def test_truncated_iteration_has_larger_residual(run):
    fmap, setup, result = run("koenigs")
    one = iterate(setup.lift, setup.sep, setup.report, mode="attracting", tol=1e9, k_max=1)
    disk = probe_disk(0.05)
    assert residual(one, fmap, setup.rep, disk) > 10 * result.residual


def test_dilatation_decay_of_identity_is_sentinel(run):
    _, _, result = run("z|z|")
    assert dilatation_decay(result) == (0.0, math.inf)


@pytest.mark.parametrize("name", ["koenigs", "perturbed", "repelling"])
def test_psi_is_asymptotically_conformal(run, name):
    _, setup, result = run(name)
    C, nu_fit = result.mu_decay
    assert nu_fit > 0
    assert nu_fit >= 0.8 * min(setup.report.nu, 1.0)


def test_wrong_mode_escapes_the_domain(run):
    fmap, setup, _ = run("repelling")
    z = setup.window[0] + 0j
    with pytest.raises(DomainEscapeError):
        psi_tilde_eval(setup.lift, setup.sep, np.array([z]), 40, "attracting")
    with pytest.raises(DomainEscapeError):
        linearize(run("koenigs")[0], mode="repelling")


def test_iteration_budget_exhaustion_raises(run):
    _, setup, _ = run("koenigs")
    with pytest.raises(ConvergenceError):
        iterate(setup.lift, setup.sep, setup.report, mode="attracting", tol=1e-14, k_max=3)
