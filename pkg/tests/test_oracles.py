import math

import numpy as np
import pytest

from qrlin.conjugacy import probe_disk
from qrlin.errors import ConvergenceError
from qrlin.lift import make_lift
from qrlin.maps import HolomorphicSeries
from qrlin.oracles import (
    RadialConjugacy, boettcher, compare_full, invert_series, koenigs, oracle_for,
    sternberg_radial,
)
from qrlin.radial import profile_from_function

Z = 0.05 * np.exp(1j * np.linspace(0, 2 * np.pi, 17)[:-1])


def test_koenigs_examples():
    lam = 0.4 + 0.3j
    np.testing.assert_allclose(koenigs((lam,), lam, Z), Z, atol=1e-16)
    f = HolomorphicSeries((0.5, 0.1), 1)
    phi = koenigs(f.coeffs, 0.5, Z)
    np.testing.assert_allclose(koenigs(f.coeffs, 0.5, f(Z)), 0.5 * phi, atol=1e-10 * 0.05)
    with pytest.raises(ValueError):
        koenigs((1.2,), 1.2, Z)


def test_boettcher_examples():
    for d in (2, 3):
        f = HolomorphicSeries((0,) * (d - 1) + (1,), 1)
        np.testing.assert_allclose(boettcher(make_lift(f), d, Z), Z, rtol=1e-14)
    f = HolomorphicSeries((0, 1, 0.1), 0.5)
    lift = make_lift(f)
    phi = boettcher(lift, 2, Z)
    assert np.max(np.abs(boettcher(lift, 2, f(Z)) - phi ** 2)) < 1e-9
    with pytest.raises(ValueError):
        boettcher(lift, 1, Z)


def test_invert_series_composes_to_identity():
    coeffs = (2, 0.3, -0.1)
    inv = invert_series(coeffs)
    f = HolomorphicSeries(coeffs, 1)
    g = HolomorphicSeries(inv, 1)
    w = 0.01 * np.exp(1j * np.linspace(0, 6, 9))
    np.testing.assert_allclose(f(g(w)), w, atol=1e-15)
    with pytest.raises(ValueError):
        invert_series((0, 1))


def _profile(func, deriv, degree):
    return profile_from_function(func, deriv, -40, math.log(0.5), 800, degree)


def test_radial_koenigs_for_linear_profile_is_identity():
    prof = _profile(lambda t: t + math.log(0.5), lambda t: 1 + 0 * t, 1)
    r = np.array([1e-3, 0.01, 0.1])
    np.testing.assert_allclose(sternberg_radial(prof, "koenigs", r), r, rtol=1e-10)


def test_radial_koenigs_functional_equation():
    prof = _profile(lambda t: 0.5 * np.log(0.25 * np.exp(2 * t) + 2 * np.exp(4 * t)),
                    lambda t: (0.5 * np.exp(2 * t) + 8 * np.exp(4 * t))
                    / (2 * (0.25 * np.exp(2 * t) + 2 * np.exp(4 * t))), 1)
    r = np.array([1e-3, 0.01, 0.1])
    h = sternberg_radial(prof, "koenigs", r)
    np.testing.assert_allclose(sternberg_radial(prof, "koenigs", prof.rho(r)), 0.5 * h, rtol=1e-9)


def test_radial_boettcher_functional_equation():
    prof = _profile(lambda t: 2 * t + np.log1p(np.exp(t)), lambda t: 2 + 1 / (1 + np.exp(-t)), 2)
    r = np.array([1e-3, 0.01, 0.1])
    h = sternberg_radial(prof, "boettcher", r)
    np.testing.assert_allclose(sternberg_radial(prof, "boettcher", prof.rho(r)), h ** 2, rtol=1e-9)
    with pytest.raises(ValueError):
        sternberg_radial(_profile(lambda t: t, lambda t: 1 + 0 * t, 1), "boettcher", r)


def test_radial_conjugacy_commutes_with_rotation_and_inverts(run):
    _, setup, _ = run("koenigs")
    H = RadialConjugacy(setup.profile, "koenigs")
    w = np.exp(0.7j)
    np.testing.assert_allclose(H(w * Z), w * H(Z), rtol=1e-14)
    np.testing.assert_allclose(H.inverse(H(Z)), Z, rtol=1e-10)
    assert H(0) == 0


def test_radial_conjugacy_straightens_the_representative(run):
    fmap, setup, _ = run("koenigs")
    H = RadialConjugacy(setup.profile, "koenigs")
    z = probe_disk(0.05, 6, 12)
    lhs = H(setup.rep(H.inverse(z)))
    np.testing.assert_allclose(lhs, fmap.coeffs[0] * z, atol=1e-8 * 0.05)


def test_compare_full_of_linear_map_is_exact():
    lam = 0.5
    prof = _profile(lambda t: t + math.log(lam), lambda t: 1 + 0 * t, 1)
    H = RadialConjugacy(prof, "koenigs")
    err, c = compare_full(Z, koenigs((lam,), lam, Z), H, return_constant=True)
    assert err < 1e-14 and c == pytest.approx(1)
    with pytest.raises(ConvergenceError):
        compare_full(np.zeros(3), Z[:3], lambda u: u)


@pytest.mark.parametrize("name,limit", [("koenigs", 1e-4), ("boettcher", 1e-4), ("repelling", 1e-3)])
def test_pipeline_agrees_with_classical_coordinate(run, name, limit):
    fmap, setup, result = run(name)
    phi, radial_mode = oracle_for(fmap, setup.lift, setup.mode)
    disk = probe_disk(min(0.05, 0.5 * setup.radius))
    if setup.mode == "repelling":
        disk = disk[np.abs(fmap(disk)) < 0.9 * setup.radius]
    H = RadialConjugacy(setup.profile, radial_mode)
    assert compare_full(result.psi(disk), phi(disk), H) < limit


def test_oracle_requires_holomorphic_input(run):
    fmap, setup, _ = run("perturbed")
    with pytest.raises(ValueError):
        oracle_for(fmap, setup.lift, setup.mode)
