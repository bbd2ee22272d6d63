import math

import numpy as np
import pytest

from curvevar import (
    PWillmoreSetting,
    coercivity_bound,
    harmonic_field,
    harmonic_project,
    integrate,
    poincare_check,
    pwillmore_el_residual,
    random_span_field,
    sample_builtin,
    second_variation,
    sphere_index_form,
    sphere_spectrum,
    stability_report,
    volume_variations,
)
from curvevar.calculus import ScalarField
from curvevar.errors import ConfigError


def test_spectrum_values():
    assert sphere_spectrum(0) == (0.0, 1)
    assert sphere_spectrum(1) == (2.0, 3)
    assert sphere_spectrum(2) == (6.0, 6)
    assert sphere_spectrum(3) == (12.0, 10)
    lam, mult = sphere_spectrum(2, r=2.0)
    assert lam == pytest.approx(1.5)
    assert mult == 6


def test_harmonics_are_eigenfunctions(sphere):
    from curvevar import laplace_beltrami

    for l in (1, 2, 4):
        for m in (-l, 0, l - 1):
            y = harmonic_field(sphere, l, m)
            res = laplace_beltrami(y, sphere).values + l * (l + 1) * y.values
            assert np.max(np.abs(res)) < 1e-9, (l, m)


def test_harmonics_orthonormal(sphere2):
    pairs = [((1, 0), (1, 0), 1.0), ((1, 0), (2, 0), 0.0), ((2, 1), (2, 1), 1.0), ((2, 1), (2, -1), 0.0), ((3, 2), (3, 2), 1.0)]
    for (l1, m1), (l2, m2), expected in pairs:
        y1 = harmonic_field(sphere2, l1, m1)
        y2 = harmonic_field(sphere2, l2, m2)
        assert integrate(y1.values * y2.values, sphere2) == pytest.approx(expected, abs=1e-10)


def test_harmonic_projection_parseval(sphere):
    u = random_span_field(sphere, 21)
    dec = harmonic_project(u, l_max=8)
    assert dec.parseval_defect() < 1e-8
    assert integrate(u.values**2, sphere) == pytest.approx(1.0, abs=1e-8)


def test_projection_recovers_coefficients(sphere):
    y20 = harmonic_field(sphere, 2, 0)
    y31 = harmonic_field(sphere, 3, 1)
    u = 0.5 * y20 + (-1.25) * y31
    dec = harmonic_project(u, l_max=5)
    assert dec.coefficients[(2, 0)] == pytest.approx(0.5, abs=1e-10)
    assert dec.coefficients[(3, 1)] == pytest.approx(-1.25, abs=1e-10)
    assert dec.coefficients[(4, 0)] == pytest.approx(0.0, abs=1e-10)


def test_index_form_known_values(sphere):
    setting = PWillmoreSetting(3.0)
    assert sphere_index_form(setting, harmonic_field(sphere, 1, 0)) == pytest.approx(-2.0, abs=1e-9)
    assert sphere_index_form(setting, harmonic_field(sphere, 2, 0)) == pytest.approx(26.0, abs=1e-9)


def test_index_form_closed_expression(sphere2):
    """Against the eigenvalue form r^{-p}[p(p-1) r^2 lam^2/4
    - (p^2-p-1) lam + (p-1)(p-2)/r^2] for unit-norm harmonics."""
    r = 2.0
    for p in (2.0, 3.0, 2.5):
        setting = PWillmoreSetting(p, r)
        for l in (1, 2, 3):
            lam = l * (l + 1) / r**2
            expected = (0.25 * p * (p - 1) * r**2 * lam**2 - (p**2 - p - 1) * lam + (p - 1) * (p - 2) / r**2) / r**p
            got = sphere_index_form(setting, harmonic_field(sphere2, l, 0))
            assert got == pytest.approx(expected, abs=1e-9), (p, l)


def test_index_form_matches_general_second_variation(sphere):
    """The sphere-specialized index form agrees with the general
    second-variation machinery for the H^p density."""
    from curvevar.densities import pwillmore

    for p in (2, 3):
        setting = PWillmoreSetting(float(p))
        for l, m in ((1, 0), (2, 0), (2, 2), (3, -1)):
            u = harmonic_field(sphere, l, m)
            special = sphere_index_form(setting, u)
            general = second_variation(sphere, pwillmore(p), u)
            assert abs(special - general) < 1e-6, (p, l, m)


def test_index_form_rotational_symmetry(sphere):
    setting = PWillmoreSetting(2.5)
    vals = [sphere_index_form(setting, harmonic_field(sphere, 3, m)) for m in range(-3, 4)]
    assert max(vals) - min(vals) < 1e-8


def test_index_form_rejects_nonzero_mean(sphere):
    with pytest.raises(ConfigError):
        sphere_index_form(PWillmoreSetting(2.0), ScalarField.constant(1.0, sphere))


def test_el_residual_specialization(sphere2):
    """Dedicated H^p residual against the general Euler-Lagrange residual."""
    from curvevar import el_residual
    from curvevar.densities import pwillmore

    for p in (2.0, 3.0):
        special = pwillmore_el_residual(sphere2, p)
        general = el_residual(sphere2, pwillmore(p))
        assert np.max(np.abs(special.values - general.values)) < 1e-8


def test_minimal_surface_solves_pwillmore_flow():
    """Minimal surfaces are p-Willmore critical for p >= 2 (every term of
    the residual carries a factor of H)."""
    s = sample_builtin("catenoid", {})
    assert np.max(np.abs(pwillmore_el_residual(s, 3.0).values)) < 1e-10


def test_sphere_residual_is_constant(sphere2):
    res = pwillmore_el_residual(sphere2, 3.0).values
    assert np.max(res) - np.min(res) < 1e-9
    # value: p(2H^2 - K) H^{p-1} - 2 H^{p+1} = (p - 2) / r^{p+1} at H = K^(1/2) = 1/r
    assert np.mean(res) == pytest.approx(1.0 / 2.0**4, abs=1e-9)


def test_poincare_chain(sphere):
    rep = poincare_check(harmonic_field(sphere, 2, 0))
    assert rep.passes
    assert rep.equality  # l = 2 saturates both bounds
    assert rep.ratios[0] == pytest.approx(1.0, abs=1e-9)
    assert rep.ratios[1] == pytest.approx(1.0, abs=1e-9)
    rep3 = poincare_check(harmonic_field(sphere, 3, 1))
    assert rep3.passes
    assert not rep3.equality
    assert rep3.ratios[0] == pytest.approx(2.0, abs=1e-8)
    assert rep3.ratios[1] == pytest.approx(4.0, abs=1e-8)


def test_poincare_requires_orthogonality(sphere):
    with pytest.raises(ConfigError):
        poincare_check(harmonic_field(sphere, 1, 0))
    with pytest.raises(ConfigError):
        poincare_check(ScalarField.constant(1.0, sphere))


def test_volume_variations(sphere):
    u = harmonic_field(sphere, 2, 0)
    dv, d2v = volume_variations(sphere, u)
    assert abs(dv) < 1e-10
    assert d2v == pytest.approx(-2.0, abs=1e-9)  # -2 H |u|^2 with H = 1, unit norm


def test_stability_report_sign_patterns():
    rep2 = stability_report(PWillmoreSetting(2.0), l_max=4)
    assert rep2.sign_summary.startswith("l=1:0")
    assert all(s.endswith("+") for s in rep2.sign_summary.split()[1:])

    rep3 = stability_report(PWillmoreSetting(3.0), l_max=4)
    assert rep3.sign_summary.split()[0] == "l=1:-"
    assert "unstable" in rep3.verdict

    # p = 1: the first-eigenspace value is (p^2 - p - 1) lam = +2 > 0
    rep1 = stability_report(PWillmoreSetting(1.0), l_max=4)
    assert rep1.sign_summary.split()[0] == "l=1:+"


def test_coercivity_bound_holds():
    for p in (2.0, 2.5, 3.0, 4.0):
        for r in (1.0, 2.0):
            rep = stability_report(PWillmoreSetting(p, r), l_max=5)
            assert rep.coercivity_bound == pytest.approx((2 * p**2 - 3 * p + 4) / (2 * r**2))
            assert rep.min_rayleigh >= rep.coercivity_bound - 1e-9


def test_setting_validation():
    with pytest.raises(ConfigError):
        PWillmoreSetting(0.5)
    with pytest.raises(ConfigError):
        PWillmoreSetting(2.0, r=-1.0)


def test_spectrum_math_consistency():
    for k in range(6):
        lam, mult = sphere_spectrum(k)
        assert lam == k * (k + 1)
        assert mult == math.comb(k + 2, 2)
