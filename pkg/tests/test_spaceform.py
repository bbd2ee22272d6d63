import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from curvevar import ConfigError, SpaceForm
from curvevar.errors import NotTangentError
from curvevar.spaceform import Model


def _random_point_and_dir(sf, rng):
    if sf.model is Model.EUCLIDEAN:
        p = rng.standard_normal(3)
        n = rng.standard_normal(3)
        return p, n / np.linalg.norm(n)
    p = rng.standard_normal(4)
    if sf.model is Model.SPHERE:
        p = sf.radius * p / np.sqrt(sf.flat_inner(p, p))
    else:
        p[3] = np.sqrt(sf.radius**2 + p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
    v = rng.standard_normal(4)
    # project out the normal component, then normalize
    v = v - sf.flat_inner(p, v) / sf.flat_inner(p, p) * p
    return p, v / np.sqrt(sf.flat_inner(v, v))


@pytest.mark.parametrize("sf", [SpaceForm.sphere(1.0), SpaceForm.sphere(2.5), SpaceForm.hyperbolic(1.0), SpaceForm.hyperbolic(0.7)])
def test_geodesic_stays_on_quadric(sf):
    rng = np.random.default_rng(0)
    for _ in range(10):
        p, n = _random_point_and_dir(sf, rng)
        for s in (-1.3, -0.2, 0.0, 0.4, 2.0):
            q = sf.geodesic_step(p, n, s)
            assert np.max(sf.quadric_residual(q)) < 1e-12


@pytest.mark.parametrize("sf", [SpaceForm.euclidean(), SpaceForm.sphere(1.0), SpaceForm.sphere(1.7), SpaceForm.hyperbolic(1.0)])
def test_geodesic_against_ode_oracle(sf):
    """Closed-form geodesic versus numerical integration of p'' = -k0 <p',p'> p
    (the quadric geodesic equation; trivial straight line in the Euclidean case)."""
    rng = np.random.default_rng(1)
    p, n = _random_point_and_dir(sf, rng)
    d = sf.ambient_dim

    def rhs(t, y):
        pos, vel = y[:d], y[d:]
        if sf.model is Model.EUCLIDEAN:
            acc = np.zeros(d)
        else:
            acc = -sf.k0 * sf.flat_inner(vel, vel) * pos
        return np.concatenate([vel, acc])

    s_end = 1.1
    sol = solve_ivp(rhs, (0.0, s_end), np.concatenate([p, n]), rtol=1e-11, atol=1e-12)
    q_ode = sol.y[:d, -1]
    q = sf.geodesic_step(p, n, s_end)
    assert np.max(np.abs(q - q_ode)) < 1e-8


def test_geodesic_unit_speed():
    sf = SpaceForm.sphere(2.0)
    rng = np.random.default_rng(2)
    p, n = _random_point_and_dir(sf, rng)
    eps = 1e-6
    q1 = sf.geodesic_step(p, n, 0.5 + eps)
    q0 = sf.geodesic_step(p, n, 0.5 - eps)
    vel = (q1 - q0) / (2 * eps)
    assert abs(sf.flat_inner(vel, vel) - 1.0) < 1e-8


@given(
    st.one_of(
        st.just(0.0),
        st.floats(min_value=1e-6, max_value=4.0),
        st.floats(min_value=-4.0, max_value=-1e-6),
    )
)
@settings(max_examples=30, deadline=None)
def test_from_k0_round_trip(k0):
    sf = SpaceForm.from_k0(k0)
    assert sf.k0 == pytest.approx(k0, abs=1e-12)
    assert SpaceForm.from_config(sf.to_config()).k0 == pytest.approx(k0, abs=1e-12)


def test_euclidean_degeneration():
    """Large-radius sphere geodesics converge to straight lines."""
    p3 = np.array([0.3, -0.2, 0.5])
    n3 = np.array([1.0, 2.0, -1.0])
    n3 = n3 / np.linalg.norm(n3)
    straight = p3 + 0.7 * n3
    for rho in (1e2, 1e4):
        sf = SpaceForm.sphere(rho)
        # lift to the quadric near the pole (0,0,0,rho)
        p = np.array([p3[0], p3[1], p3[2], np.sqrt(rho**2 - p3 @ p3)])
        n = np.array([n3[0], n3[1], n3[2], 0.0])
        n = n - sf.flat_inner(p, n) / rho**2 * p
        n = n / np.sqrt(sf.flat_inner(n, n))
        q = sf.geodesic_step(p, n, 0.7)
        assert np.max(np.abs(q[:3] - straight)) < 5.0 / rho


def test_tangency_enforced():
    sf = SpaceForm.sphere(1.0)
    p = np.array([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(NotTangentError):
        sf.geodesic_step(p, np.array([1.0, 0.0, 0.0, 0.0]), 0.1)
    with pytest.raises(NotTangentError):
        # unit vector but not tangent at p
        sf.geodesic_step(p, np.array([np.sqrt(0.5), np.sqrt(0.5), 0.0, 0.0]), 0.1)


def test_config_validation():
    with pytest.raises(ConfigError):
        SpaceForm.sphere(-1.0)
    with pytest.raises(ConfigError):
        SpaceForm.from_config({"k0": 1.0, "model_radius": 2.0})
    with pytest.raises(ConfigError):
        SpaceForm.from_config({"k0": 0.0, "model_radius": 1.0})
    assert SpaceForm.from_config({"k0": 0.25, "model_radius": 2.0}).radius == pytest.approx(2.0)


def test_hyperbolic_signature():
    sf = SpaceForm.hyperbolic(1.0)
    assert sf.flat_inner(np.array([0, 0, 0, 1.0]), np.array([0, 0, 0, 1.0])) == -1.0
    p = np.array([0.0, 0.0, 0.0, 1.0])
    assert sf.quadric_residual(p) < 1e-15
