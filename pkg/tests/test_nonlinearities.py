import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfline_ie import (
    OMEGA_BOUNDED,
    OMEGA_SUBLINEAR,
    inverse_by_bisection,
    make_omega,
    make_power_q,
    make_sqrt_family_q,
    make_zero_omega,
    omega_from_config,
    q_from_config,
    validate_omega,
    validate_q,
)


def test_power_q_roundtrip(power_q2):
    u = np.linspace(0.0, 5.0, 64)
    assert np.allclose(power_q2.inverse(power_q2.q(u)), u, atol=1e-12)


def test_power_q_rejects_small_p():
    with pytest.raises(ValueError, match="p must exceed 1"):
        make_power_q(1.0)


def test_sqrt_q_rejects_small_p():
    with pytest.raises(ValueError, match="p must exceed 3/2"):
        make_sqrt_family_q(1.5)


def test_sqrt_family_inverse_identity():
    # closed-form inverse G satisfies 8 G(u) + 1 = (2 u^(a/2) + 1)^2 with a = 1/p
    p = 2.5
    q = make_sqrt_family_q(p)
    alpha = 1.0 / p
    u = np.linspace(1e-6, 9.0, 200)
    g = q.inverse(u)
    assert np.allclose(8.0 * g + 1.0, (2.0 * np.power(u, alpha / 2.0) + 1.0) ** 2, rtol=1e-12)
    assert np.allclose(q.q(g), u, rtol=1e-9, atol=1e-12)


def test_fixed_point_at_one():
    for q in (make_power_q(2.0), make_power_q(3.0), make_sqrt_family_q(2.0)):
        assert float(q.q(1.0)) == pytest.approx(1.0, abs=1e-14)


def test_inverse_by_bisection_matches_closed_form(power_q2):
    u = np.linspace(0.0, 7.0, 33)
    approx = inverse_by_bisection(power_q2.q, u)
    assert np.allclose(approx, power_q2.inverse(u), atol=1e-10)


def test_minorant_endpoints(power_q2):
    assert float(power_q2.minorant(0.0)) == pytest.approx(0.0, abs=1e-15)
    assert float(power_q2.minorant(1.0)) == pytest.approx(1.0, abs=1e-15)


def test_minorant_inequality_sampled():
    # inverse(s*u) >= m(s) * inverse(u) on a lattice
    q = make_sqrt_family_q(2.0)
    s = np.linspace(0.01, 1.0, 25)[:, None]
    u = np.linspace(0.01, 4.0, 40)[None, :]
    lhs = q.inverse(s * u)
    rhs = q.minorant(s) * q.inverse(u)
    assert np.all(lhs >= rhs - 1e-12)


@pytest.mark.parametrize("q,M", [(make_power_q(2.0), 0.5), (make_sqrt_family_q(2.0), 0.5)])
def test_validate_q_passes(q, M):
    report = validate_q(q, M)
    assert report.passed, report.failures


@pytest.mark.parametrize("name,kind", [
    ("O1", OMEGA_BOUNDED),
    ("O2", OMEGA_BOUNDED),
    ("O3", OMEGA_SUBLINEAR),
    ("O4", OMEGA_SUBLINEAR),
])
def test_omega_catalog_kinds(name, kind):
    w = make_omega(name)
    assert w.kind == kind
    report = validate_omega(w)
    assert report.passed, report.failures


def test_omega_envelope_dominates():
    t = np.linspace(0.0, 10.0, 50)
    u = np.linspace(0.0, 5.0, 50)
    for name in ("O1", "O2"):
        w = make_omega(name)
        assert np.all(w.omega(t, u) <= w.envelope(t) + 1e-14)
    for name in ("O3", "O4"):
        w = make_omega(name)
        assert np.all(w.omega(t, u) <= w.envelope(t) * np.maximum(u, 0.0) + 1e-14)


def test_omega_envelope_first_moment_oracle():
    # int_0^inf t / (1 + t^3) dt = 2 pi / (3 sqrt(3))
    from scipy.integrate import quad

    w = make_omega("O2")
    val, _ = quad(lambda t: t * float(w.envelope(np.asarray(t))), 0.0, np.inf, limit=400)
    assert val == pytest.approx(2.0 * math.pi / (3.0 * math.sqrt(3.0)), abs=1e-10)


def test_zero_omega_is_zero():
    w = make_zero_omega()
    t = np.linspace(0.0, 5.0, 17)
    assert np.all(w.omega(t, t + 1.0) == 0.0)
    assert np.all(w.envelope(t) == 0.0)


def test_unknown_omega_rejected():
    with pytest.raises(ValueError, match="unknown perturbation"):
        make_omega("O9")


def test_config_constructors():
    q = q_from_config({"family": "power", "p": 2.0})
    assert q.label == "power" and q.params["p"] == 2.0
    w = omega_from_config({"name": "O4"})
    assert w.label == "O4"


@given(
    t=st.floats(min_value=0.0, max_value=20.0),
    u=st.floats(min_value=0.0, max_value=50.0),
    delta=st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=80, deadline=None)
def test_sublinear_scaling_property(t, u, delta):
    # concavity in u: omega(t, delta*u) >= delta * omega(t, u) for delta in [0,1]
    for name in ("O3", "O4"):
        w = make_omega(name)
        lhs = float(w.omega(t, delta * u))
        rhs = delta * float(w.omega(t, u))
        assert lhs >= rhs - 1e-12


@given(u=st.floats(min_value=0.0, max_value=100.0))
@settings(max_examples=60, deadline=None)
def test_q_convex_chord_property(u):
    q = make_power_q(2.5)
    mid = float(q.q(0.5 * u))
    chord = 0.5 * (float(q.q(0.0)) + float(q.q(u)))
    assert mid <= chord + 1e-9 * max(1.0, chord)
