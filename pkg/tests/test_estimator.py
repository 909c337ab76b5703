import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvpol import estimator as est
from nvpol.dynamics import CoherenceSurface, c_k, delta_surface
from nvpol.environment import Graded, Uniform, load_table1, set_polarization
from nvpol.errors import AllPointsExcluded, EmptySurface, NonPositiveOmega, OutOfRange, SoundnessViolation
from nvpol.estimator import (
    BoundEstimate,
    Method,
    bound_time_dependent,
    bound_time_independent,
    bound_vs_polarization,
    default_grid,
    estimate,
    per_tau_curve,
    soundness_check,
)
from nvpol.validation import random_environment

COARSE = np.linspace(0, 100, 96)


def surface_of(values, tau=None, t=None):
    values = np.asarray(values, dtype=complex)
    tau = np.arange(values.shape[0], dtype=float) if tau is None else np.asarray(tau, float)
    t = np.arange(values.shape[1], dtype=float) if t is None else np.asarray(t, float)
    return CoherenceSurface(tau, t, values)


def test_zero_surface_gives_zero_bounds():
    s = surface_of(np.zeros((4, 5)))
    assert bound_time_independent(s, 3).value == 0.0
    assert bound_time_dependent(s, 3, 0.3).value == 0.0


def test_time_independent_single_spin_is_half_max_c(table1):
    env = set_polarization(table1.truncated(1).with_field(25), Uniform(1.0))
    g = default_grid()
    b = estimate(env, Method.TIME_INDEPENDENT, g, g)
    c = np.abs(c_k(env.spins[0].coupling, env.omega, g[:, None], g[None, :]))
    assert b.value == pytest.approx(0.5 * c.max(), rel=1e-12)
    assert 0 < b.value < 1


def test_time_dependent_single_spin_value(table1):
    env = set_polarization(table1.truncated(1).with_field(100), Uniform(1.0))
    b = estimate(env)
    assert abs(b.value - 0.62) <= 0.05
    assert b.clamped_points == 0
    assert b.grid["tau_points"] == 512 and b.grid["t_max_us"] == 100.0


def test_time_dependent_rejects_zero_field(table1):
    env = set_polarization(table1.truncated(3), Uniform(1.0))
    with pytest.raises(NonPositiveOmega):
        estimate(env, Method.TIME_DEPENDENT, COARSE, COARSE)


def test_all_points_excluded():
    # omega t / 2 = pi at the only t sample
    s = surface_of(np.ones((2, 1)), t=[2 * np.pi / 0.5])
    with pytest.raises(AllPointsExcluded):
        bound_time_dependent(s, 1, 0.5)


def test_empty_surface():
    s = CoherenceSurface(np.zeros(0), np.zeros(3), np.zeros((0, 3), complex))
    with pytest.raises(EmptySurface):
        bound_time_independent(s, 1)
    with pytest.raises(EmptySurface):
        bound_time_dependent(s, 1, 0.1)
    with pytest.raises(EmptySurface):
        per_tau_curve(s, 1)


def test_sin_floor_range():
    with pytest.raises(OutOfRange):
        bound_time_dependent(surface_of(np.ones((1, 2))), 1, 0.1, sin_floor=0.0)


def test_tie_break_is_lexicographic():
    v = np.zeros((3, 4))
    v[2, 0] = v[1, 3] = v[1, 2] = 0.4
    b = bound_time_independent(surface_of(v, tau=[0, 10, 20], t=[0, 1, 2, 3]), 1)
    assert (b.argmax_tau, b.argmax_t) == (10.0, 2.0)


def test_clamped_points_counted():
    omega = 0.2
    t = np.array([1.0, 2.0, 3.0])
    s = np.abs(np.sin(omega * t / 2))
    v = np.array([[1.5 * s[0], 0.5 * s[1], 2.0 * s[2]]])
    b = bound_time_dependent(surface_of(v, t=t), 1, omega)
    assert b.clamped_points == 2
    assert b.value == 1.0
    assert b.argmax_t == 1.0


def test_record_fields():
    b = BoundEstimate(Method.TIME_DEPENDENT, 0.5, 1.0, 2.0, 5, 0.1, {"tau_points": 3}, 0)
    rec = b.to_record()
    assert set(rec) >= {"method", "value", "argmax_tau_us", "argmax_t_us", "n_spins", "omega_rad_per_us", "clamped_points"}
    assert json.loads(json.dumps(rec)) == rec
    assert rec["method"] == "time-dependent"


def test_dominance_on_same_surface(polarized5):
    env = polarized5.with_field(100)
    s = delta_surface(env, COARSE, COARSE)
    ti = bound_time_independent(s, len(env), env.omega)
    td = bound_time_dependent(s, len(env), env.omega)
    assert td.clamped_points == 0
    assert td.value >= ti.value


def test_grid_refinement_never_decreases(polarized5):
    env = polarized5.with_field(100)
    coarse = np.linspace(0, 100, 51)
    fine = np.linspace(0, 100, 101)  # contains every coarse point
    assert np.all(np.isin(coarse, fine))
    for method in Method:
        a = estimate(env, method, coarse, coarse).value
        b = estimate(env, method, fine, fine).value
        assert b >= a


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 1.0))
def test_single_spin_bound_linear_in_p(p):
    base = load_table1(1).with_field(100)
    one = estimate(set_polarization(base, Uniform(1.0)), Method.TIME_DEPENDENT, COARSE, COARSE)
    part = estimate(set_polarization(base, Uniform(p)), Method.TIME_DEPENDENT, COARSE, COARSE)
    assert part.value == pytest.approx(p * one.value, rel=1e-12)


def test_per_tau_curve_peak_matches_time_independent(polarized5):
    s = delta_surface(polarized5, COARSE, COARSE)
    curve = per_tau_curve(s, 5)
    assert curve.shape == COARSE.shape
    assert curve[0] == 0.0
    assert curve.max() == bound_time_independent(s, 5).value


def test_bound_vs_polarization_zero_and_order(table1):
    env = table1.truncated(5)
    rows = bound_vs_polarization(env, [0.0, 0.3, 0.6, 1.0], b_gauss=100, tau_grid=COARSE, t_grid=COARSE)
    assert [p for p, _ in rows] == [0.0, 0.3, 0.6, 1.0]
    assert rows[0][1] == 0.0
    bounds = [b for _, b in rows]
    assert all(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert all(b <= p + 1e-9 for p, b in rows)


def test_bound_vs_polarization_endpoint_matches_estimate(table1):
    env = table1.truncated(5).with_field(100)
    ((_, b),) = bound_vs_polarization(env, [1.0], tau_grid=COARSE, t_grid=COARSE)
    assert b == estimate(set_polarization(env, Uniform(1.0)), Method.TIME_DEPENDENT, COARSE, COARSE).value


def test_bound_vs_polarization_rejects_out_of_range(table1):
    with pytest.raises(OutOfRange):
        bound_vs_polarization(table1.truncated(2), [1.2], b_gauss=50, tau_grid=COARSE, t_grid=COARSE)


@pytest.mark.parametrize("p", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("method", list(Method))
def test_soundness_reference_environment(table1, p, method):
    env = set_polarization(table1.with_field(100), Uniform(p))
    rep = soundness_check(env, method, COARSE, COARSE)
    assert rep.slack >= -1e-9


def test_soundness_graded(table1):
    env = set_polarization(table1.truncated(5).with_field(100), Graded(0.5, 0.261, 7))
    rep = soundness_check(env, Method.TIME_DEPENDENT, COARSE, COARSE)
    assert rep.p_mean == pytest.approx(0.5)
    assert rep.bound.value <= 0.5


def test_soundness_random_environments(rng):
    for _ in range(30):
        env = random_environment(rng, 8)
        env = env.with_field(max(env.b_gauss, 1.0))
        for method in Method:
            soundness_check(env, method, COARSE, COARSE)


def test_soundness_violation_is_raised(polarized5, monkeypatch):
    monkeypatch.setattr(est, "SOUNDNESS_SLACK", -2.0)
    with pytest.raises(SoundnessViolation):
        soundness_check(polarized5, Method.TIME_INDEPENDENT, COARSE, COARSE)
