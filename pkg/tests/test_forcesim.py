import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polishpath.cls import Toolpath
from polishpath.forcesim import (
    ContactModel,
    ControllerParams,
    SimulationError,
    StepProfile,
    compute_stats,
    detect_outliers,
    path_schedule,
    profile_from_dict,
    simulate_contact,
)


def line(length=0.3, n=31):
    pos = np.column_stack([np.linspace(0, length, n), np.zeros(n), np.zeros(n)])
    return Toolpath.from_arrays("line", pos, np.tile([0, 0, 1.0], (n, 1)))


def quantile_oracle(x, q):
    """Linear interpolation between order statistics, position q*(n-1)."""
    s = sorted(x)
    h = q * (len(s) - 1)
    lo = int(h)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (h - lo) * (s[hi] - s[lo])


def test_zero_noise_converges_to_reference():
    tp = line()
    tr = simulate_contact(tp, np.full(len(tp), 0.03), ContactModel(noise_sigma=0.0))
    tr.check()
    assert tr.dt == 0.002
    assert abs(np.mean(tr.window(2.0)) - 5.0) < 1e-6


def test_step_response_matches_linear_oracle():
    """Without saturation the loop is linear: compare against the closed-form recursion."""
    tp = line(0.03)
    ctrl = ControllerParams(max_normal_speed=10.0)
    contact = ContactModel(noise_sigma=0.0)
    tr = simulate_contact(tp, np.full(len(tp), 0.03), contact, ctrl)
    k, c, g, dt = contact.stiffness, contact.damping, ctrl.gain, ctrl.dt
    pen, prev, out = 0.0, 0.0, []
    for _ in range(len(tr)):
        f = k * pen + c * (pen - prev) / dt
        out.append(f)
        prev = pen
        pen = pen + g * (5.0 - f) * dt
    np.testing.assert_allclose(tr.force, np.maximum(out, 0.0), atol=1e-9)


def test_step_disturbance_recovers():
    tp = line()
    contact = ContactModel(noise_sigma=0.0, surface_offset_profile=StepProfile(0.15, 0.001))
    tr = simulate_contact(tp, np.full(len(tp), 0.03), contact)
    t_step = 0.15 / 0.03
    peak = tr.force[(tr.t >= t_step) & (tr.t < t_step + 0.5)].max()
    assert peak > 5.5
    assert abs(tr.force[-1] - 5.0) < 0.01


def test_deterministic_under_seed():
    tp = line()
    v = np.full(len(tp), 0.03)
    a = simulate_contact(tp, v, seed=3)
    b = simulate_contact(tp, v, seed=3)
    c = simulate_contact(tp, v, seed=4)
    assert np.array_equal(a.force, b.force) and not np.array_equal(a.force, c.force)


def test_schedule_uses_mean_segment_speed():
    tp = line(0.02, 3)
    t, s = path_schedule(tp, [0.01, 0.03, 0.01])
    np.testing.assert_allclose(t, [0, 0.5, 1.0])
    np.testing.assert_allclose(s, [0, 0.01, 0.02])


def test_invalid_inputs():
    with pytest.raises(SimulationError):
        ControllerParams(rate=0).dt
    with pytest.raises(SimulationError):
        simulate_contact(line(), np.zeros(31))
    with pytest.raises(SimulationError):
        profile_from_dict({"kind": "wobble"})
    with pytest.raises(SimulationError):
        compute_stats([1.0])


def test_stats_match_bruteforce_oracle(rng):
    x = rng.normal(5, 0.3, 2001)
    s = compute_stats(x)
    assert s.q1 == pytest.approx(quantile_oracle(x, 0.25), abs=1e-12)
    assert s.median == pytest.approx(quantile_oracle(x, 0.5), abs=1e-12)
    assert s.q3 == pytest.approx(quantile_oracle(x, 0.75), abs=1e-12)
    assert s.sigma == pytest.approx(np.sqrt(np.sum((x - x.mean()) ** 2) / (len(x) - 1)), abs=1e-12)


def test_outlier_rule_on_synthetic_trace():
    x = np.array([4.0, 4.5, 5.0, 5.5, 6.0, 20.0, -10.0])
    # q1 4.25, q3 5.75, fences 2.0 and 8.0
    assert detect_outliers(x) == [5, 6]
    assert compute_stats(x).outlier_count == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=200))
def test_stats_invariants(xs):
    s = compute_stats(xs)
    assert s.q1 <= s.median <= s.q3
    assert s.sigma >= 0
    assert 0 <= s.outlier_count < len(xs)
