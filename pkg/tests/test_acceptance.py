"""Acceptance criteria 1-8 with their tolerances and runtime limits.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import DATA, HOME, record_criterion, table_scenario
from polishpath.cli import load_config
from polishpath.cls import Toolpath, parse_cls, serialize_cls
from polishpath.dosing import DispenserSpec, steps_for_volume
from polishpath.emitter import TABLE_CALL, emit_robot_script
from polishpath.forcesim import ContactModel, ControllerParams, compute_stats, simulate_contact
from polishpath.geometry import mirror_toolpath
from polishpath.kinematics import DEXTERITY_THRESHOLD, dexterity, forward_kinematics, jacobian, ur5e
from polishpath.motion import FeedParams, MoveKind, compile_pipeline, feedrate_pass, lambda_of_radius
from polishpath.recipe import estimate_cycle, load_recipe, resolve
from polishpath.shapes import shoe_library

from test_forcesim import quantile_oracle
from test_kinematics import numeric_jacobian


@contextmanager
def criterion(name, limit_s):
    t0 = time.perf_counter()
    detail = ""
    try:
        yield
    except BaseException as exc:
        detail = f"({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        record_criterion(name, False, detail)
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < limit_s
    record_criterion(name, ok, f"({elapsed:.2f} s, limit {limit_s:g} s)")
    assert ok, f"{name} took {elapsed:.2f} s"


def test_1_dosing():
    with criterion("1 dosing", 1.0):
        spec = DispenserSpec(D=50, theta=1.8, p=5)
        assert steps_for_volume(spec, 1000.0) == 20
        assert abs(spec.volume_per_step - 49.087) <= 0.001
        rng = np.random.default_rng(1)
        for v in rng.uniform(0, 50000, 100):
            assert abs(steps_for_volume(spec, 2 * v) - 2 * steps_for_volume(spec, v)) <= 1


def test_2_feed_law():
    with criterion("2 feed law", 1.0):
        n = 50
        line = Toolpath.from_arrays("l", np.column_stack([np.linspace(0, 0.3, n), np.zeros(n), np.zeros(n)]), np.tile([0, 0, 1.0], (n, 1)))
        assert all(f"{v:.6f}" == "0.030000" for v in feedrate_pass(line, FeedParams()))
        t = np.linspace(0, 1.0, 20)
        arc = Toolpath.from_arrays("a", np.column_stack([0.02 * np.cos(t), 0.02 * np.sin(t), np.zeros(20)]), np.tile([0, 0, 1.0], (20, 1)))
        np.testing.assert_allclose(feedrate_pass(arc, FeedParams(red_value=1, k=25)), 0.015, rtol=1e-9, atol=0)
        p = FeedParams(red_value=1.0)
        gaps = [abs(p.v0 / lambda_of_radius(p.r_lim - e, p) - p.v0 / lambda_of_radius(p.r_lim + e, p)) for e in 10.0 ** -np.arange(2, 12)]
        assert all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-10
        rng = np.random.default_rng(2)
        for _ in range(200):
            q = FeedParams(red_value=rng.uniform(1, 5), k=rng.uniform(0, 100))
            pts = np.cumsum(rng.normal(0, 0.01, (30, 3)), axis=0)
            tp = Toolpath.from_arrays("r", pts, np.tile([0, 0, 1.0], (30, 1)))
            assert np.max(feedrate_pass(tp, q)) <= q.v0


def test_3_kinematics():
    with criterion("3 kinematics", 10.0):
        m = ur5e()
        np.testing.assert_allclose(forward_kinematics(m, np.zeros(6)).translation, [-0.8172, -0.2329, 0.0628], atol=1e-4)
        rng = np.random.default_rng(3)
        worst = max(np.max(np.abs(jacobian(m, q) - numeric_jacobian(m, q))) for q in rng.uniform(-math.pi, math.pi, (100, 6)))
        assert worst < 1e-5
        assert dexterity(m, np.array([0.4, -1.3, 1.1, -0.9, 0.0, 0.2])) < 1e-6
        assert DEXTERITY_THRESHOLD == 1e-3


def test_4_mirroring():
    with criterion("4 mirroring", 5.0):
        text = (DATA / "shoe_right.cls").read_text()
        paths, diags = parse_cls(text)
        assert not diags
        twice = [mirror_toolpath(mirror_toolpath(tp)) for tp in paths]
        assert serialize_cls(twice) == text
        once = parse_cls(serialize_cls([mirror_toolpath(tp) for tp in paths]))[0]
        assert serialize_cls([mirror_toolpath(tp) for tp in once]) == text
        rng = np.random.default_rng(4)
        for i in range(100):
            n = int(rng.integers(2, 60))
            ax = rng.normal(size=(n, 3))
            tp = Toolpath.from_arrays(f"r{i}", rng.uniform(-0.3, 0.3, (n, 3)), ax / np.linalg.norm(ax, axis=1, keepdims=True))
            m = mirror_toolpath(tp)
            d0 = np.linalg.norm(tp.positions[:, None] - tp.positions[None], axis=2)
            d1 = np.linalg.norm(m.positions[:, None] - m.positions[None], axis=2)
            assert np.max(np.abs(d0 - d1)) < 1e-9


def test_5_force_loop():
    with criterion("5 force loop", 30.0):
        n = 181
        line = Toolpath.from_arrays("long", np.column_stack([np.linspace(0, 1.8, n), np.zeros(n), np.zeros(n)]), np.tile([0, 0, 1.0], (n, 1)))
        v = np.full(n, 0.03)  # 60 s of contact
        quiet = simulate_contact(line, v, ContactModel(noise_sigma=0.0), ControllerParams())
        assert quiet.t[-1] >= 59.99
        assert abs(np.mean(quiet.window(5.0)) - 5.0) <= 0.05
        noisy = simulate_contact(line, v, ContactModel(noise_sigma=0.3), ControllerParams(), seed=11)
        assert abs(np.mean(noisy.force) - 5.0) <= 0.1
        s = compute_stats(noisy)
        f = noisy.force.tolist()
        for got, q in ((s.q1, 0.25), (s.median, 0.5), (s.q3, 0.75)):
            assert abs(got - quantile_oracle(f, q)) <= 1e-12
        lo = quantile_oracle(f, 0.25) - 1.5 * (quantile_oracle(f, 0.75) - quantile_oracle(f, 0.25))
        hi = quantile_oracle(f, 0.75) + 1.5 * (quantile_oracle(f, 0.75) - quantile_oracle(f, 0.25))
        assert s.outlier_count == sum(1 for x in f if x < lo or x > hi)


def _radius_law_of_sines(a, b, c):
    u, w = a - b, c - b
    ang = math.atan2(np.linalg.norm(np.cross(u, w)), np.dot(u, w))
    if math.sin(ang) < 1e-12:
        return math.inf
    return np.linalg.norm(c - a) / (2 * math.sin(ang))


def test_6_end_to_end():
    with criterion("6 end-to-end", 30.0):
        cfg = load_config(DATA / "hemisphere.json")
        text = (DATA / "hemisphere_toe.cls").read_text()
        scripts = []
        for _ in range(2):
            paths, diags = parse_cls(text)
            assert not diags
            compiled = compile_pipeline(paths, cfg.frames, cfg.robot, cfg.feed, cfg.force, cfg.threshold, cfg.name)
            scripts.append(emit_robot_script(compiled.program).text())
        assert scripts[0] == scripts[1]
        assert scripts[0].count("thread force_thread()") == 1
        tp = paths[0]
        assert abs(tp.pitch - 6.0) < 1e-12 and math.isclose(np.linalg.norm(tp.positions[200] - [0, 0, 0]), 0.04, rel_tol=1e-9)
        pts = tp.positions
        r = [math.inf] + [_radius_law_of_sines(pts[i - 1], pts[i], pts[i + 1]) for i in range(1, len(pts) - 1)] + [math.inf]
        r[0], r[-1] = r[1], r[-2]
        expected = np.array(r) < cfg.feed.r_lim
        speeds = np.array([c.speed for c in compiled.program.moves if c.kind is MoveKind.PROCESS])
        assert len(speeds) == len(pts)
        assert np.array_equal(speeds < cfg.feed.v0, expected)
        assert 0 < expected.sum() < len(expected)


def test_7_cycle_model():
    with criterion("7 cycle model", 5.0):
        lib = shoe_library()
        recipe = load_recipe((DATA / "shoe2_recipe.json").read_text(), set(lib))
        counts = {s.value: p.count for s, p in recipe.sectors.items()}
        assert counts["Toe"] + counts["Vamp"] == 6 and counts["LateralLeft"] == counts["LateralRight"] == counts["Heel"] == 2
        assert len(recipe.pickup_schedule) == 8
        p = FeedParams()
        runs = [(tp, feedrate_pass(tp, p)) for tp in resolve(recipe, lib)]
        minutes = estimate_cycle(recipe, runs, rotations=1).total / 60
        assert 25.0 <= minutes <= 35.0, minutes
        prev = 0.0
        for k in range(len(runs) + 1):
            t = estimate_cycle(recipe, runs[:k]).total
            assert k == 0 or t > prev
            prev = t
        fewer = load_recipe({**_as_doc(recipe), "pickups": [[0, 600]] * 4})
        assert estimate_cycle(fewer, runs).total < estimate_cycle(recipe, runs).total


def _as_doc(recipe):
    return {
        "model_id": recipe.model_id,
        "sectors": {s.value: {"trajectories": list(p.trajectories), "count": p.count} for s, p in recipe.sectors.items()},
        "overheads": dict(recipe.overhead_times),
    }


def test_8_partition():
    with criterion("8 table partition", 10.0):
        frames, toe, heel = table_scenario()
        model = ur5e(mount=load_config(DATA / "hemisphere.json").robot.mount, home=HOME)
        compiled = compile_pipeline([toe, heel], frames, model)
        plan = compiled.plan
        assert [tp.name for tp in plan.direct] == ["toe_front"]
        assert [tp.name for tp in plan.rotated] == ["heel_back"]
        assert not plan.infeasible
        assert compiled.program.table_markers == 1
        assert emit_robot_script(compiled.program).text().count(f"  {TABLE_CALL}(") == 1
