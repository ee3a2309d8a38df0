import json

import numpy as np
import pytest

from conftest import DATA
from polishpath.cls import Sector, Toolpath
from polishpath.recipe import (
    DEFAULT_OVERHEADS,
    PAD_LIFE,
    RecipeError,
    estimate_cycle,
    heterogeneity_check,
    load_recipe,
    motion_time,
    pad_wear_acknowledge,
    pad_wear_tick,
    pitch_report,
    quality_report,
    resolve,
)
from polishpath.shapes import hemisphere_zigzag, planar_spiral, planar_zigzag, shoe_library

BASE = {
    "model_id": "m",
    "sectors": {"Toe": {"trajectories": ["a", "b"], "count": 3}, "Heel": {"trajectories": ["c"], "count": 1}},
    "pickups": [[0, 600], {"before": 2, "volume": 400}],
}


def test_load_and_sequence():
    r = load_recipe(json.dumps(BASE))
    assert r.trajectory_count == 4
    assert r.sequence() == [(Sector.TOE, "a"), (Sector.TOE, "b"), (Sector.TOE, "a"), (Sector.HEEL, "c")]
    assert r.overhead_times == DEFAULT_OVERHEADS
    assert [p.before for p in r.pickup_schedule] == [0, 2]


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"sectors": {"Sole": {}}}, "sectors.Sole"),
        ({"sectors": {"Toe": {"trajectories": [], "count": 2}}}, "sectors.Toe.trajectories"),
        ({"pickups": [[9, 100]]}, "pickups[0].before"),
        ({"pickups": [[0, -5]]}, "pickups[0].volume"),
        ({"overheads": {"coffee": 3}}, "overheads.coffee"),
        ({"side": "Up"}, "side"),
        ({"f_ref": 0}, "f_ref"),
    ],
)
def test_errors_name_the_field(patch, field):
    with pytest.raises(RecipeError) as exc:
        load_recipe({**BASE, **patch})
    assert exc.value.field == field


def test_unknown_trajectory_id():
    with pytest.raises(RecipeError) as exc:
        load_recipe(BASE, known_ids={"a", "b"})
    assert exc.value.field == "sectors.Heel.trajectories[0]"


def test_invalid_json():
    with pytest.raises(RecipeError):
        load_recipe("{not json")


def test_left_side_mirrors():
    lib = {"a": planar_zigzag(name="a", origin=(0, 0.01, 0)), "b": planar_zigzag(name="b"), "c": planar_zigzag(name="c")}
    right = resolve(load_recipe(BASE), lib)
    left = resolve(load_recipe({**BASE, "side": "Left"}), lib)
    np.testing.assert_allclose(left[0].positions[:, 1], -right[0].positions[:, 1])


def _runs(n, tp):
    return [(tp, np.full(len(tp), 0.03))] * n


def test_cycle_monotone_in_trajectories_and_pickups():
    tp = planar_zigzag()
    r0 = load_recipe({"model_id": "m", "pickups": [[0, 100]]})
    r1 = load_recipe({"model_id": "m", "pickups": [[0, 100], [0, 200]]})
    totals = [estimate_cycle(r0, _runs(n, tp)).total for n in range(5)]
    assert all(b > a for a, b in zip(totals, totals[1:]))
    assert estimate_cycle(r1, _runs(2, tp)).total > estimate_cycle(r0, _runs(2, tp)).total
    assert estimate_cycle(r0, _runs(2, tp), rotations=1).total > estimate_cycle(r0, _runs(2, tp)).total


def test_motion_time_straight():
    tp = Toolpath.from_arrays("l", [[0, 0, 0], [0.03, 0, 0]], [[0, 0, 1]] * 2)
    assert motion_time(tp, [0.03, 0.03]) == pytest.approx(1.0)
    with pytest.raises(RecipeError):
        motion_time(tp, [0.03])


def test_pitch_report_planar_and_spiral():
    z = pitch_report(planar_zigzag(pitch=0.006))
    assert z.applicable and z.ok and z.min == pytest.approx(6.0, abs=1e-6) and z.max == pytest.approx(6.0, abs=1e-6)
    s = pitch_report(planar_spiral(pitch=0.005))
    assert s.ok and abs(s.mean - 5.0) < 0.1
    assert not pitch_report(planar_zigzag(pitch=0.004)).ok
    assert not pitch_report(planar_zigzag(pitch=0.009)).ok


def test_hemisphere_pitch_constant():
    rep = pitch_report(hemisphere_zigzag())
    assert rep.ok and abs(np.median(rep.distances) - 6.0) < 0.05


def test_heterogeneity():
    a = planar_zigzag(name="a")
    b = planar_zigzag(name="b", origin=(0.001, 0, 0))
    ok, pairs = heterogeneity_check([a, b])
    assert not ok and ("a", "b", "start") in pairs
    ok, _ = heterogeneity_check([a, planar_zigzag(name="c", origin=(0.0, 0.05, 0))])
    assert ok


def test_pad_wear_counter():
    c, flag = 0, False
    for i in range(PAD_LIFE):
        c, flag = pad_wear_tick(c)
        assert flag == (i == PAD_LIFE - 1)
    assert pad_wear_acknowledge() == 0


def test_bundled_library_passes_quality_checks():
    lib = shoe_library()
    q = quality_report(list(lib.values()))
    assert q.pitch_ok and q.heterogeneity_ok and not q.replace_pad


def test_bundled_recipe_loads_against_library():
    lib = shoe_library()
    r = load_recipe((DATA / "shoe2_recipe.json").read_text(), set(lib))
    assert len(resolve(r, lib)) == 12 and len(r.pickup_schedule) == 8
