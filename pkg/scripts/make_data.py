"""Regenerate the bundled example data in src/polishpath/data/."""

import json
import math
from pathlib import Path

import numpy as np

from polishpath.cls import Sector, serialize_cls
from polishpath.geometry import RigidTransform, compose
from polishpath.shapes import cylinder_zigzag, hemisphere_zigzag, shoe_library

DATA = Path(__file__).resolve().parents[1] / "src" / "polishpath" / "data"

HOME = [0.0, -math.pi / 2, math.pi / 2, -math.pi / 2, -math.pi / 2, 0.0]


def robot():
    return {
        "name": "ur5e",
        "dh": [
            {"a": 0.0, "d": 0.1625, "alpha": math.pi / 2},
            {"a": -0.425, "d": 0.0, "alpha": 0.0},
            {"a": -0.3922, "d": 0.0, "alpha": 0.0},
            {"a": 0.0, "d": 0.1333, "alpha": math.pi / 2},
            {"a": 0.0, "d": 0.0997, "alpha": -math.pi / 2},
            {"a": 0.0, "d": 0.0996, "alpha": 0.0},
        ],
        "joint_limits": [[-2 * math.pi, 2 * math.pi]] * 6,
        "joint_speed_limits": [math.pi] * 6,
        # upside-down: base 1.2 m above the floor, z pointing down
        "mount": {"rotvec": [math.pi, 0.0, 0.0], "translation": [0.0, 0.0, 1.2]},
        "tcp_offset": {"rotvec": [0.0, 0.0, 0.0], "translation": [0.0, 0.0, 0.0]},
        "home": HOME,
    }


def frames():
    return {
        "_comment": "poses in the robot base frame; probe_to_heel is a placeholder until measured with the heel support",
        "base_to_shoe_probe": {"rotvec": [math.pi, 0.0, 0.0], "translation": [-0.5, -0.3, 0.3]},
        "probe_to_heel": {"rotvec": [0.0, 0.0, 0.0], "translation": [0.0, 0.0, 0.0]},
        "base_to_table": {"rotvec": [math.pi, 0.0, 0.0], "translation": [-0.5, -0.25, 0.35]},
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "hemisphere_toe.cls").write_text(serialize_cls([hemisphere_zigzag()]))
    lib = shoe_library()
    (DATA / "shoe_right.cls").write_text(serialize_cls(lib.values()))
    (DATA / "ur5e_upside_down.json").write_text(json.dumps(robot(), indent=2) + "\n")
    recipe = {
        "model_id": "derby-A",
        "size": 42,
        "side": "Right",
        "sectors": {
            "Toe": {"trajectories": ["toe_zigzag_6", "toe_spiral_5", "toe_spiral_7_in", "toe_zigzag_8"], "count": 4},
            "Vamp": {"trajectories": ["vamp_zigzag_6", "vamp_zigzag_7"], "count": 2},
            "LateralLeft": {"trajectories": ["lateral_l_zigzag_6", "lateral_l_zigzag_8"], "count": 2},
            "LateralRight": {"trajectories": ["lateral_r_zigzag_6", "lateral_r_zigzag_8"], "count": 2},
            "Heel": {"trajectories": ["heel_zigzag_6", "heel_zigzag_7"], "count": 2},
        },
        "pickups": [[0, 600], [1, 600], [2, 600], [4, 600], [6, 600], [7, 600], [8, 600], [10, 600]],
        "f_ref": 5.0,
        "v0": 0.03,
        "_overheads_comment": "calibration for the synthetic shoe library, not measured data",
        "overheads": {"pickup": 25.0, "homogenize": 45.0, "table_rotate": 6.0},
    }
    (DATA / "shoe2_recipe.json").write_text(json.dumps(recipe, indent=2) + "\n")
    common = {
        "robot": "ur5e_upside_down.json",
        "frames": frames(),
        "feed": {"v0": 0.03, "r_lim": 0.06, "red_value": 1.0, "k": 25.0, "a0": 0.1},
        "force": {"target_force": 5.0, "update_rate": 500.0},
        "contact": {"stiffness": 5000.0, "damping": 50.0, "noise_sigma": 0.3},
        "controller": {"f_ref": 5.0, "rate": 500.0, "gain": 0.002, "max_normal_speed": 0.02},
        "threshold": 1e-3,
        "seed": 0,
    }
    hemi = dict(common, name="hemisphere_toe", cls=["hemisphere_toe.cls"], out="out/hemisphere")
    (DATA / "hemisphere.json").write_text(json.dumps(hemi, indent=2) + "\n")
    shoe = dict(
        common,
        name="shoe2",
        cls=["hemisphere_toe.cls"],
        library=["shoe_right.cls"],
        recipe="shoe2_recipe.json",
        pad_uses=5,
        out="out/shoe2",
    )
    (DATA / "shoe2.json").write_text(json.dumps(shoe, indent=2) + "\n")

    # heel 0.2 m beyond the table axis: out of reach until the table turns
    table = np.array([-0.5, -0.25])
    outward = table / np.linalg.norm(table)
    heel_xy = table + 0.2 * outward
    yaw = math.atan2(-outward[1], -outward[0])
    heel_pose = compose(RigidTransform.rot_z(yaw, (heel_xy[0], heel_xy[1], 0.3)), RigidTransform.rot_x(math.pi))
    toe = hemisphere_zigzag(center=(0.2, 0.0, 0.0), name="toe_front")
    heel = cylinder_zigzag(0.04, 0.06, math.radians(60), axis_angle=math.pi / 2, name="heel_back", sector=Sector.HEEL)
    (DATA / "heel_table.cls").write_text(serialize_cls([toe, heel]))
    table_frames = dict(frames(), base_to_shoe_probe=heel_pose.to_dict())
    table_frames["base_to_table"] = {"rotvec": [math.pi, 0.0, 0.0], "translation": [table[0], table[1], 0.35]}
    cfg = dict(common, name="heel_table", cls=["heel_table.cls"], frames=table_frames, out="out/heel_table")
    (DATA / "heel_table.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    main()
