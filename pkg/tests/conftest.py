import math
from pathlib import Path

import numpy as np
import pytest

import polishpath
from polishpath.cls import Sector
from polishpath.geometry import CellFrames, RigidTransform, compose
from polishpath.kinematics import ur5e
from polishpath.shapes import cylinder_zigzag, hemisphere_zigzag

DATA = Path(polishpath.__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
HOME = (0.0, -math.pi / 2, math.pi / 2, -math.pi / 2, -math.pi / 2, 0.0)
HEEL_POSE = RigidTransform.rot_x(math.pi, (-0.5, -0.3, 0.3))

_acceptance: list[tuple[str, bool, str]] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _acceptance.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _acceptance:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def model():
    return ur5e(home=HOME)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def hemi_frames():
    return CellFrames(
        base_to_shoe_probe=HEEL_POSE,
        base_to_table=RigidTransform.rot_x(math.pi, (-0.5, -0.25, 0.35)),
    )


def table_scenario():
    """Toe reachable directly; heel 0.2 m beyond the table axis needs the table turned."""
    table = np.array([-0.5, -0.25])
    outward = table / np.linalg.norm(table)
    heel_xy = table + 0.2 * outward
    yaw = math.atan2(-outward[1], -outward[0])
    heel_pose = compose(RigidTransform.rot_z(yaw, (heel_xy[0], heel_xy[1], 0.3)), RigidTransform.rot_x(math.pi))
    frames = CellFrames(
        base_to_shoe_probe=heel_pose,
        base_to_table=RigidTransform.rot_x(math.pi, (table[0], table[1], 0.35)),
    )
    toe = hemisphere_zigzag(center=(0.2, 0.0, 0.0), name="toe_front")
    heel = cylinder_zigzag(0.04, 0.06, math.radians(60), axis_angle=math.pi / 2, name="heel_back", sector=Sector.HEEL)
    return frames, toe, heel


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_transform(rng):
    return RigidTransform(random_rotation(rng), rng.uniform(-1, 1, 3))
