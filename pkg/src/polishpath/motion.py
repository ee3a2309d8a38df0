"""Curvature-adaptive feed/acceleration passes, force-directive injection and
the end-to-end compile pipeline producing a :class:`MotionProgram`."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .cls import Toolpath
from .geometry import (
    CellFrames,
    GeometryError,
    RigidTransform,
    calibrate_shoe_frame,
    osculating_radius,
    rebase_toolpath,
)
from .kinematics import (
    DEXTERITY_THRESHOLD,
    ReachabilityReport,
    RobotModel,
    TablePlan,
    base_pose,
    plan_table_usage,
)

PROCESS_BLEND = 0.001
TRANSIT_BLEND = 0.005
APPROACH_DISTANCE = 0.02


class PipelineError(Exception):
    pass


class InfeasibleError(PipelineError):
    def __init__(self, offenders: dict[str, list[int]]):
        self.offenders = offenders
        detail = "; ".join(f"{name}: waypoints {idx}" for name, idx in offenders.items())
        super().__init__(f"paths unreachable with and without table rotation: {detail}")


@dataclass(frozen=True)
class FeedParams:
    v0: float = 0.03
    r_lim: float = 0.06
    red_value: float = 1.0
    k: float = 25.0
    a0: float = 0.1

    def __post_init__(self):
        if self.v0 <= 0 or self.r_lim <= 0 or self.a0 <= 0:
            raise ValueError("v0, r_lim and a0 must be positive")
        if self.red_value < 1 or self.k < 0:
            raise ValueError("need red_value >= 1 and k >= 0")


@dataclass(frozen=True)
class ForceDirective:
    target_force: float = 5.0
    update_rate: float = 500.0
    direction: str = "tool axis"

    def __post_init__(self):
        if self.target_force <= 0 or self.update_rate <= 0:
            raise ValueError("target force and update rate must be positive")


class MoveKind(str, enum.Enum):
    PROCESS = "ProcessMove"
    TRANSIT = "TransitMove"


@dataclass(frozen=True)
class MotionCommand:
    target: RigidTransform  # robot base frame
    speed: float
    acceleration: float
    blend_radius: float
    kind: MoveKind
    force_active: bool = False
    path: str = ""

    def __post_init__(self):
        if not self.speed > 0 or self.blend_radius < 0 or not self.acceleration > 0:
            raise ValueError("invalid motion command parameters")


@dataclass(frozen=True)
class TableRotation:
    """Marker: turn the rotary table before the following moves."""

    angle: float = math.pi


Command = Union[MotionCommand, TableRotation]


@dataclass
class MotionProgram:
    commands: list[Command]
    directive: ForceDirective | None = None
    name: str = "polish"

    @property
    def moves(self) -> list[MotionCommand]:
        return [c for c in self.commands if isinstance(c, MotionCommand)]

    @property
    def table_markers(self) -> int:
        return sum(isinstance(c, TableRotation) for c in self.commands)

    def check(self, v_max: float | None = None) -> None:
        """Raise ``PipelineError`` if the program breaks its invariants."""
        if self.directive is None:
            raise PipelineError("program has no force directive")
        seen: set[str] = set()
        current = None
        for c in self.commands:
            if not isinstance(c, MotionCommand):
                continue
            if v_max is not None and c.speed > v_max * (1 + 1e-12):
                raise PipelineError(f"speed {c.speed} above v0 {v_max}")
            if c.kind is MoveKind.PROCESS:
                if c.path != current:
                    if c.path in seen:
                        raise PipelineError(f"process moves of {c.path!r} are not contiguous")
                    seen.add(c.path)
                    current = c.path
            else:
                current = None


def lambda_of_radius(r: float, p: FeedParams) -> float:
    """Speed divisor: ``red_value + k (r_lim - r)`` below ``r_lim``, else 1."""
    if r < p.r_lim:
        return p.red_value + p.k * (p.r_lim - r)
    return 1.0


def curvature_radii(tp: Toolpath) -> np.ndarray:
    """Osculating radius at each waypoint; endpoints copy the nearest interior value."""
    pts = tp.positions
    n = len(pts)
    if n < 2:
        raise PipelineError(f"{tp.name}: need at least 2 waypoints")
    if n == 2:
        return np.full(2, math.inf)
    r = np.empty(n)
    for i in range(1, n - 1):
        try:
            r[i] = osculating_radius(pts[i - 1], pts[i], pts[i + 1])
        except GeometryError:
            r[i] = 0.0  # path folds back onto itself
    r[0], r[-1] = r[1], r[-2]
    return r


def _lambdas(tp: Toolpath, p: FeedParams) -> np.ndarray:
    return np.array([lambda_of_radius(r, p) for r in curvature_radii(tp)])


def feedrate_pass(tp: Toolpath, p: FeedParams) -> np.ndarray:
    return p.v0 / _lambdas(tp, p)


def accel_pass(tp: Toolpath, p: FeedParams) -> np.ndarray:
    return p.a0 / _lambdas(tp, p)


def inject_force_control(commands: Sequence[Command] | MotionProgram, d: ForceDirective) -> MotionProgram:
    if isinstance(commands, MotionProgram):
        if commands.directive is not None:
            raise PipelineError("force control already injected")
        name, commands = commands.name, commands.commands
    else:
        name = "polish"
    if not commands:
        raise PipelineError("cannot inject force control into an empty program")
    out: list[Command] = []
    for c in commands:
        if isinstance(c, MotionCommand):
            c = replace(c, force_active=c.kind is MoveKind.PROCESS)
        out.append(c)
    return MotionProgram(out, d, name)


def path_commands(
    tp: Toolpath,
    report: ReachabilityReport,
    model: RobotModel,
    p: FeedParams,
) -> list[MotionCommand]:
    """Approach, process moves along ``tp`` and retract for one base-frame path."""
    speeds = feedrate_pass(tp, p)
    accels = accel_pass(tp, p)
    cmds = []
    poses = []
    for w, entry in zip(tp.waypoints, report.entries):
        # orientation from the IK solution keeps the spin about the tool axis continuous
        R = base_pose(model, entry.joint_config).rotation
        poses.append(RigidTransform(R, w.position))
    axes = tp.axes

    def transit(pose, axis):
        target = RigidTransform(pose.rotation, pose.translation + APPROACH_DISTANCE * axis)
        return MotionCommand(target, p.v0, p.a0, TRANSIT_BLEND, MoveKind.TRANSIT, path=tp.name)

    cmds.append(transit(poses[0], axes[0]))
    for pose, v, a in zip(poses, speeds, accels):
        cmds.append(MotionCommand(pose, float(v), float(a), PROCESS_BLEND, MoveKind.PROCESS, path=tp.name))
    cmds.append(transit(poses[-1], axes[-1]))
    return cmds


@dataclass
class CompiledProgram:
    program: MotionProgram
    plan: TablePlan
    reports: dict[str, ReachabilityReport]
    # base-frame paths in execution order with their speeds
    executed: list[tuple[Toolpath, np.ndarray]] = field(default_factory=list)


def compile_pipeline(
    paths: Sequence[Toolpath],
    frames: CellFrames,
    model: RobotModel,
    p: FeedParams | None = None,
    d: ForceDirective | None = None,
    threshold: float = DEXTERITY_THRESHOLD,
    name: str = "polish",
) -> CompiledProgram:
    """Rebase, plan table usage, schedule speeds and inject force control.

    ``paths`` are in the heel frame. Direct paths run first, then a single
    table-rotation marker, then the rotated paths.
    """
    p = p or FeedParams()
    d = d or ForceDirective()
    if not paths:
        raise PipelineError("no toolpaths to compile")
    base_to_heel = calibrate_shoe_frame(frames.base_to_shoe_probe, frames)
    base_paths = [rebase_toolpath(tp, base_to_heel) for tp in paths]
    plan = plan_table_usage(model, base_paths, frames, threshold)
    if plan.infeasible:
        raise InfeasibleError({tp.name: plan.reports[tp.name].failing_indices() for tp in plan.infeasible})

    commands: list[Command] = []
    executed = []
    for group_index, group in enumerate((plan.direct, plan.rotated)):
        if group_index == 1 and group:
            commands.append(TableRotation())
        for tp in group:
            commands.extend(path_commands(tp, plan.reports[tp.name], model, p))
            executed.append((tp, feedrate_pass(tp, p)))
    program = inject_force_control(MotionProgram(commands, None, name), d)
    program.check(p.v0)
    return CompiledProgram(program, plan, plan.reports, executed)
