"""DH arm model, forward kinematics, Jacobian, dexterity, DLS inverse kinematics,
reachability reports and rotary-table planning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cls import Toolpath
from .geometry import CellFrames, RigidTransform, compose, invert, require_valid, rotate_on_table

DEXTERITY_THRESHOLD = 1e-3
IK_POS_TOL = 1e-6
IK_ROT_TOL = 1e-6
IK_MAX_ITER = 500


class KinematicsError(Exception):
    pass


class NoConvergence(KinematicsError):
    pass


class LimitViolation(KinematicsError):
    pass


@dataclass(frozen=True)
class DHRow:
    a: float
    d: float
    alpha: float


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Standard-DH six-axis arm.

    ``mount`` places the base in the world (an upside-down arm is a rotation
    of pi about x); ``tcp_offset`` goes from flange to tool tip.
    """

    dh_rows: tuple[DHRow, ...]
    joint_limits: tuple[tuple[float, float], ...] = ((-2 * math.pi, 2 * math.pi),) * 6
    joint_speed_limits: tuple[float, ...] = (math.pi,) * 6
    mount: RigidTransform = field(default_factory=RigidTransform)
    tcp_offset: RigidTransform = field(default_factory=RigidTransform)
    home: tuple[float, ...] = (0.0,) * 6
    name: str = "robot"

    def __post_init__(self):
        if len(self.dh_rows) != 6 or len(self.joint_limits) != 6:
            raise ValueError("a six-joint model is required")
        if any(lo >= hi for lo, hi in self.joint_limits):
            raise ValueError("joint limits need min < max")
        require_valid(self.mount, "mount")
        require_valid(self.tcp_offset, "tcp_offset")

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.joint_limits])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.joint_limits])

    def within_limits(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(np.isfinite(q)) and np.all(q >= self.lower) and np.all(q <= self.upper))

    @classmethod
    def from_dict(cls, d) -> "RobotModel":
        rows = tuple(DHRow(float(r["a"]), float(r["d"]), float(r["alpha"])) for r in d["dh"])
        kw = {}
        if "joint_limits" in d:
            kw["joint_limits"] = tuple((float(lo), float(hi)) for lo, hi in d["joint_limits"])
        if "joint_speed_limits" in d:
            kw["joint_speed_limits"] = tuple(float(v) for v in d["joint_speed_limits"])
        for key in ("mount", "tcp_offset"):
            if key in d:
                kw[key] = RigidTransform.from_dict(d[key])
        if "home" in d:
            kw["home"] = tuple(float(v) for v in d["home"])
        return cls(dh_rows=rows, name=d.get("name", "robot"), **kw)


def ur5e(**kwargs) -> RobotModel:
    """UR5e nominal DH table."""
    d = (0.1625, 0.0, 0.0, 0.1333, 0.0997, 0.0996)
    a = (0.0, -0.425, -0.3922, 0.0, 0.0, 0.0)
    alpha = (math.pi / 2, 0.0, 0.0, math.pi / 2, -math.pi / 2, 0.0)
    rows = tuple(DHRow(ai, di, al) for ai, di, al in zip(a, d, alpha))
    kwargs.setdefault("name", "ur5e")
    kwargs.setdefault("joint_speed_limits", (math.pi,) * 6)
    return RobotModel(dh_rows=rows, **kwargs)


def _dh(row: DHRow, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, row.a * ct],
            [st, ct * ca, -ct * sa, row.a * st],
            [0.0, sa, ca, row.d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _chain(model: RobotModel, q) -> list[np.ndarray]:
    """World frames 0..6 (frame 0 = mounted base), then the TCP frame."""
    T = model.mount.matrix()
    frames = [T]
    for row, theta in zip(model.dh_rows, q):
        T = T @ _dh(row, theta)
        frames.append(T)
    frames.append(T @ model.tcp_offset.matrix())
    return frames


def forward_kinematics(model: RobotModel, q) -> RigidTransform:
    return RigidTransform.from_matrix(_chain(model, np.asarray(q, dtype=float))[-1])


def jacobian(model: RobotModel, q) -> np.ndarray:
    """Geometric Jacobian at the TCP in world coordinates, rows (v, w)."""
    frames = _chain(model, np.asarray(q, dtype=float))
    p = frames[-1][:3, 3]
    J = np.zeros((6, 6))
    for i in range(6):
        z = frames[i][:3, 2]
        o = frames[i][:3, 3]
        J[:3, i] = np.cross(z, p - o)
        J[3:, i] = z
    return J


def dexterity(model: RobotModel, q) -> float:
    J = jacobian(model, q)
    # det(J^T J) = det(J)^2 for a square J; the square form never goes negative
    return float(np.linalg.det(J) ** 2)


def is_dexterous(value: float, threshold: float = DEXTERITY_THRESHOLD) -> bool:
    return value >= threshold


def _pose_error(current: np.ndarray, target: RigidTransform, axis_only: bool) -> np.ndarray:
    dp = target.translation - current[:3, 3]
    if axis_only:
        # tool spin about z is free: only align the z axes
        z_cur, z_tgt = current[:3, 2], target.rotation[:, 2]
        s = np.cross(z_cur, z_tgt)
        sn = np.linalg.norm(s)
        ang = math.atan2(sn, float(z_cur @ z_tgt))
        dw = s * (ang / sn) if sn > 1e-15 else (np.zeros(3) if ang < 1.0 else _any_perp(z_cur) * math.pi)
    else:
        R_err = target.rotation @ current[:3, :3].T
        dw = RigidTransform(R_err).rotvec()
    return np.concatenate([dp, dw])


def _any_perp(v: np.ndarray) -> np.ndarray:
    u = np.cross(v, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-6:
        u = np.cross(v, [0.0, 1.0, 0.0])
    return u / np.linalg.norm(u)


def _wrap_into_limits(model: RobotModel, q: np.ndarray) -> np.ndarray | None:
    out = q.copy()
    for i, (lo, hi) in enumerate(model.joint_limits):
        v = out[i]
        if lo <= v <= hi:
            continue
        # shift by whole turns toward the range, closest first
        k = math.ceil((lo - v) / (2 * math.pi)) if v < lo else -math.ceil((v - hi) / (2 * math.pi))
        v += 2 * math.pi * k
        if not lo <= v <= hi:
            return None
        out[i] = v
    return out


def inverse_kinematics(
    model: RobotModel,
    target: RigidTransform,
    seed,
    *,
    axis_only: bool = False,
    damping: float = 1e-3,
    max_iter: int = IK_MAX_ITER,
    pos_tol: float = IK_POS_TOL,
    rot_tol: float = IK_ROT_TOL,
) -> np.ndarray:
    """Damped least squares IK.

    The damping is raised when a step does not reduce the error and relaxed
    after successful steps (Levenberg-Marquardt style). With ``axis_only``
    the rotation about the tool z axis is left free.

    Raises:
        NoConvergence: tolerance not met within ``max_iter`` iterations.
        LimitViolation: converged, but no 2*pi shift puts q inside the limits.
    """
    q = np.array(seed, dtype=float)
    T = _chain(model, q)[-1]
    err = _pose_error(T, target, axis_only)
    lam = damping
    for _ in range(max_iter + 1):
        if np.linalg.norm(err[:3]) < pos_tol and np.linalg.norm(err[3:]) < rot_tol:
            wrapped = _wrap_into_limits(model, q)
            if wrapped is None:
                raise LimitViolation(f"solution {np.round(q, 4).tolist()} outside joint limits")
            return wrapped
        J = jacobian(model, q)
        JJt = J @ J.T
        step = J.T @ np.linalg.solve(JJt + lam**2 * np.eye(6), err)
        q_new = q + step
        T_new = _chain(model, q_new)[-1]
        err_new = _pose_error(T_new, target, axis_only)
        if np.linalg.norm(err_new) < np.linalg.norm(err):
            q, err = q_new, err_new
            lam = max(lam * 0.5, 1e-9)
        else:
            lam = min(lam * 10.0, 1e3)
    raise NoConvergence(
        f"no IK solution within {max_iter} iterations (residual {np.linalg.norm(err[:3]):.3g} m)"
    )


def tool_target(position, tool_axis) -> RigidTransform:
    """TCP pose with z pointing into the surface (against the outward tool axis).

    Only the z axis is meaningful; x is an arbitrary perpendicular.
    """
    z = -np.asarray(tool_axis, dtype=float)
    z = z / np.linalg.norm(z)
    x = _any_perp(z)
    y = np.cross(z, x)
    return RigidTransform(np.column_stack([x, y, z]), position)


@dataclass(frozen=True)
class ReachabilityEntry:
    reachable: bool
    dexterity: float
    joint_config: np.ndarray | None = None
    message: str = ""


@dataclass(frozen=True)
class ReachabilityReport:
    path_name: str
    entries: tuple[ReachabilityEntry, ...]
    threshold: float = DEXTERITY_THRESHOLD

    @property
    def min_dexterity(self) -> float:
        return min((e.dexterity for e in self.entries), default=math.nan)

    @property
    def count_below_threshold(self) -> int:
        return sum(1 for e in self.entries if not e.reachable)

    @property
    def all_reachable(self) -> bool:
        return self.count_below_threshold == 0

    def failing_indices(self) -> list[int]:
        return [i for i, e in enumerate(self.entries) if not e.reachable]


def check_reachability(
    model: RobotModel,
    tp: Toolpath,
    threshold: float = DEXTERITY_THRESHOLD,
    seed: Sequence[float] | None = None,
    stop_at_failure: bool = False,
) -> ReachabilityReport:
    """Solve IK waypoint by waypoint and gate on dexterity.

    ``tp`` is in the robot base frame; the mount maps it into the world
    before solving. Each solve is seeded with the previous solution, the
    first with ``seed`` or the model's home pose. With ``stop_at_failure``
    the report ends at the first failing waypoint.
    """
    q_prev = np.array(model.home if seed is None else seed, dtype=float)
    entries = []
    for w in tp.waypoints:
        target = compose(model.mount, tool_target(w.position, w.tool_axis))
        try:
            q = inverse_kinematics(model, target, q_prev, axis_only=True)
        except KinematicsError as exc:
            entries.append(ReachabilityEntry(False, 0.0, None, str(exc)))
            if stop_at_failure:
                break
            continue
        dex = dexterity(model, q)
        ok = is_dexterous(dex, threshold)
        entries.append(ReachabilityEntry(ok, dex, q, "" if ok else "dexterity below threshold"))
        if stop_at_failure and not ok:
            break
        q_prev = q
    return ReachabilityReport(tp.name, tuple(entries), threshold)


@dataclass
class TablePlan:
    direct: list[Toolpath] = field(default_factory=list)
    rotated: list[Toolpath] = field(default_factory=list)
    infeasible: list[Toolpath] = field(default_factory=list)
    reports: dict[str, ReachabilityReport] = field(default_factory=dict)


def plan_table_usage(
    model: RobotModel,
    tps: Sequence[Toolpath],
    frames: CellFrames,
    threshold: float = DEXTERITY_THRESHOLD,
) -> TablePlan:
    """Partition base-frame paths into direct, rotated (table turned by pi) and infeasible.

    ``rotated`` holds the paths as they lie after the table turn. ``reports``
    is keyed by path name and holds the report of the orientation used (the
    direct one for infeasible paths).
    """
    plan = TablePlan()
    for tp in tps:
        # a single failure rules out an orientation, so probe cheaply first
        direct = check_reachability(model, tp, threshold, stop_at_failure=True)
        if direct.all_reachable:
            plan.direct.append(tp)
            plan.reports[tp.name] = direct
            continue
        turned = rotate_on_table(tp, frames)
        rotated = check_reachability(model, turned, threshold, stop_at_failure=True)
        if rotated.all_reachable:
            plan.rotated.append(turned)
            plan.reports[tp.name] = rotated
        else:
            plan.infeasible.append(tp)
            plan.reports[tp.name] = check_reachability(model, tp, threshold)
    return plan


def base_pose(model: RobotModel, q) -> RigidTransform:
    """TCP pose relative to the robot base (what a robot script expects)."""
    return compose(invert(model.mount), forward_kinematics(model, q))
