"""Frame algebra, shoe-frame calibration, mirroring and discrete curvature."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .cls import Sector, Toolpath

ORTHO_TOL = 1e-9
#: triangles with smaller area are treated as collinear (m^2)
AREA_EPS = 1e-12
#: returned by :func:`osculating_radius` for collinear points
UNBOUNDED = math.inf


class GeometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation matrix plus translation (m). ``apply`` maps child coords into parent."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_matrix(cls, T) -> "RigidTransform":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    @classmethod
    def from_rotvec(cls, rotvec, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(Rotation.from_rotvec(rotvec).as_matrix(), translation)

    @classmethod
    def rot_z(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        c, s = math.cos(angle), math.sin(angle)
        return cls([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], translation)

    @classmethod
    def rot_x(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        c, s = math.cos(angle), math.sin(angle)
        return cls([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]], translation)

    @classmethod
    def translate(cls, x: float, y: float, z: float) -> "RigidTransform":
        return cls(np.eye(3), (x, y, z))

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def rotvec(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_rotvec()

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def apply_vector(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def is_valid(self, tol: float = ORTHO_TOL) -> bool:
        R = self.rotation
        return (
            bool(np.all(np.isfinite(R)))
            and bool(np.all(np.isfinite(self.translation)))
            and np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0)
            and abs(np.linalg.det(R) - 1.0) <= tol
        )

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        return np.allclose(self.rotation, other.rotation, atol=atol, rtol=0) and np.allclose(
            self.translation, other.translation, atol=atol, rtol=0
        )

    def to_dict(self) -> dict:
        return {"rotvec": self.rotvec().tolist(), "translation": self.translation.tolist()}

    @classmethod
    def from_dict(cls, d) -> "RigidTransform":
        if "rotation" in d:
            t = cls(d["rotation"], d.get("translation", (0, 0, 0)))
        else:
            t = cls.from_rotvec(d.get("rotvec", (0, 0, 0)), d.get("translation", (0, 0, 0)))
        require_valid(t)
        return t

    def __repr__(self) -> str:
        return f"RigidTransform(rotvec={self.rotvec().round(6).tolist()}, translation={self.translation.round(6).tolist()})"


def require_valid(t: RigidTransform, what: str = "transform") -> None:
    if not t.is_valid():
        raise GeometryError(f"{what} is not a proper rigid transform")


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Frame chain: ``a`` then ``b`` (``compose(a, b).apply(p) == a.apply(b.apply(p))``)."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform) -> RigidTransform:
    Rt = t.rotation.T
    return RigidTransform(Rt, -Rt @ t.translation)


@dataclass(frozen=True)
class CellFrames:
    """Calibrated frames of the cell, all expressed in the robot base frame.

    ``probe_to_heel`` is measured once with the heel calibration support;
    the bundled configuration carries a placeholder for it.
    """

    base_to_shoe_probe: RigidTransform = field(default_factory=RigidTransform)
    probe_to_heel: RigidTransform = field(default_factory=RigidTransform)
    base_to_table: RigidTransform = field(default_factory=RigidTransform)

    def __post_init__(self):
        for name in ("base_to_shoe_probe", "probe_to_heel", "base_to_table"):
            require_valid(getattr(self, name), name)

    @classmethod
    def from_dict(cls, d) -> "CellFrames":
        return cls(**{k: RigidTransform.from_dict(d[k]) for k in ("base_to_shoe_probe", "probe_to_heel", "base_to_table") if k in d})


def calibrate_shoe_frame(probe_pose: RigidTransform, frames: CellFrames) -> RigidTransform:
    """Heel frame in the robot base from a probed Ox'y'z' pose."""
    require_valid(probe_pose, "probe pose")
    return compose(probe_pose, frames.probe_to_heel)


def transform_toolpath(tp: Toolpath, t: RigidTransform) -> Toolpath:
    return tp.with_arrays(t.apply(tp.positions), t.apply_vector(tp.axes))


def rebase_toolpath(tp: Toolpath, base_to_heel: RigidTransform) -> Toolpath:
    """Map a heel-frame toolpath into the robot base frame."""
    return transform_toolpath(tp, base_to_heel)


_MIRROR_SECTOR = {Sector.LATERAL_LEFT: Sector.LATERAL_RIGHT, Sector.LATERAL_RIGHT: Sector.LATERAL_LEFT}


def mirror_toolpath(tp: Toolpath) -> Toolpath:
    """Right shoe to left shoe: flip Y and the axis Y component in the heel frame."""
    flip = np.array([1.0, -1.0, 1.0])
    mirrored = tp.with_arrays(tp.positions * flip, tp.axes * flip)
    return replace(mirrored, sector=_MIRROR_SECTOR.get(tp.sector, tp.sector))


def table_rotation(frames: CellFrames, angle: float = math.pi) -> RigidTransform:
    """Base-frame transform for turning the table by ``angle`` about its z axis."""
    T = frames.base_to_table
    return compose(compose(T, RigidTransform.rot_z(angle)), invert(T))


def rotate_on_table(tp: Toolpath, frames: CellFrames) -> Toolpath:
    return transform_toolpath(tp, table_rotation(frames))


def osculating_radius(p_prev, p_cur, p_next) -> float:
    """Circumradius of three consecutive points; ``UNBOUNDED`` when collinear."""
    a = np.asarray(p_prev, dtype=float)
    b = np.asarray(p_cur, dtype=float)
    c = np.asarray(p_next, dtype=float)
    ab = np.linalg.norm(b - a)
    bc = np.linalg.norm(c - b)
    ca = np.linalg.norm(a - c)
    if min(ab, bc, ca) <= 0.0:
        raise GeometryError("osculating circle needs three distinct points")
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
    if area < AREA_EPS:
        return UNBOUNDED
    return float(ab * bc * ca / (4.0 * area))
