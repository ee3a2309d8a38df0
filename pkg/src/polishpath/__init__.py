"""Offline toolpath compiler and cell simulator for robotic shoe polishing."""

from .cls import Diagnostic, Pattern, Sector, Severity, Toolpath, Waypoint, parse_cls, serialize_cls, validate_toolpath
from .geometry import CellFrames, RigidTransform, compose, invert, mirror_toolpath, osculating_radius
from .kinematics import RobotModel, check_reachability, dexterity, forward_kinematics, inverse_kinematics, jacobian, ur5e
from .motion import FeedParams, ForceDirective, MotionProgram, compile_pipeline, feedrate_pass

__version__ = "0.1.0"

__all__ = [
    "CellFrames",
    "Diagnostic",
    "FeedParams",
    "ForceDirective",
    "MotionProgram",
    "Pattern",
    "RigidTransform",
    "RobotModel",
    "Sector",
    "Severity",
    "Toolpath",
    "Waypoint",
    "check_reachability",
    "compile_pipeline",
    "compose",
    "dexterity",
    "feedrate_pass",
    "forward_kinematics",
    "inverse_kinematics",
    "invert",
    "jacobian",
    "mirror_toolpath",
    "osculating_radius",
    "parse_cls",
    "serialize_cls",
    "ur5e",
    "validate_toolpath",
]
