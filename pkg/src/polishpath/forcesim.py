"""Normal-force control loop simulation and force statistics.

The loop is one-dimensional along the instantaneous tool axis. Each 2 ms
tick the load cell reads

    F = max(0, stiffness * pen + damping * d(pen)/dt) + noise

and the controller commands a normal tool speed
``clip(gain * (f_ref - F), +-max_normal_speed)``. Penetration is the tool
depth measured from the (possibly offset) surface, so a surface that rises
toward the tool by ``h`` adds ``h`` of penetration until the loop backs off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cls import Toolpath

Profile = Callable[[float], float]


class SimulationError(ValueError):
    pass


def flat_profile(s: float) -> float:
    return 0.0


@dataclass(frozen=True)
class StepProfile:
    """Surface offset jumping by ``height`` (m) at arc length ``at`` (m)."""

    at: float
    height: float = 0.001

    def __call__(self, s: float) -> float:
        return self.height if s >= self.at else 0.0


@dataclass(frozen=True)
class SineProfile:
    amplitude: float = 0.0005
    wavelength: float = 0.1

    def __call__(self, s: float) -> float:
        return self.amplitude * math.sin(2 * math.pi * s / self.wavelength)


def profile_from_dict(d: dict | None) -> Profile:
    if not d or d.get("kind", "flat") == "flat":
        return flat_profile
    kind = d["kind"]
    if kind == "step":
        return StepProfile(float(d["at"]), float(d.get("height", 0.001)))
    if kind == "sine":
        return SineProfile(float(d.get("amplitude", 0.0005)), float(d.get("wavelength", 0.1)))
    raise SimulationError(f"unknown surface profile kind {kind!r}")


@dataclass(frozen=True)
class ContactModel:
    stiffness: float = 5000.0  # N/m
    damping: float = 50.0  # N s/m
    noise_sigma: float = 0.3  # N
    surface_offset_profile: Profile = field(default=flat_profile)

    def __post_init__(self):
        if self.stiffness <= 0 or self.damping < 0 or self.noise_sigma < 0:
            raise SimulationError("invalid contact model")


@dataclass(frozen=True)
class ControllerParams:
    f_ref: float = 5.0  # N
    rate: float = 500.0  # Hz
    gain: float = 0.002  # m/(s N)
    max_normal_speed: float = 0.02  # m/s

    def __post_init__(self):
        if self.f_ref <= 0 or self.gain <= 0 or self.max_normal_speed <= 0:
            raise SimulationError("invalid controller parameters")

    @property
    def dt(self) -> float:
        if self.rate <= 0:
            raise SimulationError("non-positive time step")
        return 1.0 / self.rate


@dataclass(frozen=True, eq=False)
class ForceTrace:
    t: np.ndarray
    force: np.ndarray
    dt: float

    def __len__(self) -> int:
        return len(self.t)

    def check(self) -> None:
        if len(self.t) > 1:
            steps = np.diff(self.t)
            if np.any(steps <= 0) or np.max(np.abs(steps - self.dt)) > 1e-12:
                raise SimulationError("trace timestamps not uniform")

    def window(self, t_from: float) -> np.ndarray:
        return self.force[self.t >= t_from]


def path_schedule(tp: Toolpath, speeds) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (time, arc length) at each waypoint.

    A segment is traversed at the mean of its endpoint speeds.
    """
    seg = np.linalg.norm(np.diff(tp.positions, axis=0), axis=1)
    v = np.asarray(speeds, dtype=float)
    if len(v) != len(tp.waypoints):
        raise SimulationError("one speed per waypoint required")
    if np.any(v <= 0):
        raise SimulationError("speeds must be positive")
    seg_t = seg / (0.5 * (v[:-1] + v[1:]))
    return np.concatenate([[0.0], np.cumsum(seg_t)]), np.concatenate([[0.0], np.cumsum(seg)])


def simulate_contact(
    tp: Toolpath,
    speeds,
    contact: ContactModel | None = None,
    ctrl: ControllerParams | None = None,
    seed: int = 0,
) -> ForceTrace:
    contact = contact or ContactModel()
    ctrl = ctrl or ControllerParams()
    dt = ctrl.dt
    if len(tp.waypoints) < 2:
        raise SimulationError("zero-length path")
    times, arc = path_schedule(tp, speeds)
    duration = times[-1]
    n = int(math.floor(duration / dt + 1e-9))
    if n < 1:
        raise SimulationError("zero-length path")
    t = np.arange(n) * dt
    s = np.interp(t, times, arc)
    profile = contact.surface_offset_profile
    offset = np.array([profile(si) for si in s])
    noise = np.random.default_rng(seed).normal(0.0, contact.noise_sigma, n) if contact.noise_sigma > 0 else np.zeros(n)

    k, c = contact.stiffness, contact.damping
    depth = -offset[0]  # tool tip just touching
    pen_prev = 0.0
    force = np.empty(n)
    for i in range(n):
        pen = depth + offset[i]
        rate = (pen - pen_prev) / dt
        f_meas = max(0.0, k * pen + c * rate) + noise[i]
        force[i] = f_meas
        u = ctrl.gain * (ctrl.f_ref - f_meas)
        u = min(max(u, -ctrl.max_normal_speed), ctrl.max_normal_speed)
        depth += u * dt
        pen_prev = pen
    return ForceTrace(t, force, dt)


@dataclass(frozen=True)
class ForceStats:
    mean: float
    median: float
    sigma: float
    q1: float
    q3: float
    outlier_count: int

    FIELDS = ("mean", "median", "sigma", "q1", "q3", "outlier_count")

    def __post_init__(self):
        if not (self.q1 <= self.median <= self.q3) or self.sigma < 0 or self.outlier_count < 0:
            raise ValueError("inconsistent force statistics")

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def _values(trace) -> np.ndarray:
    return np.asarray(trace.force if isinstance(trace, ForceTrace) else trace, dtype=float)


def tukey_fences(values) -> tuple[float, float]:
    q1, q3 = np.percentile(values, [25, 75])
    iqr = q3 - q1
    return q1 - 1.5 * iqr, q3 + 1.5 * iqr


def detect_outliers(trace) -> list[int]:
    """Indices of samples outside the 1.5 IQR boxplot fences."""
    f = _values(trace)
    if len(f) == 0:
        return []
    lo, hi = tukey_fences(f)
    return np.flatnonzero((f < lo) | (f > hi)).tolist()


def compute_stats(trace) -> ForceStats:
    """Mean, sample sigma, linearly interpolated quartiles and Tukey outliers."""
    f = _values(trace)
    if len(f) < 2:
        raise SimulationError("statistics need at least 2 samples")
    q1, med, q3 = np.percentile(f, [25, 50, 75])
    return ForceStats(
        mean=float(np.mean(f)),
        median=float(med),
        sigma=float(np.std(f, ddof=1)),
        q1=float(q1),
        q3=float(q3),
        outlier_count=len(detect_outliers(f)),
    )
