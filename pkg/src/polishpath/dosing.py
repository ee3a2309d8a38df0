"""Polish dispenser: stepper-driven piston pushing a cylindrical polish stick."""

from __future__ import annotations

import math
from dataclasses import dataclass


class DosingError(ValueError):
    pass


class CartridgeExhausted(DosingError):
    """Raised when a dose needs more stroke than the stick has left; replace the cartridge."""


@dataclass(frozen=True)
class DispenserSpec:
    D: float = 50.0  # stick diameter, mm
    L: float = 200.0  # stick length, mm
    p: float = 5.0  # actuator pitch, mm/rev
    theta: float = 1.8  # motor step, deg
    stroke: float = 210.0  # mm
    max_thrust: float = 1000.0  # N, informational

    def __post_init__(self):
        if min(self.D, self.L, self.p, self.theta, self.stroke, self.max_thrust) <= 0:
            raise DosingError("dispenser dimensions must be positive")
        if self.stroke < self.L:
            raise DosingError("actuator stroke shorter than the stick")

    @property
    def volume_per_step(self) -> float:
        """mm^3 pushed out by one motor step."""
        return math.pi * self.D**2 * self.theta * self.p / 1440.0

    @property
    def total_steps(self) -> int:
        # the stick, not the stroke, runs out first
        return int(round(self.L * 360.0 / (self.p * self.theta)))

    @property
    def stock_volume(self) -> float:
        return math.pi * self.D**2 / 4.0 * self.L


@dataclass(frozen=True)
class CartridgeState:
    steps_used: int = 0

    def remaining_steps(self, spec: DispenserSpec) -> int:
        return spec.total_steps - self.steps_used

    def remaining_volume(self, spec: DispenserSpec) -> float:
        return volume_for_steps(spec, self.remaining_steps(spec))


def steps_for_volume(spec: DispenserSpec, V0: float) -> int:
    """Motor steps for a dose of ``V0`` mm^3, rounded to the nearest step."""
    if V0 < 0:
        raise DosingError("negative dose volume")
    return int(round(1440.0 * V0 / (math.pi * spec.D**2 * spec.theta * spec.p)))


def volume_for_steps(spec: DispenserSpec, n: int) -> float:
    if n < 0:
        raise DosingError("negative step count")
    return n * spec.volume_per_step


def dispense(state: CartridgeState, spec: DispenserSpec, V0: float) -> tuple[CartridgeState, float]:
    n = steps_for_volume(spec, V0)
    if state.steps_used + n > spec.total_steps or (V0 > 0 and state.steps_used >= spec.total_steps):
        raise CartridgeExhausted(
            f"dose of {n} steps exceeds the {spec.total_steps - state.steps_used} steps left"
        )
    return CartridgeState(state.steps_used + n), volume_for_steps(spec, n)
