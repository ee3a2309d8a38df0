"""Polishing recipes, cycle-time estimation and trajectory quality checks."""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cls import Pattern, Sector, Toolpath
from .geometry import mirror_toolpath

PAD_LIFE = 6  # shoes per backing pad
PITCH_RANGE_MM = (5.0, 8.0)
HETEROGENEITY_MM = 5.0
PERP_COS = 0.2

# Calibration, not measured data: chosen so a Shoe-2-like recipe lands near 28 min.
DEFAULT_OVERHEADS = {"pickup": 10.0, "homogenize": 8.0, "table_rotate": 6.0}

SECTOR_ORDER = (Sector.TOE, Sector.VAMP, Sector.LATERAL_LEFT, Sector.LATERAL_RIGHT, Sector.HEEL)


class RecipeError(ValueError):
    """Schema or reference error; ``field`` names the offending path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class Side(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class SectorPlan:
    trajectories: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class Pickup:
    before: int  # index into the execution sequence
    volume: float  # mm^3


@dataclass(frozen=True)
class Recipe:
    model_id: str
    size: float
    side: Side
    sectors: Mapping[Sector, SectorPlan]
    pickup_schedule: tuple[Pickup, ...] = ()
    f_ref: float = 5.0
    v0: float = 0.03
    overhead_times: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_OVERHEADS))

    def sequence(self) -> list[tuple[Sector, str]]:
        """Execution order: sectors in fixed order, each repeating its ids cyclically."""
        seq = []
        for sector in SECTOR_ORDER:
            plan = self.sectors.get(sector)
            if plan is None or plan.count == 0:
                continue
            ids = itertools.cycle(plan.trajectories)
            seq.extend((sector, next(ids)) for _ in range(plan.count))
        return seq

    @property
    def trajectory_count(self) -> int:
        return sum(p.count for p in self.sectors.values())


def _require(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise RecipeError(field, message)


def _number(d, key, path, default=None, positive=False, integer=False):
    if key not in d:
        _require(default is not None, f"{path}{key}", "missing")
        return default
    v = d[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}{key}", "must be a number")
    if integer:
        _require(float(v).is_integer(), f"{path}{key}", "must be an integer")
        v = int(v)
    _require(math.isfinite(v), f"{path}{key}", "must be finite")
    if positive:
        _require(v > 0, f"{path}{key}", "must be positive")
    else:
        _require(v >= 0, f"{path}{key}", "must be non-negative")
    return v


def load_recipe(document: str | Mapping, known_ids: set[str] | None = None) -> Recipe:
    """Validate a JSON recipe.

    ``known_ids`` (trajectory names available in the CLS library), when given,
    turns unknown trajectory references into errors.
    """
    if isinstance(document, str):
        try:
            d = json.loads(document)
        except json.JSONDecodeError as exc:
            raise RecipeError("$", f"invalid JSON ({exc.msg})") from None
    else:
        d = document
    _require(isinstance(d, Mapping), "$", "must be an object")
    _require(isinstance(d.get("model_id"), str), "model_id", "must be a string")
    size = _number(d, "size", "", default=0)
    try:
        side = Side(d.get("side", "Right"))
    except ValueError:
        raise RecipeError("side", "must be Left or Right") from None

    raw_sectors = d.get("sectors", {})
    _require(isinstance(raw_sectors, Mapping), "sectors", "must be an object")
    sectors: dict[Sector, SectorPlan] = {}
    for key, entry in raw_sectors.items():
        try:
            sector = Sector(key)
        except ValueError:
            raise RecipeError(f"sectors.{key}", "unknown sector") from None
        path = f"sectors.{key}."
        _require(isinstance(entry, Mapping), f"sectors.{key}", "must be an object")
        ids = entry.get("trajectories", [])
        _require(
            isinstance(ids, list) and all(isinstance(i, str) for i in ids),
            f"{path}trajectories",
            "must be a list of names",
        )
        count = _number(entry, "count", path, default=len(ids), integer=True)
        _require(count == 0 or ids, f"{path}trajectories", "empty but count > 0")
        if known_ids is not None:
            for i, tid in enumerate(ids):
                _require(tid in known_ids, f"{path}trajectories[{i}]", f"unknown trajectory id {tid!r}")
        sectors[sector] = SectorPlan(tuple(ids), count)
    total = sum(p.count for p in sectors.values())

    pickups = []
    raw_pickups = d.get("pickups", [])
    _require(isinstance(raw_pickups, list), "pickups", "must be a list")
    for i, item in enumerate(raw_pickups):
        path = f"pickups[{i}]."
        if isinstance(item, (list, tuple)):
            _require(len(item) == 2, f"pickups[{i}]", "expected [before, volume]")
            item = {"before": item[0], "volume": item[1]}
        _require(isinstance(item, Mapping), f"pickups[{i}]", "must be an object")
        before = _number(item, "before", path, integer=True)
        _require(before < max(total, 1), f"{path}before", f"index outside 0..{total - 1}")
        pickups.append(Pickup(before, float(_number(item, "volume", path))))

    overheads = dict(DEFAULT_OVERHEADS)
    raw_over = d.get("overheads", {})
    _require(isinstance(raw_over, Mapping), "overheads", "must be an object")
    for key in raw_over:
        _require(key in DEFAULT_OVERHEADS, f"overheads.{key}", "unknown overhead")
        overheads[key] = float(_number(raw_over, key, "overheads."))

    return Recipe(
        model_id=d["model_id"],
        size=size,
        side=side,
        sectors=sectors,
        pickup_schedule=tuple(sorted(pickups, key=lambda p: p.before)),
        f_ref=float(_number(d, "f_ref", "", default=5.0, positive=True)),
        v0=float(_number(d, "v0", "", default=0.03, positive=True)),
        overhead_times=overheads,
    )


def resolve(recipe: Recipe, library: Mapping[str, Toolpath]) -> list[Toolpath]:
    """Toolpaths in execution order; left shoes get the mirrored right-shoe paths."""
    out = []
    for i, (sector, tid) in enumerate(recipe.sequence()):
        if tid not in library:
            raise RecipeError(f"sectors.{sector.value}.trajectories", f"unknown trajectory id {tid!r}")
        tp = library[tid]
        out.append(mirror_toolpath(tp) if recipe.side is Side.LEFT else tp)
    return out


@dataclass(frozen=True)
class CycleEstimate:
    per_phase: Mapping[str, float]

    @property
    def total(self) -> float:
        return float(sum(self.per_phase.values()))


def motion_time(tp: Toolpath, speeds) -> float:
    if speeds is None:
        raise RecipeError("speeds", f"missing for {tp.name}")
    v = np.asarray(speeds, dtype=float)
    if len(v) != len(tp.waypoints) or np.any(v <= 0):
        raise RecipeError("speeds", f"need one positive speed per waypoint of {tp.name}")
    seg = np.linalg.norm(np.diff(tp.positions, axis=0), axis=1)
    return float(np.sum(seg / (0.5 * (v[:-1] + v[1:]))))


def estimate_cycle(
    recipe: Recipe,
    runs: Sequence[tuple[Toolpath, Sequence[float] | None]],
    rotations: int = 0,
) -> CycleEstimate:
    """Structural cycle time: motion along the paths plus fixed per-event overheads."""
    o = recipe.overhead_times
    n_pick = len(recipe.pickup_schedule)
    return CycleEstimate(
        {
            "motion": sum(motion_time(tp, v) for tp, v in runs),
            "pickups": n_pick * o["pickup"],
            "homogenize": n_pick * o["homogenize"],
            "rotations": rotations * o["table_rotate"],
        }
    )


@dataclass(frozen=True)
class PitchReport:
    applicable: bool
    distances: tuple[float, ...] = ()  # mm
    ok: bool = False

    @property
    def min(self) -> float:
        return min(self.distances) if self.distances else math.nan

    @property
    def max(self) -> float:
        return max(self.distances) if self.distances else math.nan

    @property
    def mean(self) -> float:
        return float(np.mean(self.distances)) if self.distances else math.nan


def split_passes(tp: Toolpath) -> list[np.ndarray]:
    """Cut a path into passes: smooth runs between sharp turns, or full turns for spirals."""
    p = tp.positions
    if len(p) < 3:
        return [p]
    if tp.pattern is Pattern.SPIRAL:
        return _split_turns(p)
    steps = np.diff(p, axis=0)
    norms = np.linalg.norm(steps, axis=1)
    u = steps / np.where(norms > 0, norms, 1.0)[:, None]
    # a pass is a smooth run; a turn sharper than 60 degrees ends it
    turn = np.einsum("ij,ij->i", u[1:], u[:-1]) < 0.5
    passes, start = [], 0
    for j in np.flatnonzero(turn) + 1:
        passes.append(p[start : j + 1])
        start = j
    passes.append(p[start:])
    # connectors between lines come out as two-point runs
    return [q for q in passes if len(q) >= 3]


def _split_turns(p: np.ndarray) -> list[np.ndarray]:
    c = p.mean(axis=0)
    _, _, vt = np.linalg.svd(p - c)
    u, v = vt[0], vt[1]
    ang = np.unwrap(np.arctan2((p - c) @ v, (p - c) @ u))
    turn = np.floor(np.abs(ang - ang[0]) / (2 * math.pi)).astype(int)
    return [p[turn == k] for k in range(turn.max() + 1) if np.any(turn == k)]


def _nearest_on_polyline(x: np.ndarray, poly: np.ndarray) -> tuple[float, np.ndarray, bool]:
    """Distance from ``x`` to ``poly``, the nearest point, and whether it is interior."""
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    q = a + ab * t[:, None]
    d = np.linalg.norm(q - x, axis=1)
    i = int(np.argmin(d))
    at_end = (i == 0 and t[i] == 0.0) or (i == len(t) - 1 and t[i] == 1.0)
    return float(d[i]), q[i], not at_end


def pitch_report(tp: Toolpath, lo: float = PITCH_RANGE_MM[0], hi: float = PITCH_RANGE_MM[1], tol: float = 0.1) -> PitchReport:
    """Spacing between adjacent passes, in mm.

    Sampled at segment midpoints of each pass against the next pass. A sample
    counts only where the next pass lies across from it: the nearest point is
    not an end of the next pass and the connection is perpendicular to the
    current segment (within ``PERP_COS``).
    """
    passes = [q for q in split_passes(tp) if len(q) >= 2]
    if len(passes) < 2:
        return PitchReport(False)
    dists = []
    for cur, nxt in zip(passes, passes[1:]):
        seg = np.diff(cur, axis=0)
        mids = cur[:-1] + 0.5 * seg
        for m, s in zip(mids, seg):
            d, foot, interior = _nearest_on_polyline(m, nxt)
            # adjacent lines meet their shortest connection at right angles on both sides
            if interior and d > 0 and abs(float((foot - m) @ s)) <= PERP_COS * d * np.linalg.norm(s):
                dists.append(d * 1e3)
    if not dists:
        return PitchReport(False)
    ok = bool(min(dists) >= lo - tol and max(dists) <= hi + tol)
    return PitchReport(True, tuple(dists), ok)


def heterogeneity_check(paths: Sequence[Toolpath], threshold_mm: float = HETEROGENEITY_MM) -> tuple[bool, list[tuple[str, str, str]]]:
    """All pairwise start points and end points must be further apart than ``threshold_mm``."""
    bad = []
    thr = threshold_mm * 1e-3
    for a, b in itertools.combinations(paths, 2):
        pa, pb = a.positions, b.positions
        if np.linalg.norm(pa[0] - pb[0]) <= thr:
            bad.append((a.name, b.name, "start"))
        if np.linalg.norm(pa[-1] - pb[-1]) <= thr:
            bad.append((a.name, b.name, "end"))
    return not bad, bad


def pad_wear_tick(counter: int) -> tuple[int, bool]:
    """Count one more shoe on the current pad; flag when it is due for replacement."""
    if counter < 0:
        raise ValueError("negative pad counter")
    counter += 1
    return counter, counter >= PAD_LIFE


def pad_wear_acknowledge() -> int:
    return 0


@dataclass(frozen=True)
class QualityReport:
    pitch: Mapping[str, PitchReport]
    heterogeneity_ok: bool
    offending_pairs: tuple[tuple[str, str, str], ...]
    pad_uses: int
    replace_pad: bool

    @property
    def pitch_ok(self) -> bool:
        return all(p.ok for p in self.pitch.values() if p.applicable)


def quality_report(paths: Sequence[Toolpath], pad_uses: int = 0, threshold_mm: float = HETEROGENEITY_MM) -> QualityReport:
    unique = {tp.name: tp for tp in paths}
    pitch = {name: pitch_report(tp) for name, tp in unique.items() if tp.pattern is not Pattern.OTHER}
    bad = []
    for sector in SECTOR_ORDER:
        group = [tp for tp in unique.values() if tp.sector is sector]
        if len(group) >= 2:
            bad.extend(heterogeneity_check(group, threshold_mm)[1])
    return QualityReport(pitch, not bad, tuple(bad), pad_uses, pad_uses >= PAD_LIFE)
