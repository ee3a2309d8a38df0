"""CLS (cutter location source) front-end.

Reads and writes the APT-style subset exported by CAM packages::

    $$ comment
    TOOL PATH/toe_zigzag_6mm
    GOTO/x,y,z,i,j,k          (position in mm, tool axis unitless)
    FEDRAT/...                (ignored, warning)
    PAINT/...                 (ignored, warning)

Sector, pattern and pitch are not part of CLS. They are carried in
structured comments (``$$ SECTOR/Toe``) written by :func:`serialize_cls`,
and can be overridden by a manifest keyed by path name.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

MM = 1e-3

#: axis norm deviations below this are kept as-is
AXIS_EXACT_TOL = 1e-9
#: silently renormalized up to here
AXIS_SILENT_TOL = 1e-6
#: warning band upper bound; beyond it the axis is an authoring mistake
AXIS_WARN_TOL = 1e-3
MIN_STEP = 1e-9


class Sector(str, enum.Enum):
    TOE = "Toe"
    VAMP = "Vamp"
    LATERAL_LEFT = "LateralLeft"
    LATERAL_RIGHT = "LateralRight"
    HEEL = "Heel"


class Pattern(str, enum.Enum):
    ZIGZAG = "Zigzag"
    SPIRAL = "Spiral"
    OTHER = "Other"


class Severity(str, enum.Enum):
    WARNING = "Warning"
    ERROR = "Error"


@dataclass(frozen=True)
class Waypoint:
    """A tool position (m) and the unit tool axis pointing out of the surface."""

    position: tuple[float, float, float]
    tool_axis: tuple[float, float, float]

    @classmethod
    def from_arrays(cls, position, tool_axis) -> "Waypoint":
        p = tuple(float(v) for v in position)
        a = tuple(float(v) for v in tool_axis)
        return cls(p, a)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Toolpath:
    name: str
    waypoints: tuple[Waypoint, ...]
    sector: Sector = Sector.TOE
    pattern: Pattern = Pattern.OTHER
    pitch: float | None = None  # mm

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def positions(self) -> np.ndarray:
        return np.array([w.position for w in self.waypoints], dtype=float).reshape(-1, 3)

    @property
    def axes(self) -> np.ndarray:
        return np.array([w.tool_axis for w in self.waypoints], dtype=float).reshape(-1, 3)

    @classmethod
    def from_arrays(cls, name, positions, axes, **kwargs) -> "Toolpath":
        wps = tuple(Waypoint.from_arrays(p, a) for p, a in zip(positions, axes))
        return cls(name=name, waypoints=wps, **kwargs)

    def with_arrays(self, positions, axes) -> "Toolpath":
        wps = tuple(Waypoint.from_arrays(p, a) for p, a in zip(positions, axes))
        return replace(self, waypoints=wps)

    def length(self) -> float:
        p = self.positions
        return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum()) if len(p) > 1 else 0.0


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    line: int
    message: str

    def __post_init__(self):
        if self.line < 1:
            raise ValueError("diagnostic line numbers start at 1")

    def __str__(self) -> str:
        return f"{self.line}: {self.severity.value}: {self.message}"


_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_GOTO_RE = re.compile(rf"^GOTO/\s*({_NUMBER}(?:\s*,\s*{_NUMBER}){{5}})\s*$")
_HEADER_RE = re.compile(r"^TOOL PATH/\s*(\S.*?)\s*$")
_META_RE = re.compile(r"^\$\$\s*(SECTOR|PATTERN|PITCH)/\s*(\S+)\s*$")
_IGNORED = ("PAINT/", "FEDRAT/")

DEFAULT_PATH_NAME = "path"


@dataclass
class _Builder:
    name: str
    line: int
    sector: Sector = Sector.TOE
    pattern: Pattern = Pattern.OTHER
    pitch: float | None = None
    waypoints: list[Waypoint] = field(default_factory=list)

    def build(self) -> Toolpath:
        return Toolpath(self.name, tuple(self.waypoints), self.sector, self.pattern, self.pitch)


def parse_cls(
    text: str, manifest: Mapping[str, Mapping[str, object]] | None = None
) -> tuple[list[Toolpath], list[Diagnostic]]:
    """Parse a CLS document into toolpaths plus diagnostics.

    Never raises on bad input: malformed records are reported and skipped.
    ``manifest`` maps path names to ``{"sector", "pattern", "pitch"}`` and
    takes precedence over metadata comments in the file.
    """
    paths: list[_Builder] = []
    diags: list[Diagnostic] = []
    current: _Builder | None = None

    def warn(lineno, msg):
        diags.append(Diagnostic(Severity.WARNING, lineno, msg))

    def error(lineno, msg):
        diags.append(Diagnostic(Severity.ERROR, lineno, msg))

    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        warn(1, "empty CLS document")
        return [], diags

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("$$"):
            m = _META_RE.match(line)
            if m and current is not None:
                _apply_meta(current, m.group(1), m.group(2), lineno, error)
            continue
        m = _HEADER_RE.match(line)
        if m:
            current = _Builder(m.group(1), lineno)
            paths.append(current)
            continue
        if line.startswith(_IGNORED):
            warn(lineno, f"ignored record {line.split('/')[0]}")
            continue
        if not line.startswith("GOTO/"):
            error(lineno, f"unrecognized record: {line[:40]!r}")
            continue
        m = _GOTO_RE.match(line)
        if not m:
            error(lineno, "malformed GOTO record (expected 6 comma-separated numbers)")
            continue
        values = [float(v) for v in m.group(1).split(",")]
        if not all(math.isfinite(v) for v in values):
            error(lineno, "non-finite value in GOTO record")
            continue
        axis = values[3:]
        norm = math.sqrt(sum(v * v for v in axis))
        if norm == 0.0:
            error(lineno, "zero-length tool axis")
            continue
        dev = abs(norm - 1.0)
        if dev > AXIS_EXACT_TOL:
            axis = [v / norm for v in axis]
            if dev > AXIS_SILENT_TOL:
                warn(lineno, f"tool axis normalized (|axis| = {norm:.9g})")
        if current is None:
            current = _Builder(DEFAULT_PATH_NAME, lineno)
            paths.append(current)
        pos = tuple(v * MM for v in values[:3])
        current.waypoints.append(Waypoint(pos, tuple(axis)))  # type: ignore[arg-type]

    result = []
    for b in paths:
        if manifest and b.name in manifest:
            _apply_manifest(b, manifest[b.name])
        result.append(b.build())
    return result, diags


def _apply_meta(b: _Builder, key: str, value: str, lineno: int, error) -> None:
    try:
        if key == "SECTOR":
            b.sector = Sector(value)
        elif key == "PATTERN":
            b.pattern = Pattern(value)
        else:
            b.pitch = float(value)
    except ValueError:
        error(lineno, f"invalid {key.lower()} {value!r}")


def _apply_manifest(b: _Builder, entry: Mapping[str, object]) -> None:
    if "sector" in entry:
        b.sector = Sector(entry["sector"])
    if "pattern" in entry:
        b.pattern = Pattern(entry["pattern"])
    if entry.get("pitch") is not None:
        b.pitch = float(entry["pitch"])  # type: ignore[arg-type]


def _fmt(value: float) -> str:
    # 15 significant digits survive a decimal -> double -> decimal trip unchanged
    if value == 0.0:
        value = 0.0  # drop the sign of -0.0
    return format(value, ".15g")


def serialize_cls(paths: Iterable[Toolpath]) -> str:
    out = ["$$ polishpath CLS"]
    for tp in paths:
        out.append(f"TOOL PATH/{tp.name}")
        out.append(f"$$ SECTOR/{tp.sector.value}")
        out.append(f"$$ PATTERN/{tp.pattern.value}")
        if tp.pitch is not None:
            out.append(f"$$ PITCH/{_fmt(tp.pitch)}")
        for w in tp.waypoints:
            nums = [v / MM for v in w.position] + list(w.tool_axis)
            out.append("GOTO/" + ",".join(_fmt(v) for v in nums))
    return "\n".join(out) + "\n"


def validate_toolpath(tp: Toolpath) -> list[Diagnostic]:
    """Check a toolpath against its invariants.

    Diagnostics carry ``line=1`` since a toolpath value has no source
    position; the message names the waypoint index.
    """
    diags = []
    if len(tp.waypoints) < 2:
        diags.append(Diagnostic(Severity.ERROR, 1, f"{tp.name}: fewer than 2 waypoints"))
    for i, w in enumerate(tp.waypoints):
        if not all(math.isfinite(v) for v in w.position + w.tool_axis):
            diags.append(Diagnostic(Severity.ERROR, 1, f"{tp.name}[{i}]: non-finite value"))
            continue
        dev = abs(math.sqrt(sum(v * v for v in w.tool_axis)) - 1.0)
        if dev > AXIS_WARN_TOL:
            diags.append(Diagnostic(Severity.ERROR, 1, f"{tp.name}[{i}]: tool axis not unit (dev {dev:.3g})"))
        elif dev > AXIS_SILENT_TOL:
            diags.append(Diagnostic(Severity.WARNING, 1, f"{tp.name}[{i}]: tool axis not unit (dev {dev:.3g})"))
    p = tp.positions
    if len(p) > 1:
        steps = np.linalg.norm(np.diff(p, axis=0), axis=1)
        for i in np.flatnonzero(steps <= MIN_STEP):
            diags.append(Diagnostic(Severity.ERROR, 1, f"{tp.name}[{i + 1}]: repeats previous waypoint"))
    return diags


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)
