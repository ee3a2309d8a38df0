"""Robot-script back-end and report artifacts.

The script dialect is a URScript-like subset meant for offline inspection.
A background thread re-aligns force mode with the current tool axis every
controller cycle; process moves are blended ``movep`` calls and transit
moves are ``movel``. Poses are ``p[x, y, z, rx, ry, rz]`` in the robot
base frame (m, rotation vector in rad).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .forcesim import ForceStats, ForceTrace
from .motion import MotionCommand, MotionProgram, MoveKind, TableRotation

TABLE_CALL = "rotary_table_turn"


@dataclass
class ScriptDocument:
    header: list[str]
    body: list[str]
    footer: list[str] = field(default_factory=list)

    @property
    def lines(self) -> list[str]:
        return self.header + self.body + self.footer

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _pose(cmd: MotionCommand) -> str:
    x, y, z = cmd.target.translation
    rx, ry, rz = cmd.target.rotvec()
    vals = [f"{v:.6f}" for v in (x, y, z)] + [f"{v:.6f}" for v in (rx, ry, rz)]
    return "p[" + ", ".join(v if v != "-0.000000" else "0.000000" for v in vals) + "]"


def _move(cmd: MotionCommand) -> str:
    fn = "movep" if cmd.kind is MoveKind.PROCESS else "movel"
    return f"  {fn}({_pose(cmd)}, a={cmd.acceleration:.5f}, v={cmd.speed:.5f}, r={cmd.blend_radius:.5f})"


def _header(prog: MotionProgram) -> list[str]:
    d = prog.directive
    assert d is not None
    period = 1.0 / d.update_rate
    return [
        f"def {prog.name}():",
        "  # force control thread: keeps the force along the current tool axis",
        f"  global force_target = {d.target_force:.5f}",
        f"  global force_rate_hz = {d.update_rate:.1f}",
        f"  global force_period = {period:.6f}",
        "  global force_active = False",
        "  thread force_thread():",
        "    while (True):",
        "      if (force_active):",
        "        force_mode(get_actual_tcp_pose(), [0, 0, 1, 0, 0, 0], [0.0, 0.0, force_target, 0.0, 0.0, 0.0], 2, [0.1, 0.1, 0.15, 0.35, 0.35, 0.35])",
        "      else:",
        "        end_force_mode()",
        "      end",
        "      sync()",
        "    end",
        "  end",
        f"  def {TABLE_CALL}(angle):",
        "    # external rotary-table actuator; waits until in position",
        "    set_standard_digital_out(0, True)",
        "    while (not get_standard_digital_in(0)):",
        "      sync()",
        "    end",
        "    set_standard_digital_out(0, False)",
        "  end",
        "  force_handle = run force_thread()",
    ]


FOOTER = [
    "  force_active = False",
    "  kill force_handle",
    "  end_force_mode()",
    "end",
]


def emit_robot_script(prog: MotionProgram) -> ScriptDocument:
    """Serialize a program. Force-mode toggles are emitted where the active state flips."""
    prog.check()
    body: list[str] = []
    active = False
    for c in prog.commands:
        if isinstance(c, TableRotation):
            if active:
                body.append("  force_active = False")
                active = False
            body.append(f"  {TABLE_CALL}({c.angle:.6f})")
            continue
        if c.force_active != active:
            body.append(f"  force_active = {c.force_active}")
            active = c.force_active
        body.append(_move(c))
    return ScriptDocument(_header(prog), body, list(FOOTER))


def emit_trace_csv(trace: ForceTrace) -> str:
    rows = ["t,force"] + [f"{t:.9g},{f:.9g}" for t, f in zip(trace.t, trace.force)]
    return "\n".join(rows) + "\n"


STATS_HEADER = "mean,median,sigma,q1,q3,outliers"


def format_stats_row(stats: ForceStats) -> str:
    return f"{stats.mean:.2f},{stats.median:.2f},{stats.sigma:.2f},{stats.q1:.2f},{stats.q3:.2f},{stats.outlier_count}"


def emit_stats_csv(stats: ForceStats, label: str | None = None) -> str:
    if label is None:
        return f"{STATS_HEADER}\n{format_stats_row(stats)}\n"
    return f"label,{STATS_HEADER}\n{label},{format_stats_row(stats)}\n"


def emit_report(
    reachability=None,
    cycle=None,
    stats: ForceStats | None = None,
    quality=None,
    plan=None,
    dose=None,
    title: str = "polishing report",
) -> str:
    """Plain-text summary of whichever artifacts are given."""
    out = [title, "=" * len(title)]
    if reachability:
        out += ["", "Reachability"]
        below = 0
        for name, rep in reachability.items():
            below += rep.count_below_threshold
            out.append(
                f"  {name}: {len(rep.entries)} waypoints, {rep.count_below_threshold} below threshold, "
                f"min dexterity {rep.min_dexterity:.3e}"
            )
        out.append(f"  total below threshold: {below}")
    if plan is not None:
        out += ["", "Table usage"]
        out.append(f"  direct: {', '.join(tp.name for tp in plan.direct) or '-'}")
        out.append(f"  rotated: {', '.join(tp.name for tp in plan.rotated) or '-'}")
        out.append(f"  infeasible: {', '.join(tp.name for tp in plan.infeasible) or '-'}")
    if cycle is not None:
        out += ["", "Cycle time"]
        for phase, secs in cycle.per_phase.items():
            out.append(f"  {phase}: {secs:.1f} s")
        out.append(f"  total: {cycle.total:.1f} s ({cycle.total / 60:.1f} min)")
    if stats is not None:
        out += ["", "Contact force [N]", f"  {STATS_HEADER}", f"  {format_stats_row(stats)}"]
    if quality is not None:
        out += ["", "Quality checks"]
        for name, pr in quality.pitch.items():
            if pr.applicable:
                out.append(
                    f"  pitch {name}: min {pr.min:.2f} mean {pr.mean:.2f} max {pr.max:.2f} mm "
                    f"{'ok' if pr.ok else 'OUT OF RANGE'}"
                )
            else:
                out.append(f"  pitch {name}: not applicable")
        out.append(f"  pitch ok: {quality.pitch_ok}")
        out.append(f"  start/end heterogeneity ok: {quality.heterogeneity_ok}")
        for a, b, what in quality.offending_pairs:
            out.append(f"    {a} / {b}: {what} points closer than threshold")
        out.append(f"  pad uses: {quality.pad_uses}{' (replace pad)' if quality.replace_pad else ''}")
    if dose is not None:
        out += ["", "Dosing"]
        for k, v in dose.items():
            out.append(f"  {k}: {v}")
    return "\n".join(out) + "\n"
