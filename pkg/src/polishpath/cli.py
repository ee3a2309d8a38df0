"""Command-line front end.

Exit codes: 0 ok, 1 usage/config, 2 CLS parse errors, 3 infeasible paths,
4 simulation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from . import __version__
from .cls import Toolpath, has_errors, parse_cls, serialize_cls
from .dosing import CartridgeExhausted, CartridgeState, DispenserSpec, DosingError, dispense
from .emitter import emit_report, emit_robot_script, emit_stats_csv, emit_trace_csv
from .forcesim import ContactModel, ControllerParams, SimulationError, compute_stats, profile_from_dict, simulate_contact
from .geometry import CellFrames, GeometryError, mirror_toolpath
from .kinematics import DEXTERITY_THRESHOLD, RobotModel, ur5e
from .motion import FeedParams, ForceDirective, InfeasibleError, PipelineError, compile_pipeline, feedrate_pass
from .recipe import Recipe, RecipeError, estimate_cycle, load_recipe, pad_wear_tick, quality_report, resolve

log = logging.getLogger("polishpath")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_SIMULATION = 0, 1, 2, 3, 4
CONFIG_ENV = "POLISHPATH_CONFIG"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class PipelineConfig:
    base_dir: Path
    robot: RobotModel
    frames: CellFrames
    feed: FeedParams = field(default_factory=FeedParams)
    force: ForceDirective = field(default_factory=ForceDirective)
    contact: ContactModel = field(default_factory=ContactModel)
    controller: ControllerParams = field(default_factory=ControllerParams)
    cls_files: list[Path] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)
    recipe_path: Path | None = None
    library_files: list[Path] = field(default_factory=list)
    dispenser: DispenserSpec = field(default_factory=DispenserSpec)
    threshold: float = DEXTERITY_THRESHOLD
    pad_uses: int = 0
    out: Path = Path("out")
    seed: int = 0
    name: str = "polish"


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def _existing(base: Path, p: str) -> Path:
    path = _resolve(base, p)
    if not path.exists():
        raise ConfigError(f"referenced file not found: {path}")
    return path


def load_config(path: Path) -> PipelineConfig:
    try:
        d: dict[str, Any] = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = path.parent
    try:
        robot_spec = d.get("robot", "ur5e")
        if isinstance(robot_spec, str) and robot_spec != "ur5e":
            robot_spec = json.loads(_existing(base, robot_spec).read_text())
        robot = ur5e() if robot_spec == "ur5e" else RobotModel.from_dict(robot_spec)
        contact_d = dict(d.get("contact", {}))
        profile = profile_from_dict(contact_d.pop("profile", None))
        manifest = {}
        if "manifest" in d:
            manifest = json.loads(_existing(base, d["manifest"]).read_text())
        cfg = PipelineConfig(
            base_dir=base,
            robot=robot,
            frames=CellFrames.from_dict(d.get("frames", {})),
            feed=FeedParams(**d.get("feed", {})),
            force=ForceDirective(**d.get("force", {})),
            contact=ContactModel(surface_offset_profile=profile, **contact_d),
            controller=ControllerParams(**d.get("controller", {})),
            cls_files=[_existing(base, p) for p in d.get("cls", [])],
            manifest=manifest,
            recipe_path=_existing(base, d["recipe"]) if "recipe" in d else None,
            library_files=[_existing(base, p) for p in d.get("library", [])],
            dispenser=DispenserSpec(**d.get("dispenser", {})),
            threshold=float(d.get("threshold", DEXTERITY_THRESHOLD)),
            pad_uses=int(d.get("pad_uses", 0)),
            out=_resolve(base, d.get("out", "out")),
            seed=int(d.get("seed", 0)),
            name=str(d.get("name", "polish")),
        )
    except (TypeError, ValueError, KeyError, GeometryError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None
    return cfg


def _apply_overrides(cfg: PipelineConfig, args) -> PipelineConfig:
    feed = {}
    for flag, key in (("v0", "v0"), ("rlim", "r_lim"), ("red_value", "red_value"), ("k", "k")):
        v = getattr(args, flag, None)
        if v is not None:
            feed[key] = v
    try:
        if feed:
            cfg.feed = replace(cfg.feed, **feed)
        if getattr(args, "force", None) is not None:
            cfg.force = replace(cfg.force, target_force=args.force)
            cfg.controller = replace(cfg.controller, f_ref=args.force)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if getattr(args, "threshold", None) is not None:
        cfg.threshold = args.threshold
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out = Path(args.out)
    return cfg


def _config(args) -> PipelineConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        raise ConfigError(f"no configuration given (use --config or {CONFIG_ENV})")
    cfg = _apply_overrides(load_config(Path(path)), args)
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}") from None
    return cfg


class ParseFailure(Exception):
    pass


def _read_paths(files, manifest) -> list[Toolpath]:
    paths = []
    for f in files:
        tps, diags = parse_cls(Path(f).read_text(), manifest)
        for dgn in diags:
            log.warning("%s:%s", f, dgn)
        if has_errors(diags):
            raise ParseFailure(f"{f}: CLS errors")
        paths.extend(tps)
    return paths


def cmd_parse(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text()) if args.manifest else None
    tps, diags = parse_cls(Path(args.cls_file).read_text(), manifest)
    for tp in tps:
        print(f"{tp.name}: sector={tp.sector.value} pattern={tp.pattern.value} waypoints={len(tp)} length={tp.length():.4f} m")
    for dgn in diags:
        print(dgn)
    return EXIT_PARSE if has_errors(diags) else EXIT_OK


def cmd_mirror(args) -> int:
    tps, diags = parse_cls(Path(args.cls_in).read_text())
    for dgn in diags:
        print(dgn, file=sys.stderr)
    if has_errors(diags):
        return EXIT_PARSE
    Path(args.cls_out).write_text(serialize_cls([mirror_toolpath(tp) for tp in tps]))
    return EXIT_OK


def _cycle(cfg: PipelineConfig, executed, rotations: int, recipe: Recipe | None):
    if recipe is None:
        recipe = load_recipe({"model_id": cfg.name, "v0": cfg.feed.v0, "f_ref": cfg.force.target_force})
    return estimate_cycle(recipe, executed, rotations)


def cmd_compile(args) -> int:
    cfg = _config(args)
    paths = _read_paths(cfg.cls_files, cfg.manifest)
    compiled = compile_pipeline(paths, cfg.frames, cfg.robot, cfg.feed, cfg.force, cfg.threshold, cfg.name)
    script = emit_robot_script(compiled.program)
    (cfg.out / f"{cfg.name}.script").write_text(script.text())
    recipe = load_recipe(cfg.recipe_path.read_text()) if cfg.recipe_path else None
    cycle = _cycle(cfg, compiled.executed, compiled.program.table_markers, recipe)
    report = emit_report(reachability=compiled.reports, cycle=cycle, plan=compiled.plan, title=f"{cfg.name}: compile")
    (cfg.out / "reachability.txt").write_text(report)
    print(report, end="")
    return EXIT_OK


def _svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_trace(trace, f_ref: float, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "polishpath"
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(trace.t, trace.force, lw=0.6)
    ax.axhline(f_ref, color="k", ls="--", lw=0.8)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("contact force [N]")
    fig.tight_layout()
    _svg(fig, path)
    plt.close(fig)


def plot_boxplot(traces: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "polishpath"
    fig, ax = plt.subplots(figsize=(4, 4))
    # whis=1.5 matches the outlier rule of compute_stats
    ax.boxplot([t.force for t in traces.values()], whis=1.5)
    ax.set_xticks(range(1, len(traces) + 1), list(traces))
    ax.set_ylabel("contact force [N]")
    fig.tight_layout()
    _svg(fig, path)
    plt.close(fig)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    paths = _read_paths(cfg.cls_files, cfg.manifest)
    if args.path:
        paths = [tp for tp in paths if tp.name == args.path]
        if not paths:
            raise ConfigError(f"no path named {args.path!r}")
    traces = {}
    rows = []
    for i, tp in enumerate(paths):
        trace = simulate_contact(tp, feedrate_pass(tp, cfg.feed), cfg.contact, cfg.controller, cfg.seed + i)
        stats = compute_stats(trace)
        traces[tp.name] = trace
        (cfg.out / f"{tp.name}_force.csv").write_text(emit_trace_csv(trace))
        rows.append(emit_stats_csv(stats, tp.name).splitlines())
        plot_trace(trace, cfg.controller.f_ref, cfg.out / f"{tp.name}_force.svg")
        print(f"{tp.name}: {len(trace)} samples, mean {stats.mean:.3f} N, sigma {stats.sigma:.3f} N, outliers {stats.outlier_count}")
    (cfg.out / "force_stats.csv").write_text("\n".join([rows[0][0]] + [r[1] for r in rows]) + "\n")
    plot_boxplot(traces, cfg.out / "force_boxplot.svg")
    return EXIT_OK


def cmd_dose(args) -> int:
    spec = DispenserSpec(D=args.D, L=args.L, p=args.pitch, theta=args.theta)
    state = CartridgeState(args.steps_used)
    try:
        state, volume = dispense(state, spec, args.volume)
    except CartridgeExhausted as exc:
        print(f"cartridge exhausted: {exc}; replace the cartridge")
        return EXIT_USAGE
    n = state.steps_used - args.steps_used
    print(f"{n} steps")
    print(f"dispensed {volume:.3f} mm3")
    print(f"remaining {state.remaining_steps(spec)} steps ({state.remaining_volume(spec):.1f} mm3)")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args)
    paths = _read_paths(cfg.cls_files, cfg.manifest)
    status = EXIT_OK
    compiled = None
    try:
        compiled = compile_pipeline(paths, cfg.frames, cfg.robot, cfg.feed, cfg.force, cfg.threshold, cfg.name)
    except InfeasibleError as exc:
        log.error("%s", exc)
        status = EXIT_INFEASIBLE
    library = {tp.name: tp for tp in _read_paths(cfg.library_files, cfg.manifest)} or {tp.name: tp for tp in paths}
    recipe = load_recipe(cfg.recipe_path.read_text(), set(library)) if cfg.recipe_path else None
    rotations = compiled.program.table_markers if compiled else 0
    if recipe is not None:
        resolved = resolve(recipe, library)
        executed = [(tp, feedrate_pass(tp, cfg.feed)) for tp in resolved]
        quality_paths = resolved
    else:
        executed = compiled.executed if compiled else []
        quality_paths = paths
    cycle = _cycle(cfg, executed, rotations, recipe)
    uses, _ = pad_wear_tick(cfg.pad_uses)
    quality = quality_report(quality_paths, uses)
    dose = None
    if recipe is not None and recipe.pickup_schedule:
        state = CartridgeState()
        for pk in recipe.pickup_schedule:
            state, _ = dispense(state, cfg.dispenser, pk.volume)
        dose = {"steps per shoe": state.steps_used, "shoes per cartridge": cfg.dispenser.total_steps // max(state.steps_used, 1)}
    text = emit_report(
        reachability=compiled.reports if compiled else None,
        cycle=cycle,
        quality=quality,
        plan=compiled.plan if compiled else None,
        dose=dose,
        title=f"{cfg.name}: report",
    )
    (cfg.out / "report.txt").write_text(text)
    print(text, end="")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polishpath", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pipeline_flags(p):
        p.add_argument("--config", help=f"pipeline configuration (falls back to ${CONFIG_ENV})")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--v0", type=float, help="reference TCP speed [m/s]")
        p.add_argument("--rlim", type=float, help="curvature radius threshold [m]")
        p.add_argument("--red-value", dest="red_value", type=float)
        p.add_argument("--k", type=float, help="speed reduction slope [1/m]")
        p.add_argument("--force", type=float, help="target contact force [N]")
        p.add_argument("--threshold", type=float, help="dexterity threshold")

    p = sub.add_parser("parse", help="parse a CLS file and list its toolpaths")
    p.add_argument("cls_file")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("compile", help="compile CLS toolpaths into a robot script")
    pipeline_flags(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("mirror", help="turn right-shoe CLS into left-shoe CLS")
    p.add_argument("cls_in")
    p.add_argument("cls_out")
    p.set_defaults(func=cmd_mirror)

    p = sub.add_parser("simulate", help="simulate the contact-force loop")
    pipeline_flags(p)
    p.add_argument("--path", help="simulate only this toolpath")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dose", help="motor steps for a polish dose")
    p.add_argument("--volume", type=float, required=True, help="dose volume [mm3]")
    p.add_argument("--steps-used", dest="steps_used", type=int, default=0)
    p.add_argument("--D", type=float, default=50.0, help="stick diameter [mm]")
    p.add_argument("--L", type=float, default=200.0, help="stick length [mm]")
    p.add_argument("--pitch", type=float, default=5.0, help="actuator pitch [mm/rev]")
    p.add_argument("--theta", type=float, default=1.8, help="motor step [deg]")
    p.set_defaults(func=cmd_dose)

    p = sub.add_parser("report", help="consolidated reachability, cycle and quality report")
    pipeline_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseFailure as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except InfeasibleError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except SimulationError as exc:
        log.error("simulation failed: %s", exc)
        return EXIT_SIMULATION
    except (ConfigError, RecipeError, DosingError, PipelineError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
