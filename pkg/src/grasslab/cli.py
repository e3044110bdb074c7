"""Command-line entry points.

Subcommands: calibrate, evaluate, play, serve, track, render-report.
Exit codes: 0 success, 1 usage error, 2 domain error. The config path can
come from --config or $GRASSLAB_CONFIG; the serve port from --port,
$GRASSLAB_PORT, or the config file, in that order.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import (
    ReportCell,
    center_and_regress,
    characteristic_linearity,
    multi_pixel_stats,
    render_report_text,
    run_sweep,
    write_report_csv,
)
from .appearance import GrayCardBoard, auto_expose
from .assets import BUNDLED_ANIMATIONS, load_bundled
from .calibration import (
    calibrate_multi,
    load_calibration,
    sample_characteristic,
    save_calibration,
)
from .config import ConfigError, load_config, resolve_port
from .display import assemble, load_animation, make_module, play as play_animation
from .motor import MotorState, PdGains, ramp_tracking_test, write_trace_csv
from .pixel import make_pixel

USAGE_ERROR = 1
DOMAIN_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="grasslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="sample every pixel and write a calibration file")
    p.add_argument("--config", help="scene config JSON (default: $GRASSLAB_CONFIG or built-ins)")
    p.add_argument("--output", required=True, help="calibration JSON to write")
    p.add_argument("--step-mm", type=float, default=1.0)

    p = sub.add_parser("evaluate", help="run level sweeps against a calibration file")
    p.add_argument("--config", help="scene config JSON")
    p.add_argument("--calibration", required=True)
    p.add_argument("--viewpoints", default="0,30,60,90", help="comma-separated degrees")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--output", required=True, help="raw results JSON to write")

    p = sub.add_parser("play", help="play an animation file or bundled asset")
    p.add_argument("--config", help="scene config JSON")
    p.add_argument("--calibration", help="calibration JSON (default: uncalibrated tables)")
    p.add_argument("animation", help=f"path to .anim or one of {sorted(BUNDLED_ANIMATIONS)}")
    p.add_argument("--report", help="write the playback report JSON here")

    p = sub.add_parser("serve", help="run the protocol server")
    p.add_argument("--config", help="scene config JSON")
    p.add_argument("--calibration", help="calibration JSON to preload")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, help="default: $GRASSLAB_PORT or config")
    p.add_argument("--fps", type=int, default=10)

    p = sub.add_parser("track", help="run the setpoint-ramp tracking test")
    p.add_argument("--config", help="scene config JSON")
    p.add_argument("--fps", type=int, required=True)
    p.add_argument("--csv", help="write the (t, sp, pv, pwm) trace here")

    p = sub.add_parser("render-report", help="format evaluation results as text + CSV")
    p.add_argument("--input", required=True, help="raw results JSON from 'evaluate'")
    p.add_argument("--text", help="write the human-readable report here (default: stdout)")
    p.add_argument("--csv", help="write the machine-readable rows here")

    return parser


def _cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    cam = auto_expose(GrayCardBoard(), cfg.environment, cfg.camera)
    modules = [
        make_module(m, cfg.optics, drivetrain=cfg.drivetrain, gains=cfg.gains)
        for m in range(cfg.module_count)
    ]
    chars = {}
    for module in modules:
        for pixel in module.pixels:
            try:
                chars[pixel.pixel_id] = sample_characteristic(
                    pixel, cfg.environment, cam, step_mm=args.step_mm, settle=cfg.settle
                )
            except Exception as exc:
                raise RuntimeError(f"pixel {pixel.pixel_id}: {exc}") from exc
    cal = calibrate_multi(
        chars,
        environment_name=cfg.environment.name,
        viewpoint_angle_deg=cfg.camera.viewpoint_angle_deg,
    )
    save_calibration(cal, args.output)
    print(
        f"calibrated {len(chars)} pixels; reference OGCD {cal.reference_ogcd:.3f} "
        f"from pixel {cal.reference_pixel_id}; wrote {args.output}"
    )
    for warning in cal.warnings:
        print(f"warning: pixel {warning.pixel_id}: {warning.message}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    cal = load_calibration(args.calibration)
    viewpoints = [float(v) for v in args.viewpoints.split(",") if v.strip()]
    if not viewpoints:
        raise UsageError("no viewpoints given")
    results = []
    calib_vp = cal.viewpoint_angle_deg
    for meas_vp in viewpoints:
        from dataclasses import replace

        cam = auto_expose(
            GrayCardBoard(), cfg.environment, replace(cfg.camera, viewpoint_angle_deg=meas_vp)
        )
        per_pixel_r2 = []
        for pid, pc in sorted(cal.pixels.items()):
            pixel = make_pixel(pid, cfg.optics, drivetrain=cfg.drivetrain, gains=cfg.gains)
            ds = run_sweep(
                pixel, pc.table, cfg.environment, cam, calib_vp,
                trials=args.trials, settle=cfg.settle,
            )
            fit, _ = center_and_regress(ds)
            baseline = characteristic_linearity(pc.characteristic)
            per_pixel_r2.append(
                {
                    "pixel_id": pid,
                    "baseline_r2": baseline.r_squared,
                    "calibrated_r2": fit.r_squared,
                }
            )
        results.append(
            {
                "calib_viewpoint": calib_vp,
                "meas_viewpoint": meas_vp,
                "environment": cfg.environment.name,
                "n_trials": args.trials,
                "pixels": per_pixel_r2,
            }
        )
    with open(args.output, "w") as fh:
        json.dump({"schema": "grasslab-evaluation/1", "cells": results}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {args.output} ({len(results)} viewpoint cells)")
    return 0


def _cmd_play(args) -> int:
    cfg = load_config(args.config)
    if args.animation in BUNDLED_ANIMATIONS:
        anim = load_bundled(args.animation)
    else:
        anim = load_animation(args.animation)
    modules = [
        make_module(m, cfg.optics, drivetrain=cfg.drivetrain, gains=cfg.gains)
        for m in range(cfg.module_count)
    ]
    if args.calibration:
        cal = load_calibration(args.calibration)
        tables = {pid: pc.table for pid, pc in cal.pixels.items()}
    else:
        from .server import default_tables

        tables = default_tables([p.pixel_id for m in modules for p in m.pixels])
    display = assemble(modules, tables)
    if (anim.width, anim.height) != (display.width, display.height):
        raise ValueError(
            f"animation {anim.width}x{anim.height} does not match "
            f"display {display.width}x{display.height}"
        )
    report = play_animation(display, anim)
    worst = min(report.settled_fraction)
    print(
        f"played {len(anim.frames)} frames at {anim.fps} fps; "
        f"min settled fraction {worst:.4f}"
    )
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.as_dict(), fh, indent=1)
            fh.write("\n")
    return 0


def _cmd_serve(args) -> int:
    from .server import DisplayService, serve

    cfg = load_config(args.config)
    cal = load_calibration(args.calibration) if args.calibration else None
    service = DisplayService(cfg, calibration=cal, fps=args.fps)
    port = resolve_port(cfg, args.port)
    print(f"serving {service.display.width}x{service.display.height} display on {args.host}:{port}")
    serve(args.host, port, service)
    return 0


def _cmd_track(args) -> int:
    cfg = load_config(args.config)
    if args.fps < 1:
        raise UsageError("--fps must be >= 1")
    state = MotorState(params=cfg.drivetrain)
    state.homed = True
    result = ramp_tracking_test(state, args.fps, gains=cfg.gains)
    verdict = "PASS" if result.passed else "FAIL"
    print(
        f"fps {args.fps}: {verdict} (max |sp - pv| = {result.max_abs_error} counts, "
        f"tolerance {result.tolerance_counts})"
    )
    if args.csv:
        write_trace_csv(result.trace, args.csv)
    return 0 if result.passed else DOMAIN_ERROR


def _cmd_render_report(args) -> int:
    with open(args.input) as fh:
        data = json.load(fh)
    if data.get("schema") != "grasslab-evaluation/1":
        raise ValueError(f"unsupported results schema {data.get('schema')!r}")
    cells = []
    for cell in data["cells"]:
        pixels = cell["pixels"]
        baseline = sum(p["baseline_r2"] for p in pixels) / len(pixels)
        calibrated = sum(p["calibrated_r2"] for p in pixels) / len(pixels)
        cells.append(
            ReportCell(
                calib_viewpoint_deg=cell["calib_viewpoint"],
                meas_viewpoint_deg=cell["meas_viewpoint"],
                environment=cell["environment"],
                baseline_r2=baseline,
                calibrated_r2=calibrated,
                n_trials=cell["n_trials"],
            )
        )
    text = render_report_text(cells)
    if args.text:
        with open(args.text, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    if args.csv:
        write_report_csv(cells, args.csv)
    return 0


_HANDLERS = {
    "calibrate": _cmd_calibrate,
    "evaluate": _cmd_evaluate,
    "play": _cmd_play,
    "serve": _cmd_serve,
    "track": _cmd_track,
    "render-report": _cmd_render_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
