"""Evaluation protocol: level sweeps, trial centering, pooled regression.

Linearity of the calibrated response is judged the same way as in the
hardware experiments: drive the sweep levels up and down ten times, center
each trial's OGCD series on its own mean to remove per-trial offset drift,
pool everything, and fit one straight line. The coefficient of
determination of that pooled fit is the headline number.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .appearance import CameraConfig, Environment, measure_grass_color
from .calibration import CorrespondenceTable, OgcdCharacteristic, apply_table
from .color import Lab, ciede2000
from .pixel import PixelSim, SettleParams

__all__ = [
    "SWEEP_LEVELS",
    "TrialSeries",
    "MeasurementDataset",
    "RegressionResult",
    "RegressionError",
    "linear_fit",
    "run_sweep",
    "center_and_regress",
    "characteristic_linearity",
    "ReportCell",
    "MultiPixelStats",
    "render_report_text",
    "write_report_csv",
]

# Sweep levels: 0, then 7 upward in steps of 8 to 255 (33 points).
SWEEP_LEVELS: tuple[int, ...] = (0,) + tuple(range(7, 256, 8))


class RegressionError(ValueError):
    """Regression is undefined (no variance in the predictor)."""


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    residuals: tuple[float, ...]


def linear_fit(x, y) -> RegressionResult:
    """Ordinary least squares line with a clamped R-squared.

    R^2 = 1 - SSres/SStot, clamped into [0, 1]; a response with no
    variance is reported as R^2 = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or float(np.ptp(x)) == 0.0:
        raise RegressionError("predictor has no variance")
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    pred = a @ coef
    resid = y - pred
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 0.0:
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RegressionResult(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=r2,
        residuals=tuple(float(r) for r in resid),
    )


@dataclass(frozen=True)
class TrialSeries:
    """One up or down sweep; series are stored sorted by level.

    OGCD is referenced to this trial's own level-0 color, so the first
    entry is zero by construction regardless of sweep direction.
    """

    levels: tuple[int, ...]
    labs: tuple[Lab, ...]
    ogcds: tuple[float, ...]
    direction: str
    trial_index: int

    def __post_init__(self) -> None:
        if self.direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {self.direction!r}")
        if len(self.levels) != len(self.ogcds) or len(self.levels) != len(self.labs):
            raise ValueError("levels, labs and ogcds must align")
        if abs(self.ogcds[0]) > 1e-9:
            raise ValueError("OGCD at the first level must be 0 (per-trial reference)")


@dataclass(frozen=True)
class MeasurementDataset:
    trials: tuple[TrialSeries, ...]
    calibration_viewpoint_deg: float
    measurement_viewpoint_deg: float
    environment_name: str = ""

    def __post_init__(self) -> None:
        ups = sum(1 for t in self.trials if t.direction == "up")
        downs = len(self.trials) - ups
        if len(self.trials) == 10 and (ups != 5 or downs != 5):
            raise ValueError("a full dataset is five up and five down trials")


def run_sweep(
    pixel: PixelSim,
    table: CorrespondenceTable,
    env: Environment,
    cam: CameraConfig,
    calibration_viewpoint_deg: float,
    trials: int = 10,
    levels: tuple[int, ...] = SWEEP_LEVELS,
    settle: SettleParams = SettleParams(),
) -> MeasurementDataset:
    """Measure OGCD over the level sweep, alternating up and down trials.

    Each trial starts from a freshly homed pixel so trials are independent
    runs; without texture noise they are bit-identical per direction.
    """
    if not pixel.motor.homed:
        raise RuntimeError("pixel must be homed")
    all_trials: list[TrialSeries] = []
    for index in range(trials):
        direction = "up" if index % 2 == 0 else "down"
        pixel.home()
        order = levels if direction == "up" else tuple(reversed(levels))
        measured: dict[int, Lab] = {}
        for level in order:
            pixel.level = level
            pixel.move_and_settle(apply_table(table, level, pixel.params), settle)
            image = pixel.capture(env, cam)
            measured[level] = measure_grass_color(image, cam.crop_rect)
        lab0 = measured[levels[0]]
        labs = tuple(measured[lv] for lv in levels)
        ogcds = tuple(ciede2000(lab0, measured[lv]) for lv in levels)
        all_trials.append(
            TrialSeries(
                levels=tuple(levels),
                labs=labs,
                ogcds=ogcds,
                direction=direction,
                trial_index=index,
            )
        )
    return MeasurementDataset(
        trials=tuple(all_trials),
        calibration_viewpoint_deg=calibration_viewpoint_deg,
        measurement_viewpoint_deg=cam.viewpoint_angle_deg,
        environment_name=env.name,
    )


def center_and_regress(ds: MeasurementDataset) -> tuple[RegressionResult, np.ndarray]:
    """Center each trial on its own mean OGCD, pool, and fit one line.

    Returns the regression plus the pooled (level, centered OGCD) points
    for plotting.
    """
    if not ds.trials:
        raise ValueError("dataset has no trials")
    xs: list[float] = []
    ys: list[float] = []
    for trial in ds.trials:
        og = np.asarray(trial.ogcds, dtype=float)
        centered = og - og.mean()
        xs.extend(float(lv) for lv in trial.levels)
        ys.extend(float(v) for v in centered)
    points = np.column_stack([xs, ys])
    return linear_fit(points[:, 0], points[:, 1]), points


def characteristic_linearity(char: OgcdCharacteristic) -> RegressionResult:
    """Straight-line fit of the sampled characteristic (uncalibrated baseline)."""
    lengths = [s.length_mm for s in char.samples]
    ogcds = [s.ogcd for s in char.samples]
    return linear_fit(lengths, ogcds)


# ---------------------------------------------------------------------------
# reporting

@dataclass(frozen=True)
class ReportCell:
    calib_viewpoint_deg: float
    meas_viewpoint_deg: float
    environment: str
    baseline_r2: float
    calibrated_r2: float
    n_trials: int


@dataclass(frozen=True)
class MultiPixelStats:
    """Cross-pixel spread of a multi-pixel run."""

    n_pixels: int
    reference_ogcd: float
    level255_mean_ogcd: float
    level255_std_ogcd: float
    max_gap: float
    max_gap_level: int


def render_report_text(
    cells: list[ReportCell], multi_stats: MultiPixelStats | None = None
) -> str:
    """Human-readable matrix report: baseline vs calibrated R-squared."""
    out = io.StringIO()
    out.write("8-bit linearity evaluation\n")
    out.write("==========================\n")
    if not cells:
        out.write("(no results)\n")
        return out.getvalue()
    by_calib: dict[float, list[ReportCell]] = {}
    for cell in cells:
        by_calib.setdefault(cell.calib_viewpoint_deg, []).append(cell)
    for calib in sorted(by_calib):
        rows = sorted(by_calib[calib], key=lambda c: c.meas_viewpoint_deg)
        out.write(f"\ncalibrated at {calib:g} deg ({rows[0].environment})\n")
        out.write("  meas   baseline R2  calibrated R2  delta\n")
        for c in rows:
            out.write(
                f"  {c.meas_viewpoint_deg:4g}   {c.baseline_r2:11.4f}"
                f"  {c.calibrated_r2:13.4f}  {c.calibrated_r2 - c.baseline_r2:+.4f}\n"
            )
        avg = sum(c.calibrated_r2 for c in rows) / len(rows)
        out.write(f"  average calibrated R2: {avg:.4f}\n")
    if multi_stats is not None:
        s = multi_stats
        out.write(
            f"\nmulti-pixel spread ({s.n_pixels} pixels, reference OGCD {s.reference_ogcd:.2f})\n"
            f"  level 255: mean OGCD {s.level255_mean_ogcd:.2f},"
            f" std {s.level255_std_ogcd:.2f}\n"
            f"  largest cross-pixel gap: {s.max_gap:.2f} at level {s.max_gap_level}\n"
        )
    return out.getvalue()


def write_report_csv(cells: list[ReportCell], path) -> None:
    """Machine-readable report rows; schema is fixed for golden-file tests."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["calib_viewpoint", "meas_viewpoint", "environment", "baseline_r2", "calibrated_r2", "n_trials"]
        )
        for c in cells:
            writer.writerow(
                [
                    f"{c.calib_viewpoint_deg:g}",
                    f"{c.meas_viewpoint_deg:g}",
                    c.environment,
                    f"{c.baseline_r2:.6f}",
                    f"{c.calibrated_r2:.6f}",
                    c.n_trials,
                ]
            )


def multi_pixel_stats(
    per_pixel_ogcds: dict[int, dict[int, float]], reference_ogcd: float
) -> MultiPixelStats:
    """Spread statistics from per-pixel OGCD-by-level measurements."""
    if not per_pixel_ogcds:
        raise ValueError("no pixels")
    levels = sorted(next(iter(per_pixel_ogcds.values())).keys())
    gaps = {}
    for lv in levels:
        vals = [og[lv] for og in per_pixel_ogcds.values()]
        gaps[lv] = max(vals) - min(vals)
    worst_level = max(gaps, key=lambda lv: gaps[lv])
    at_255 = np.array([og[255] for og in per_pixel_ogcds.values()])
    return MultiPixelStats(
        n_pixels=len(per_pixel_ogcds),
        reference_ogcd=reference_ogcd,
        level255_mean_ogcd=float(at_255.mean()),
        level255_std_ogcd=float(at_255.std()),
        max_gap=float(gaps[worst_level]),
        max_gap_level=int(worst_level),
    )
