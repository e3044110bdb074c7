"""Per-pixel 8-bit calibration: sample, fit, and invert the color response.

The pipeline mirrors a display gamma calibration. For one pixel: measure the
color difference from the zero-length color (OGCD) at ~1 mm length steps,
fit a sixth-order polynomial, then invert it so that level L targets
(L/255) * reference on the fitted curve. Across pixels, the shared reference
is the full-travel OGCD of the pixel with the smallest range, so every pixel
can reach it.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .appearance import CameraConfig, Environment, measure_grass_color
from .color import Lab, ciede2000
from .motor import DrivetrainParams, Setpoint, mm_to_count
from .pixel import PixelSim, SettleParams

__all__ = [
    "CharacteristicSample",
    "OgcdCharacteristic",
    "CorrespondenceTable",
    "CalibrationWarning",
    "CalibrationSet",
    "DegenerateCharacteristicError",
    "UnreachableReferenceError",
    "FIT_DEGREE",
    "sample_characteristic",
    "fit_characteristic",
    "build_table",
    "calibrate_multi",
    "apply_table",
]

FIT_DEGREE = 6
MAX_LENGTH_MM = 20.0

# Characteristics whose full-travel color change is below this are unusable:
# no meaningful level resolution exists inside the range.
_DEGENERATE_RANGE = 0.5

_INVERT_GRID_POINTS = 4001
# Tight enough that the residual inversion slack (in counts) stays inside
# mm_to_count's representation guard, so boundary-exact targets quantize
# to the intended count.
_INVERT_TOL_MM = 1e-12


class DegenerateCharacteristicError(ValueError):
    """The pixel's color does not change enough over its travel."""


class UnreachableReferenceError(ValueError):
    """Requested reference OGCD exceeds what the characteristic reaches."""


@dataclass(frozen=True)
class CharacteristicSample:
    length_mm: float
    lab: Lab
    ogcd: float


@dataclass(frozen=True)
class OgcdCharacteristic:
    """Sampled color-difference curve and its sixth-order fit.

    coeffs are ascending powers of length in mm (7 values for degree 6).
    """

    samples: tuple[CharacteristicSample, ...]
    coeffs: tuple[float, ...]
    fit_residual_rms: float

    def __post_init__(self) -> None:
        lengths = [s.length_mm for s in self.samples]
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("samples must be strictly increasing in length")
        if len(self.coeffs) != FIT_DEGREE + 1:
            raise ValueError(f"expected {FIT_DEGREE + 1} coefficients")

    def ogcd_at(self, length_mm) -> float | np.ndarray:
        return np.polynomial.polynomial.polyval(length_mm, np.asarray(self.coeffs))

    @property
    def range_ogcd(self) -> float:
        """Full-travel OGCD; the zero-length value is zero by construction."""
        return float(self.ogcd_at(MAX_LENGTH_MM))


@dataclass(frozen=True)
class CorrespondenceTable:
    """Grass length for each 8-bit level, plus the level-255 target."""

    lengths_mm: tuple[float, ...]
    reference_ogcd: float

    def __post_init__(self) -> None:
        if len(self.lengths_mm) != 256:
            raise ValueError("table must have 256 entries")
        if self.lengths_mm[0] != 0.0:
            raise ValueError("level 0 must map to length 0")
        if any(b < a for a, b in zip(self.lengths_mm, self.lengths_mm[1:])):
            raise ValueError("table lengths must be non-decreasing")
        if self.lengths_mm[-1] > MAX_LENGTH_MM + 1e-9:
            raise ValueError("table lengths must stay within travel")


@dataclass(frozen=True)
class CalibrationWarning:
    pixel_id: int
    message: str


@dataclass(frozen=True)
class PixelCalibration:
    characteristic: OgcdCharacteristic
    table: CorrespondenceTable


@dataclass(frozen=True)
class CalibrationSet:
    """Calibration results for a set of pixels sharing one reference OGCD."""

    pixels: dict[int, PixelCalibration]
    reference_pixel_id: int
    reference_ogcd: float
    environment_name: str = ""
    viewpoint_angle_deg: float = 0.0
    created_at: str = ""
    warnings: tuple[CalibrationWarning, ...] = ()


def fit_characteristic(
    lengths_mm: np.ndarray, labs: list[Lab], ogcds: np.ndarray
) -> OgcdCharacteristic:
    """Degree-6 least-squares fit of OGCD against length, anchored at zero.

    OGCD at length 0 is zero by definition, so the fit is constrained
    through the origin (every basis polynomial vanishes there); that keeps
    the inverted table's level-0 target exact. Solved via normal equations
    with lengths rescaled to [-1, 1] for conditioning; coefficients are
    converted back to the mm domain.
    """
    x = np.asarray(lengths_mm, dtype=float)
    y = np.asarray(ogcds, dtype=float)
    u = (x - MAX_LENGTH_MM / 2.0) / (MAX_LENGTH_MM / 2.0)
    # basis (u + 1) * u^k, k = 0..5: degree 6 with a root at u = -1 (x = 0)
    base = np.vander(u, FIT_DEGREE, increasing=True) * (u + 1.0)[:, None]
    b = np.linalg.solve(base.T @ base, base.T @ y)
    coeffs_u = np.convolve(b, [1.0, 1.0])  # multiply by (1 + u), ascending
    fitted = np.polynomial.Polynomial(coeffs_u, domain=[0.0, MAX_LENGTH_MM], window=[-1.0, 1.0])
    coeffs = fitted.convert().coef
    if len(coeffs) < FIT_DEGREE + 1:  # trailing zeros trimmed by convert()
        coeffs = np.pad(coeffs, (0, FIT_DEGREE + 1 - len(coeffs)))
    coeffs[0] = 0.0  # exact by construction; scrub conversion round-off
    residual = float(np.sqrt(np.mean((base @ b - y) ** 2)))
    samples = tuple(
        CharacteristicSample(float(xi), lab, float(yi)) for xi, lab, yi in zip(x, labs, y)
    )
    return OgcdCharacteristic(samples=samples, coeffs=tuple(coeffs), fit_residual_rms=residual)


def sample_characteristic(
    pixel: PixelSim,
    env: Environment,
    cam: CameraConfig,
    step_mm: float = 1.0,
    settle: SettleParams = SettleParams(),
) -> OgcdCharacteristic:
    """Sweep the pixel upward through its travel and fit the measured OGCDs.

    The pixel must be homed and the camera already exposed. Each sample
    waits for the PD loop to settle, captures an image, and measures the
    cropped mean color; OGCD is taken against the length-0 color.
    """
    if not pixel.motor.homed:
        raise RuntimeError(f"pixel {pixel.pixel_id} must be homed before sampling")
    if step_mm <= 0:
        raise ValueError("step_mm must be > 0")
    lengths = np.arange(0.0, MAX_LENGTH_MM + step_mm / 2.0, step_mm)
    if lengths[-1] < MAX_LENGTH_MM:
        lengths = np.append(lengths, MAX_LENGTH_MM)
    labs: list[Lab] = []
    for length in lengths:
        sp = Setpoint(mm_to_count(float(length), pixel.params))
        pixel.move_and_settle(sp, settle)
        image = pixel.capture(env, cam)
        labs.append(measure_grass_color(image, cam.crop_rect))
    ogcds = np.array([ciede2000(labs[0], lab) for lab in labs])
    return fit_characteristic(lengths, labs, ogcds)


def _monotone_envelope(char: OgcdCharacteristic) -> tuple[np.ndarray, np.ndarray]:
    xs = np.linspace(0.0, MAX_LENGTH_MM, _INVERT_GRID_POINTS)
    ys = np.asarray(char.ogcd_at(xs), dtype=float)
    return xs, np.maximum.accumulate(ys)


def _first_crossing(char: OgcdCharacteristic, xs, envelope, target: float) -> float:
    """Smallest length where the fitted curve first reaches the target."""
    if target <= envelope[0]:
        return 0.0
    idx = int(np.searchsorted(envelope, target))
    if idx >= len(xs):
        raise UnreachableReferenceError(
            f"target {target:.3f} above reachable maximum {envelope[-1]:.3f}"
        )
    lo, hi = xs[idx - 1], xs[idx]
    # The envelope rises across this cell, so the polynomial itself crosses
    # the target here; bisect the polynomial directly.
    f = lambda x: float(char.ogcd_at(x)) - target
    f_lo = f(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if hi - lo < _INVERT_TOL_MM:
            break
        if (f(mid) < 0.0) == (f_lo < 0.0):
            lo = mid
            f_lo = f(lo)
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def build_table(char: OgcdCharacteristic, reference_ogcd: float) -> CorrespondenceTable:
    """Invert the fitted characteristic into a 256-entry level-to-length map.

    Level L targets (L/255) * reference_ogcd; each entry is the smallest
    length where the fitted curve reaches the target (bisection on the
    fit's monotone envelope), then monotonicity is enforced.
    """
    span = char.range_ogcd
    if span < _DEGENERATE_RANGE:
        raise DegenerateCharacteristicError(
            f"OGCD range {span:.3f} below usable minimum {_DEGENERATE_RANGE}"
        )
    xs, envelope = _monotone_envelope(char)
    if reference_ogcd > envelope[-1] + 1e-9:
        raise UnreachableReferenceError(
            f"reference {reference_ogcd:.3f} exceeds reachable {envelope[-1]:.3f}"
        )
    lengths = np.empty(256)
    lengths[0] = 0.0
    for level in range(1, 256):
        target = (level / 255.0) * reference_ogcd
        lengths[level] = _first_crossing(char, xs, envelope, min(target, envelope[-1]))
    lengths = np.minimum(np.maximum.accumulate(lengths), MAX_LENGTH_MM)
    return CorrespondenceTable(lengths_mm=tuple(float(v) for v in lengths), reference_ogcd=reference_ogcd)


def calibrate_multi(
    characteristics: dict[int, OgcdCharacteristic],
    environment_name: str = "",
    viewpoint_angle_deg: float = 0.0,
    reference_ogcd: float | None = None,
) -> CalibrationSet:
    """Build per-pixel tables sharing the smallest-range pixel's reference.

    The reference OGCD is the full-travel OGCD of the pixel with the
    smallest range (ties broken by pixel id); passing reference_ogcd reuses
    a reference from an earlier calibration instead. Pixels that cannot
    reach the reference get a table clamped at full travel plus a warning
    record.
    """
    if not characteristics:
        raise ValueError("at least one sampled pixel is required")
    ranges = {pid: char.range_ogcd for pid, char in characteristics.items()}
    reference_pixel_id = min(ranges, key=lambda pid: (ranges[pid], pid))
    reference = ranges[reference_pixel_id] if reference_ogcd is None else reference_ogcd
    pixels: dict[int, PixelCalibration] = {}
    warnings: list[CalibrationWarning] = []
    for pid in sorted(characteristics):
        char = characteristics[pid]
        try:
            table = build_table(char, reference)
        except UnreachableReferenceError as exc:
            warnings.append(
                CalibrationWarning(pixel_id=pid, message=f"clamped at full travel: {exc}")
            )
            _, envelope = _monotone_envelope(char)
            table = build_table(char, float(envelope[-1]))
            table = CorrespondenceTable(lengths_mm=table.lengths_mm, reference_ogcd=reference)
        pixels[pid] = PixelCalibration(characteristic=char, table=table)
    return CalibrationSet(
        pixels=pixels,
        reference_pixel_id=reference_pixel_id,
        reference_ogcd=reference,
        environment_name=environment_name,
        viewpoint_angle_deg=viewpoint_angle_deg,
        created_at=time.strftime("%Y-%m-%dT%H:%M:%S"),
        warnings=tuple(warnings),
    )


def apply_table(
    table: CorrespondenceTable, level: int, params: DrivetrainParams | None = None
) -> Setpoint:
    """Map an 8-bit level to a motor setpoint through the table.

    Adjacent levels whose lengths differ by less than one encoder step
    collide onto the same count; that is the drivetrain's quantization
    limit, not a table defect.
    """
    if not 0 <= level <= 255:
        raise ValueError(f"level {level} outside 0..255")
    return Setpoint(mm_to_count(table.lengths_mm[level], params or DrivetrainParams()))


# ---------------------------------------------------------------------------
# serialization

_SCHEMA = "grasslab-calibration/1"


def calibration_to_dict(cal: CalibrationSet) -> dict:
    return {
        "schema": _SCHEMA,
        "reference_pixel_id": cal.reference_pixel_id,
        "reference_ogcd": cal.reference_ogcd,
        "environment": cal.environment_name,
        "viewpoint_angle_deg": cal.viewpoint_angle_deg,
        "created_at": cal.created_at,
        "warnings": [{"pixel_id": w.pixel_id, "message": w.message} for w in cal.warnings],
        "pixels": {
            str(pid): {
                "samples": [
                    {
                        "length_mm": s.length_mm,
                        "lab": list(s.lab.as_tuple()),
                        "ogcd": s.ogcd,
                    }
                    for s in pc.characteristic.samples
                ],
                "coeffs": list(pc.characteristic.coeffs),
                "fit_residual_rms": pc.characteristic.fit_residual_rms,
                "lengths_mm": list(pc.table.lengths_mm),
                "table_reference_ogcd": pc.table.reference_ogcd,
            }
            for pid, pc in cal.pixels.items()
        },
    }


def calibration_from_dict(data: dict) -> CalibrationSet:
    if data.get("schema") != _SCHEMA:
        raise ValueError(f"unsupported calibration schema: {data.get('schema')!r}")
    pixels = {}
    for pid_str, entry in data["pixels"].items():
        samples = tuple(
            CharacteristicSample(
                length_mm=s["length_mm"],
                lab=Lab(*s["lab"]),
                ogcd=s["ogcd"],
            )
            for s in entry["samples"]
        )
        char = OgcdCharacteristic(
            samples=samples,
            coeffs=tuple(entry["coeffs"]),
            fit_residual_rms=entry["fit_residual_rms"],
        )
        table = CorrespondenceTable(
            lengths_mm=tuple(entry["lengths_mm"]),
            reference_ogcd=entry["table_reference_ogcd"],
        )
        pixels[int(pid_str)] = PixelCalibration(characteristic=char, table=table)
    return CalibrationSet(
        pixels=pixels,
        reference_pixel_id=data["reference_pixel_id"],
        reference_ogcd=data["reference_ogcd"],
        environment_name=data.get("environment", ""),
        viewpoint_angle_deg=data.get("viewpoint_angle_deg", 0.0),
        created_at=data.get("created_at", ""),
        warnings=tuple(
            CalibrationWarning(w["pixel_id"], w["message"]) for w in data.get("warnings", ())
        ),
    )


def save_calibration(cal: CalibrationSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(calibration_to_dict(cal), fh, indent=1)
        fh.write("\n")


def load_calibration(path) -> CalibrationSet:
    with open(path) as fh:
        return calibration_from_dict(json.load(fh))
