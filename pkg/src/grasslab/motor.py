"""Single-pin drivetrain simulation: DC motor, lead screw, encoder, PD loop.

Counts are the native unit: the rotary encoder resolves 10/73 mm/count, so
full travel (20 mm) spans counts 0..146. The motor is a first-order velocity
lag toward a PWM-proportional speed; the discrete PD controller runs on a
fixed 1 ms tick and uses the per-tick backward difference of the error for
its derivative term (embedded-style gains, matching the default P=6, D=10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "DrivetrainParams",
    "PdGains",
    "MotorState",
    "Setpoint",
    "RampResult",
    "HomingError",
    "CONTROL_TICK_S",
    "mm_to_count",
    "count_to_mm",
    "pd_step",
    "home",
    "ramp_tracking_test",
    "write_trace_csv",
]

# Fixed control-loop period; frame cadence is layered on top of this.
CONTROL_TICK_S = 0.001

# Guard against representation error when a length sits exactly on a count
# boundary (e.g. count * (10/73) * 7.3); well below the encoder resolution.
_COUNT_EPS = 1e-9


class HomingError(RuntimeError):
    """Raised when the virtual limit switch never triggers."""


@dataclass(frozen=True)
class DrivetrainParams:
    """Mechanical and electrical constants of one grass-pin drivetrain."""

    lead_mm_per_rev: float = 6.0
    encoder_resolution_mm_per_count: float = 10.0 / 73.0
    gain_count_per_mm: float = 7.3
    max_length_mm: float = 20.0
    # First-order motor model: steady-state speed is proportional to PWM,
    # reaching no_load_speed at |pwm| = 255 with time constant tau. Defaults
    # place the ramp-tracking pass/fail boundary between 10 and 11 fps.
    no_load_speed_counts_per_s: float = 12000.0
    time_constant_s: float = 0.005

    def __post_init__(self) -> None:
        if abs(self.gain_count_per_mm * self.encoder_resolution_mm_per_count - 1.0) > 1e-9:
            raise ValueError("gain must be the reciprocal of the encoder resolution")
        if self.max_length_mm <= 0:
            raise ValueError("max_length_mm must be > 0")
        if self.no_load_speed_counts_per_s < 0 or self.time_constant_s <= 0:
            raise ValueError("invalid motor model parameters")

    @property
    def max_count(self) -> int:
        return int(math.floor(self.max_length_mm * self.gain_count_per_mm + _COUNT_EPS))


@dataclass(frozen=True)
class PdGains:
    p: float = 6.0
    d: float = 10.0

    def __post_init__(self) -> None:
        if self.p <= 0:
            raise ValueError("p must be > 0")
        if self.d < 0:
            raise ValueError("d must be >= 0")


def mm_to_count(length: float, params: DrivetrainParams) -> int:
    """Convert a grass length to an encoder count, truncating toward zero.

    Lengths closer than one encoder step (10/73 mm) can collide onto the
    same count; that quantization is inherent to the drivetrain.
    """
    if not 0.0 <= length <= params.max_length_mm + _COUNT_EPS:
        raise ValueError(f"length {length!r} outside [0, {params.max_length_mm}] mm")
    return int(math.floor(length * params.gain_count_per_mm + _COUNT_EPS))


def count_to_mm(count: int, params: DrivetrainParams) -> float:
    if not 0 <= count <= params.max_count:
        raise ValueError(f"count {count!r} outside [0, {params.max_count}]")
    return count * params.encoder_resolution_mm_per_count


@dataclass(frozen=True)
class Setpoint:
    """Target encoder count inside the homed travel range."""

    target_count: int

    def __post_init__(self) -> None:
        if not isinstance(self.target_count, int):
            object.__setattr__(self, "target_count", int(self.target_count))
        if not 0 <= self.target_count <= 146:
            raise ValueError(f"setpoint {self.target_count} outside [0, 146]")


@dataclass
class MotorState:
    """Observable and physical state of one drivetrain.

    position_count is the quantized encoder reading; shaft_counts is the
    continuous shaft position in count units (the physical truth the
    encoder quantizes and the camera sees).
    """

    params: DrivetrainParams = field(default_factory=DrivetrainParams)
    position_count: int = 0
    velocity_counts_per_s: float = 0.0
    pwm: int = 0
    homed: bool = False
    shaft_counts: float = 0.0
    prev_error: int = 0

    @property
    def length_mm(self) -> float:
        """Encoder-derived length (quantized)."""
        return self.position_count * self.params.encoder_resolution_mm_per_count

    @property
    def true_length_mm(self) -> float:
        """Continuous physical length, before encoder quantization."""
        return self.shaft_counts * self.params.encoder_resolution_mm_per_count


def _encoder_read(shaft_counts: float, max_count: int) -> int:
    # Nearest-count quantization: each count owns a half-count band on either
    # side, so every setpoint (including the travel ends) has an interior
    # capture band the loop can park in without chattering on a count edge.
    c = int(math.floor(shaft_counts + 0.5))
    return max(0, min(max_count, c))


def _integrate(state: MotorState, pwm: int, dt: float) -> None:
    p = state.params
    k = p.no_load_speed_counts_per_s / 255.0
    target_v = k * pwm
    # Exact discretization of v' = (k*pwm - v) / tau over one tick.
    alpha = 1.0 - math.exp(-dt / p.time_constant_s)
    state.velocity_counts_per_s += (target_v - state.velocity_counts_per_s) * alpha
    state.shaft_counts += state.velocity_counts_per_s * dt
    # Mechanical stops at both ends of the travel.
    if state.shaft_counts <= 0.0:
        state.shaft_counts = 0.0
        state.velocity_counts_per_s = 0.0
    elif state.shaft_counts >= p.max_count:
        state.shaft_counts = float(p.max_count)
        state.velocity_counts_per_s = 0.0
    state.pwm = pwm
    state.position_count = _encoder_read(state.shaft_counts, p.max_count)


def pd_step(state: MotorState, sp: Setpoint, gains: PdGains, dt: float = CONTROL_TICK_S) -> MotorState:
    """Advance the PD loop and motor physics by one control tick.

    The state is updated in place and returned. PWM is the clamped, rounded
    PD output; the derivative acts on the per-tick error difference.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not state.homed:
        raise RuntimeError("motor must be homed before closed-loop control")
    error = sp.target_count - state.position_count
    u = gains.p * error + gains.d * (error - state.prev_error)
    pwm = int(round(u))
    pwm = max(-255, min(255, pwm))
    state.prev_error = error
    _integrate(state, pwm, dt)
    return state


def home(state: MotorState, timeout_s: float = 5.0, dt: float = CONTROL_TICK_S) -> MotorState:
    """Drive toward the limit switch at length 0; zero the count on trigger."""
    t = 0.0
    while t < timeout_s:
        if state.shaft_counts <= 0.0:
            state.shaft_counts = 0.0
            state.position_count = 0
            state.velocity_counts_per_s = 0.0
            state.pwm = 0
            state.prev_error = 0
            state.homed = True
            return state
        _integrate(state, -255, dt)
        t += dt
    raise HomingError(f"limit switch not reached within {timeout_s} s")


@dataclass(frozen=True)
class RampResult:
    """Outcome of a linear-setpoint tracking run at one frame rate."""

    fps: int
    passed: bool
    max_abs_error: int
    tolerance_counts: int
    trace: tuple[tuple[float, int, int, int], ...]  # (t_s, sp, pv, pwm)


def ramp_tracking_test(
    state: MotorState,
    fps: int,
    gains: PdGains | None = None,
    tolerance_counts: int = 5,
    dt: float = CONTROL_TICK_S,
) -> RampResult:
    """Sweep the setpoint linearly 0 -> 146 counts in 1/fps seconds.

    Passes iff the encoder count stays within the tolerance band of the
    setpoint for the entire ramp. The full sweep completing inside one
    frame period is what lets the display change any pixel arbitrarily
    between consecutive frames.
    """
    if fps < 1:
        raise ValueError("fps must be >= 1")
    if not state.homed:
        raise RuntimeError("pixel must be homed before the tracking test")
    gains = gains or PdGains()
    max_count = state.params.max_count
    n_ticks = int(math.ceil(1.0 / (fps * dt)))
    trace: list[tuple[float, int, int, int]] = []
    worst = 0
    for i in range(1, n_ticks + 1):
        t = i * dt
        sp_count = min(max_count, int(math.floor(max_count * fps * t + _COUNT_EPS)))
        sp = Setpoint(sp_count)
        pd_step(state, sp, gains, dt)
        err = abs(sp_count - state.position_count)
        worst = max(worst, err)
        trace.append((t, sp_count, state.position_count, state.pwm))
    return RampResult(
        fps=fps,
        passed=worst <= tolerance_counts,
        max_abs_error=worst,
        tolerance_counts=tolerance_counts,
        trace=tuple(trace),
    )


def write_trace_csv(trace, path) -> None:
    """Export a tracking trace as CSV with columns t_s, sp_count, pv_count, pwm."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "sp_count", "pv_count", "pwm"])
        for t, sp, pv, pwm in trace:
            writer.writerow([f"{t:.6f}", sp, pv, pwm])
