"""One simulated grass pixel: drivetrain plus appearance, under a shared clock.

A pixel owns its motor state, PD gains, perturbed optics, and a private
noise stream, so a display can step many pixels independently and
deterministically. The camera sees the continuous shaft position, not the
quantized encoder count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .appearance import CameraConfig, Environment, GrassOptics, render_pixel_surface
from .color import D50, Lab, rgb_to_xyz, xyz_to_lab
from .appearance import mean_surface_color
from .motor import (
    CONTROL_TICK_S,
    DrivetrainParams,
    MotorState,
    PdGains,
    Setpoint,
    home,
    pd_step,
)

__all__ = ["PixelSim", "SettleParams", "SettleTimeout", "make_pixel"]


class SettleTimeout(RuntimeError):
    """Motor did not reach its settling band within the allowed time."""


@dataclass(frozen=True)
class SettleParams:
    """Settling criterion: PV within tolerance of SP for a consecutive run."""

    tolerance_counts: int = 1
    consecutive_ticks: int = 50
    timeout_s: float = 3.0


@dataclass
class PixelSim:
    """Full state of one simulated grass pixel."""

    pixel_id: int
    optics: GrassOptics
    motor: MotorState = field(default_factory=MotorState)
    gains: PdGains = field(default_factory=PdGains)
    setpoint: Setpoint = Setpoint(0)
    level: int = 0
    ticks_run: int = 0
    _noise: np.random.Generator | None = None

    def __post_init__(self) -> None:
        if self._noise is None:
            self._noise = np.random.default_rng(
                np.random.SeedSequence([self.optics.seed, 0xCA, self.pixel_id])
            )

    @property
    def params(self) -> DrivetrainParams:
        return self.motor.params

    @property
    def true_length_mm(self) -> float:
        return self.motor.true_length_mm

    def home(self) -> None:
        home(self.motor)
        self.setpoint = Setpoint(0)

    def set_setpoint(self, sp: Setpoint) -> None:
        self.setpoint = sp

    def step(self, dt: float = CONTROL_TICK_S) -> None:
        pd_step(self.motor, self.setpoint, self.gains, dt)
        self.ticks_run += 1

    def run_ticks(self, n: int, dt: float = CONTROL_TICK_S) -> None:
        for _ in range(n):
            self.step(dt)

    def move_and_settle(self, sp: Setpoint, settle: SettleParams = SettleParams()) -> None:
        """Drive to a setpoint and hold until the settling criterion is met."""
        self.set_setpoint(sp)
        in_band = 0
        max_ticks = int(round(settle.timeout_s / CONTROL_TICK_S))
        for _ in range(max_ticks):
            self.step()
            err = abs(sp.target_count - self.motor.position_count)
            in_band = in_band + 1 if err <= settle.tolerance_counts else 0
            if in_band >= settle.consecutive_ticks:
                return
        raise SettleTimeout(
            f"pixel {self.pixel_id}: not settled at {sp.target_count} counts "
            f"within {settle.timeout_s} s"
        )

    def capture(self, env: Environment, cam: CameraConfig) -> np.ndarray:
        """Render the pixel surface with fresh texture noise from the stream."""
        return render_pixel_surface(self.optics, self.true_length_mm, env, cam, self._noise)

    def preview_lab(self, env: Environment, cam: CameraConfig) -> Lab:
        """Noiseless mean color; does not advance the noise stream."""
        c = mean_surface_color(self.optics, self.true_length_mm, env, cam)
        return xyz_to_lab(rgb_to_xyz(c), D50)


def make_pixel(
    pixel_id: int,
    base_optics: GrassOptics,
    drivetrain: DrivetrainParams | None = None,
    gains: PdGains | None = None,
    homed: bool = True,
) -> PixelSim:
    """Build a pixel with seeded per-pixel optics, optionally pre-homed."""
    pixel = PixelSim(
        pixel_id=pixel_id,
        optics=base_optics.perturbed(pixel_id),
        motor=MotorState(params=drivetrain or DrivetrainParams()),
        gains=gains or PdGains(),
    )
    if homed:
        pixel.home()
    return pixel
