"""Chained grass modules driven by 8-bit frames through per-pixel tables.

A module is a 2x8 block of pixels; chaining extends the display width only
(two columns per module, height fixed at 8). Frames map (row, col) to
module col // 2, and within a module to pixel index row * 2 + (col % 2).

Animations are stored in a plain binary container: little-endian u16 width,
u16 height, u8 fps, u32 frame count, then raw frames (row-major 8-bit
levels). Frame cadence is quantized to the 1 ms control tick.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .appearance import GrassOptics
from .calibration import CalibrationSet, CorrespondenceTable, apply_table
from .motor import CONTROL_TICK_S, DrivetrainParams, PdGains
from .pixel import PixelSim, make_pixel

__all__ = [
    "MODULE_WIDTH",
    "MODULE_HEIGHT",
    "PLAYBACK_SETTLE_TOL_COUNTS",
    "GrassModule",
    "Display",
    "Frame",
    "Animation",
    "PlaybackReport",
    "AssemblyError",
    "FrameError",
    "assemble",
    "present",
    "play",
    "save_animation",
    "load_animation",
    "frames_from_pgm_sequence",
]

MODULE_WIDTH = 2
MODULE_HEIGHT = 8
MODULE_PIXELS = MODULE_WIDTH * MODULE_HEIGHT

# A pixel counts as settled when its encoder is within this band of the
# setpoint at the end of the frame budget.
PLAYBACK_SETTLE_TOL_COUNTS = 2

_ANIM_MAGIC_FPS_MAX = 10
_HEADER = struct.Struct("<HHBI")


class AssemblyError(ValueError):
    """Display assembly failed (module/table mismatch)."""


class FrameError(ValueError):
    """Frame does not match the display."""


@dataclass
class GrassModule:
    """One 2x8 hardware block of pixels."""

    module_id: int
    pixels: list[PixelSim]

    def __post_init__(self) -> None:
        if len(self.pixels) != MODULE_PIXELS:
            raise AssemblyError(
                f"module {self.module_id} needs {MODULE_PIXELS} pixels, got {len(self.pixels)}"
            )


def make_module(
    module_id: int,
    base_optics: GrassOptics,
    drivetrain: DrivetrainParams | None = None,
    gains: PdGains | None = None,
) -> GrassModule:
    """Build a module whose pixels get globally unique seeded ids."""
    first = module_id * MODULE_PIXELS
    pixels = [
        make_pixel(first + i, base_optics, drivetrain=drivetrain, gains=gains)
        for i in range(MODULE_PIXELS)
    ]
    return GrassModule(module_id=module_id, pixels=pixels)


@dataclass(frozen=True)
class Frame:
    """One 8-bit grayscale frame, row-major."""

    width: int
    height: int
    levels: bytes

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise FrameError("frame dimensions must be positive")
        if len(self.levels) != self.width * self.height:
            raise FrameError(
                f"expected {self.width * self.height} levels, got {len(self.levels)}"
            )

    @classmethod
    def from_array(cls, levels) -> "Frame":
        arr = np.asarray(levels)
        if arr.ndim != 2:
            raise FrameError("level array must be 2-D")
        if arr.min() < 0 or arr.max() > 255:
            raise FrameError("levels must be in 0..255")
        return cls(width=arr.shape[1], height=arr.shape[0], levels=arr.astype(np.uint8).tobytes())

    def level_at(self, row: int, col: int) -> int:
        return self.levels[row * self.width + col]

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.levels, dtype=np.uint8).reshape(self.height, self.width)


@dataclass(frozen=True)
class Animation:
    fps: int
    frames: tuple[Frame, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.fps <= _ANIM_MAGIC_FPS_MAX:
            raise ValueError(f"fps must be in 1..{_ANIM_MAGIC_FPS_MAX} (validated maximum)")
        if not self.frames:
            raise ValueError("animation needs at least one frame")
        w, h = self.frames[0].width, self.frames[0].height
        for f in self.frames:
            if (f.width, f.height) != (w, h):
                raise ValueError("all frames must share one size")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


@dataclass
class Display:
    """Chained modules with one correspondence table per pixel."""

    modules: list[GrassModule]
    tables: dict[int, CorrespondenceTable]
    clock_ticks: int = 0

    @property
    def width(self) -> int:
        return MODULE_WIDTH * len(self.modules)

    @property
    def height(self) -> int:
        return MODULE_HEIGHT

    def pixel_at(self, row: int, col: int) -> PixelSim:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise FrameError(f"pixel ({row}, {col}) outside {self.width}x{self.height}")
        module = self.modules[col // MODULE_WIDTH]
        return module.pixels[row * MODULE_WIDTH + (col % MODULE_WIDTH)]

    def iter_pixels(self):
        for row in range(self.height):
            for col in range(self.width):
                yield row, col, self.pixel_at(row, col)


def assemble(modules: list[GrassModule], tables: CalibrationSet | dict[int, CorrespondenceTable]) -> Display:
    """Wire modules and per-pixel tables into a display."""
    if not modules:
        raise AssemblyError("at least one module is required")
    if isinstance(tables, CalibrationSet):
        table_map = {pid: pc.table for pid, pc in tables.pixels.items()}
    else:
        table_map = dict(tables)
    pixel_ids = [p.pixel_id for m in modules for p in m.pixels]
    missing = [pid for pid in pixel_ids if pid not in table_map]
    if missing:
        raise AssemblyError(f"missing tables for pixels {missing}")
    return Display(modules=list(modules), tables=table_map)


def present(display: Display, frame: Frame, dt_budget: float) -> np.ndarray:
    """Apply one frame and run the PD loops for the budget.

    Returns a (height, width) boolean array of pixels whose encoder is
    within the playback tolerance of its setpoint when the budget ends.
    """
    if (frame.width, frame.height) != (display.width, display.height):
        raise FrameError(
            f"frame {frame.width}x{frame.height} does not match "
            f"display {display.width}x{display.height}"
        )
    if dt_budget <= 0:
        raise ValueError("dt_budget must be > 0")
    for row, col, pixel in display.iter_pixels():
        level = frame.level_at(row, col)
        pixel.level = level
        pixel.set_setpoint(apply_table(display.tables[pixel.pixel_id], level, pixel.params))
    ticks = max(1, int(round(dt_budget / CONTROL_TICK_S)))
    for _ in range(ticks):
        for _, _, pixel in display.iter_pixels():
            pixel.step()
    display.clock_ticks += ticks
    settled = np.zeros((display.height, display.width), dtype=bool)
    for row, col, pixel in display.iter_pixels():
        err = abs(pixel.setpoint.target_count - pixel.motor.position_count)
        settled[row, col] = err <= PLAYBACK_SETTLE_TOL_COUNTS
    return settled


@dataclass(frozen=True)
class PlaybackReport:
    fps: int
    frame_period_ticks: int
    settled_fraction: tuple[float, ...]
    frame_start_ticks: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "fps": self.fps,
            "frame_period_ticks": self.frame_period_ticks,
            "settled_fraction": list(self.settled_fraction),
            "frame_start_ticks": list(self.frame_start_ticks),
        }


def play(display: Display, anim: Animation) -> PlaybackReport:
    """Present every frame at fixed cadence; report per-frame settling.

    Frames are never dropped; pixels that lag a frame are simply reported
    unsettled for that frame.
    """
    period_ticks = max(1, int(round(1.0 / anim.fps / CONTROL_TICK_S)))
    fractions = []
    starts = []
    for frame in anim.frames:
        starts.append(display.clock_ticks)
        settled = present(display, frame, period_ticks * CONTROL_TICK_S)
        fractions.append(float(settled.mean()))
    return PlaybackReport(
        fps=anim.fps,
        frame_period_ticks=period_ticks,
        settled_fraction=tuple(fractions),
        frame_start_ticks=tuple(starts),
    )


def save_animation(path, anim: Animation) -> None:
    """Write the binary animation container (bit-exact layout)."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(anim.width, anim.height, anim.fps, len(anim.frames)))
        for frame in anim.frames:
            fh.write(frame.levels)


def load_animation(path) -> Animation:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ValueError("truncated animation header")
    width, height, fps, count = _HEADER.unpack_from(data)
    frame_bytes = width * height
    expected = _HEADER.size + count * frame_bytes
    if len(data) != expected:
        raise ValueError(f"expected {expected} bytes, got {len(data)}")
    frames = []
    for i in range(count):
        start = _HEADER.size + i * frame_bytes
        frames.append(Frame(width=width, height=height, levels=data[start : start + frame_bytes]))
    return Animation(fps=fps, frames=tuple(frames))


def frames_from_pgm_sequence(paths, fps: int) -> Animation:
    """Converter stub: build an animation from 8-bit binary PGM (P5) files."""
    frames = []
    for path in paths:
        with open(path, "rb") as fh:
            data = fh.read()
        fields: list[bytes] = []
        i = 0
        while len(fields) < 4:
            while i < len(data) and data[i : i + 1].isspace():
                i += 1
            if data[i : i + 1] == b"#":
                while i < len(data) and data[i] != 0x0A:
                    i += 1
                continue
            start = i
            while i < len(data) and not data[i : i + 1].isspace():
                i += 1
            fields.append(data[start:i])
        i += 1
        if fields[0] != b"P5" or int(fields[3]) != 255:
            raise ValueError(f"{path}: expected 8-bit binary PGM")
        w, h = int(fields[1]), int(fields[2])
        frames.append(Frame(width=w, height=h, levels=data[i : i + w * h]))
    return Animation(fps=fps, frames=tuple(frames))
