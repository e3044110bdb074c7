"""Bundled demo animations: wave, heart path, and a "GREEN" text scroll.

Each asset has a deterministic generator; the .anim files shipped with the
package are byte-identical to the generator output (a test enforces it).
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .display import Animation, Frame, load_animation

__all__ = [
    "BUNDLED_ANIMATIONS",
    "wave_animation",
    "heart_animation",
    "green_text_animation",
    "generate_bundled",
    "load_bundled",
]


def wave_animation(width: int = 8, height: int = 8, fps: int = 10, n_frames: int = 40) -> Animation:
    """Diagonal sine wave flowing from the lower left to the upper right."""
    frames = []
    for i in range(n_frames):
        levels = np.empty((height, width), dtype=np.uint8)
        for row in range(height):
            for col in range(width):
                # diagonal coordinate grows toward the upper right
                diag = (col + (height - 1 - row)) / (width + height - 2)
                phase = 2.0 * math.pi * (diag - i / n_frames)
                levels[row, col] = int(round(127.5 * (1.0 + math.sin(phase))))
        frames.append(Frame.from_array(levels))
    return Animation(fps=fps, frames=tuple(frames))


# Closed outline of a heart on an 8x8 grid, drawn clockwise from the tip.
_HEART_PATH = (
    (6, 3), (5, 2), (4, 1), (3, 0), (2, 0), (1, 0), (0, 1), (0, 2), (1, 3),
    (1, 4), (0, 5), (0, 6), (1, 7), (2, 7), (3, 7), (4, 6), (5, 5), (6, 4),
)


def heart_animation(fps: int = 10) -> Animation:
    """Path animation: trace the heart outline, hold it, then fade out."""
    frames = []
    canvas = np.zeros((8, 8), dtype=np.uint8)
    for row, col in _HEART_PATH:
        canvas[row, col] = 255
        frames.append(Frame.from_array(canvas.copy()))
    for _ in range(4):
        frames.append(Frame.from_array(canvas.copy()))
    for k in (3, 2, 1, 0):
        frames.append(Frame.from_array((canvas.astype(int) * k // 4).astype(np.uint8)))
    return Animation(fps=fps, frames=tuple(frames))


_GLYPHS = {
    "G": ("XXX", "X..", "X.X", "X.X", "XXX"),
    "R": ("XX.", "X.X", "XX.", "X.X", "X.X"),
    "E": ("XXX", "X..", "XX.", "X..", "XXX"),
    "N": ("X.X", "XXX", "X.X", "X.X", "X.X"),
}


def green_text_animation(fps: int = 10) -> Animation:
    """Text animation: "GREEN" scrolling right to left across 8x8."""
    text = "GREEN"
    glyph_w, glyph_h = 3, 5
    strip_w = 8 + len(text) * (glyph_w + 1) + 8
    strip = np.zeros((8, strip_w), dtype=np.uint8)
    top = 1
    for k, ch in enumerate(text):
        x0 = 8 + k * (glyph_w + 1)
        for r, line in enumerate(_GLYPHS[ch]):
            for c, mark in enumerate(line):
                if mark == "X":
                    strip[top + r, x0 + c] = 255
    frames = [
        Frame.from_array(strip[:, off : off + 8]) for off in range(strip_w - 8 + 1)
    ]
    return Animation(fps=fps, frames=tuple(frames))


BUNDLED_ANIMATIONS = {
    "wave": wave_animation,
    "heart": heart_animation,
    "green": green_text_animation,
}


def load_bundled(name: str) -> Animation:
    """Load one of the packaged .anim assets by name."""
    if name not in BUNDLED_ANIMATIONS:
        raise KeyError(f"unknown bundled animation {name!r}; have {sorted(BUNDLED_ANIMATIONS)}")
    ref = resources.files("grasslab").joinpath(f"assets/{name}.anim")
    with resources.as_file(ref) as path:
        return load_animation(path)


def generate_bundled(directory) -> None:
    """Regenerate the packaged asset files (used at build time and in tests)."""
    from pathlib import Path

    from .display import save_animation

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, generator in BUNDLED_ANIMATIONS.items():
        save_animation(out / f"{name}.anim", generator())
