"""Appearance model: what the camera sees as green grass rises.

Plots the green mixing fraction and the resulting color-difference curve
(OGCD: distance from the zero-length color) at four viewing angles. Seen
head-on the curve is strongly S-shaped because the green hides behind the
fixed yellow grass; along the slits it is nearly linear and some green is
visible even at zero length. Also writes rendered surface swatches as
16-bit PPM images.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from grasslab import DEFAULT_OPTICS, ENVIRONMENT_PRESETS, CameraConfig, GrayCardBoard
from grasslab.appearance import auto_expose, ideal_ogcd, mixing_fraction, render_pixel_surface
from grasslab.ppm import write_ppm16

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

env = ENVIRONMENT_PRESETS["iso"]
lengths = np.linspace(0, 20, 81)
angles = (0, 30, 60, 90)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for angle in angles:
    cam = auto_expose(GrayCardBoard(), env, CameraConfig(viewpoint_angle_deg=angle))
    f = [mixing_fraction(DEFAULT_OPTICS, x, angle) for x in lengths]
    og = [ideal_ogcd(DEFAULT_OPTICS, x, env, cam) for x in lengths]
    ax1.plot(lengths, f, label=f"{angle} deg")
    ax2.plot(lengths, og, label=f"{angle} deg")
ax1.set_xlabel("green grass length [mm]")
ax1.set_ylabel("green mixing fraction")
ax1.legend()
ax2.set_xlabel("green grass length [mm]")
ax2.set_ylabel("color difference from 0 mm")
ax2.legend()
fig.tight_layout()
fig.savefig(OUT / "appearance_curves.png", dpi=120)
print(f"wrote {OUT / 'appearance_curves.png'}")

cam = auto_expose(GrayCardBoard(), env, CameraConfig(viewpoint_angle_deg=0.0))
for length in (0.0, 10.0, 20.0):
    img = render_pixel_surface(DEFAULT_OPTICS, length, env, cam)
    path = OUT / f"surface_{int(length):02d}mm.ppm"
    write_ppm16(path, img)
    mean = img.reshape(-1, 3).mean(axis=0)
    print(f"length {length:4.1f} mm -> mean linear RGB {np.round(mean, 3)} -> {path.name}")
