"""Animation playback on a calibrated 8x8 display (four chained modules).

Calibrates all 64 pixels, then plays the bundled animations at 10 fps and
prints each frame's settled fraction plus an ASCII view of a few frames.
"""

from grasslab import DEFAULT_OPTICS, ENVIRONMENT_PRESETS, CameraConfig, GrayCardBoard
from grasslab.appearance import auto_expose
from grasslab.assets import load_bundled
from grasslab.calibration import calibrate_multi, sample_characteristic
from grasslab.display import assemble, make_module, play

env = ENVIRONMENT_PRESETS["iso"]
cam = auto_expose(GrayCardBoard(), env, CameraConfig(viewpoint_angle_deg=0.0))

modules = [make_module(m, DEFAULT_OPTICS) for m in range(4)]
chars = {}
for module in modules:
    for pixel in module.pixels:
        chars[pixel.pixel_id] = sample_characteristic(pixel, env, cam)
cal = calibrate_multi(chars, environment_name="iso")
display = assemble(modules, cal)
for module in modules:
    for pixel in module.pixels:
        pixel.home()
print(f"display {display.width}x{display.height}, reference {cal.reference_ogcd:.2f}")

SHADES = " .:-=+*#%@"


def ascii_frame(frame):
    rows = []
    for r in range(frame.height):
        rows.append("".join(SHADES[frame.level_at(r, c) * (len(SHADES) - 1) // 255] for c in range(frame.width)))
    return "\n".join(rows)


for name in ("wave", "heart", "green"):
    anim = load_bundled(name)
    report = play(display, anim)
    print(
        f"\n{name}: {len(anim.frames)} frames at {anim.fps} fps, "
        f"min settled fraction {min(report.settled_fraction):.3f}"
    )
    mid = anim.frames[len(anim.frames) // 2]
    print(ascii_frame(mid))
