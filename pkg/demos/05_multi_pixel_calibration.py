"""Multi-pixel calibration: one shared target, per-pixel tables.

Eight seeded pixels differ slightly in optics, so their color ranges
differ. The shared reference is the full-travel color difference of the
narrowest pixel; every other pixel reaches that reference short of full
travel. Compare driving all pixels with one shared table versus each
pixel's own table.
"""

import numpy as np

from grasslab import DEFAULT_OPTICS, ENVIRONMENT_PRESETS, CameraConfig, GrayCardBoard
from grasslab.analysis import SWEEP_LEVELS, linear_fit, multi_pixel_stats
from grasslab.appearance import auto_expose, measure_grass_color
from grasslab.calibration import apply_table, calibrate_multi, sample_characteristic
from grasslab.color import ciede2000
from grasslab.pixel import make_pixel

env = ENVIRONMENT_PRESETS["iso"]
cam = auto_expose(GrayCardBoard(), env, CameraConfig(viewpoint_angle_deg=0.0))

pixels = [make_pixel(pid, DEFAULT_OPTICS) for pid in range(8)]
chars = {p.pixel_id: sample_characteristic(p, env, cam) for p in pixels}
for pid, char in chars.items():
    print(f"pixel {pid}: full-travel color difference {char.range_ogcd:5.2f}")

cal = calibrate_multi(chars, environment_name="iso")
print(f"\nreference = {cal.reference_ogcd:.2f} (pixel {cal.reference_pixel_id}, smallest range)")
for pid in sorted(cal.pixels):
    print(f"pixel {pid}: level 255 -> {cal.pixels[pid].table.lengths_mm[255]:5.2f} mm")


def sweep(pixel, table):
    pixel.home()
    out = {}
    lab0 = None
    for level in SWEEP_LEVELS:
        pixel.move_and_settle(apply_table(table, level, pixel.params))
        lab = measure_grass_color(pixel.capture(env, cam), cam.crop_rect)
        lab0 = lab if level == 0 else lab0
        out[level] = ciede2000(lab0, lab)
    return out


shared_table = cal.pixels[cal.reference_pixel_id].table
single = {p.pixel_id: sweep(p, shared_table) for p in pixels}
multi = {p.pixel_id: sweep(p, cal.pixels[p.pixel_id].table) for p in pixels}

xs = [lv for og in single.values() for lv in og]
r2_single = linear_fit(xs, [v for og in single.values() for v in og.values()]).r_squared
r2_multi = linear_fit(xs, [v for og in multi.values() for v in og.values()]).r_squared
print(f"\npooled linearity, one shared table:  R2 = {r2_single:.4f}")
print(f"pooled linearity, per-pixel tables:  R2 = {r2_multi:.4f}")

stats = multi_pixel_stats(multi, cal.reference_ogcd)
print(
    f"at level 255: mean {stats.level255_mean_ogcd:.2f}, "
    f"std {stats.level255_std_ogcd:.2f}; largest cross-pixel gap "
    f"{stats.max_gap:.2f} at level {stats.max_gap_level}"
)
