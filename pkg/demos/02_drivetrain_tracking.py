"""Drivetrain response: how fast can a pin track a full-travel ramp?

Sweeps the setpoint linearly from 0 to 146 counts (0 to 20 mm) in 1/fps
seconds and checks whether the encoder stays within 5 counts. The default
drivetrain tracks up to 10 fps and loses the 1/11 s ramp, so 10 fps is the
fastest frame rate the display can honestly play.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from grasslab import DrivetrainParams, MotorState, ramp_tracking_test
from grasslab.motor import write_trace_csv

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def fresh_state():
    state = MotorState(params=DrivetrainParams())
    state.homed = True
    return state


print("fps  max|sp-pv|  verdict")
for fps in list(range(1, 13)):
    result = ramp_tracking_test(fresh_state(), fps)
    verdict = "follows" if result.passed else "cannot follow"
    print(f"{fps:3d}  {result.max_abs_error:10d}  {verdict}")

fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
for ax, fps in zip(axes, (10, 11)):
    result = ramp_tracking_test(fresh_state(), fps)
    t = [row[0] * 1000 for row in result.trace]
    ax.plot(t, [row[1] for row in result.trace], label="setpoint", lw=2)
    ax.plot(t, [row[2] for row in result.trace], label="encoder", lw=1)
    ax.set_title(f"{fps} fps ramp ({'pass' if result.passed else 'fail'})")
    ax.set_xlabel("time [ms]")
    ax.legend()
axes[0].set_ylabel("count")
fig.tight_layout()
fig.savefig(OUT / "tracking_boundary.png", dpi=120)
print(f"\nwrote {OUT / 'tracking_boundary.png'}")

result = ramp_tracking_test(fresh_state(), 10)
write_trace_csv(result.trace, OUT / "ramp_10fps.csv")
print(f"wrote {OUT / 'ramp_10fps.csv'}")
