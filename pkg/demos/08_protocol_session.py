"""A scripted service session over the wire protocol (no sockets needed).

The display service is a deterministic state machine: commands stage level
changes, every frame boundary applies them, steps the physics for one
frame period, and emits a snapshot. The same script always produces the
same byte stream.
"""

import json

from grasslab.config import SceneConfig
from grasslab.server import DisplayService, ScriptedSession

script = [
    b'{"v":1,"cmd":"set_pixel","row":0,"col":0,"level":255}',
    b'{"v":1,"cmd":"set_pixel","row":7,"col":1,"level":128}',
    "advance",
    b'{"v":1,"cmd":"get_state"}',
    "advance",
    b'{"v":1,"cmd":"set_frame","levels":' + json.dumps([40] * 16).encode() + b"}",
    "advance",
]

service = DisplayService(SceneConfig(), fps=10)
stream = ScriptedSession(service).run(script)

for line in stream.splitlines():
    msg = json.loads(line)
    if "snapshot" in msg:
        snap = msg["snapshot"]
        busy = [p for p in snap["pixels"] if p["pv_count"] > 0]
        print(f"tick {snap['tick']:4d}: {len(busy)} pixels off the floor")
        for p in busy[:4]:
            print(
                f"    ({p['row']},{p['col']}) level {p['level']:3d} "
                f"pv {p['pv_count']:3d} length {p['length_mm']:6.3f} mm "
                f"preview {p['srgb']}"
            )
    else:
        print("response:", json.dumps(msg))

print("\nreplaying the script gives a byte-identical stream:",
      ScriptedSession(DisplayService(SceneConfig(), fps=10)).run(script) == stream)
