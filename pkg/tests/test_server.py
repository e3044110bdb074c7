import json
import socket
import threading
import time

import pytest

from grasslab.config import SceneConfig
from grasslab.protocol import GetState, Play, SetFrame, SetPixel, StartCalibration
from grasslab.server import DisplayService, ScriptedSession, serve


def make_service(fps=10, module_count=1):
    cfg = SceneConfig(module_count=module_count)
    return DisplayService(cfg, fps=fps)


def test_set_pixel_converges_toward_full_travel():
    service = make_service()
    resp = service.apply_command(SetPixel(row=0, col=0, level=255))
    assert resp["ok"]
    service.advance_frame()
    snap = service.apply_command(GetState())["snapshot"]
    pix = next(p for p in snap["pixels"] if p["row"] == 0 and p["col"] == 0)
    assert pix["sp_count"] == 146
    assert pix["pv_count"] == 146  # one 100 ms frame is plenty
    others = [p for p in snap["pixels"] if (p["row"], p["col"]) != (0, 0)]
    assert all(p["pv_count"] == 0 for p in others)


def test_set_frame_dimension_mismatch():
    service = make_service()
    resp = service.apply_command(SetFrame(levels=tuple([0] * 10)))
    assert not resp["ok"]
    assert resp["error"] == "dimension mismatch"


def test_set_pixel_out_of_bounds():
    service = make_service()
    resp = service.apply_command(SetPixel(row=9, col=0, level=1))
    assert not resp["ok"]


def test_last_writer_wins_within_one_frame():
    service = make_service()
    service.apply_command(SetPixel(row=2, col=1, level=10))
    service.apply_command(SetPixel(row=2, col=1, level=200))
    service.advance_frame()
    snap = service.apply_command(GetState())["snapshot"]
    pix = next(p for p in snap["pixels"] if (p["row"], p["col"]) == (2, 1))
    assert pix["level"] == 200


def test_get_state_is_frame_boundary_consistent():
    service = make_service()
    before = service.apply_command(GetState())["snapshot"]
    service.apply_command(SetPixel(row=0, col=0, level=255))
    # staged but not yet applied: state still shows the old snapshot
    assert service.apply_command(GetState())["snapshot"] == before
    service.advance_frame()
    after = service.apply_command(GetState())["snapshot"]
    assert after != before


def test_snapshot_carries_previews():
    service = make_service()
    snap = service.apply_command(GetState())["snapshot"]
    assert snap["width"] == 2 and snap["height"] == 8
    assert len(snap["pixels"]) == 16
    pix = snap["pixels"][0]
    assert set(pix) == {"row", "col", "level", "sp_count", "pv_count", "length_mm", "lab", "srgb"}
    assert pix["srgb"].startswith("#") and len(pix["srgb"]) == 7
    assert len(pix["lab"]) == 3


def test_play_unknown_animation():
    service = make_service()
    resp = service.apply_command(Play(name="nope"))
    assert not resp["ok"]


def test_play_wrong_size_animation():
    service = make_service(module_count=1)  # 2x8 display, bundled assets are 8x8
    resp = service.apply_command(Play(name="wave"))
    assert not resp["ok"]


def test_play_streams_frames():
    service = make_service(module_count=4)
    resp = service.apply_command(Play(name="wave"))
    assert resp["ok"] and resp["frames"] == 40
    first = service.advance_frame()
    levels = {(p["row"], p["col"]): p["level"] for p in first["pixels"]}
    from grasslab.assets import load_bundled

    wave = load_bundled("wave")
    expected = wave.frames[0].as_array()
    assert all(levels[(r, c)] == expected[r, c] for r in range(8) for c in range(8))


def test_scripted_session_deterministic():
    script = [
        b'{"v":1,"cmd":"subscribe_state"}',
        b'{"v":1,"cmd":"set_pixel","row":0,"col":0,"level":255}',
        "advance",
        b'{"v":1,"cmd":"set_pixel","row":3,"col":1,"level":128}',
        "advance",
        b'{"v":1,"cmd":"set_frame","levels":' + json.dumps([7] * 16).encode() + b"}",
        "advance",
        b'{"v":1,"cmd":"get_state"}',
        b"not json at all",
        "advance",
    ]
    stream1 = ScriptedSession(make_service()).run(script)
    stream2 = ScriptedSession(make_service()).run(script)
    assert stream1 == stream2
    lines = stream1.splitlines()
    assert len(lines) == len(script)
    # the malformed line produced an error response, connection-level recovery
    error_line = json.loads(lines[-2])
    assert error_line["ok"] is False


def test_calibration_command_replaces_tables():
    service = make_service()
    before = dict(service.display.tables)
    resp = service.apply_command(StartCalibration(params={"step_mm": 2.0}))
    assert resp["ok"]
    assert resp["reference_ogcd"] > 0
    assert service.display.tables != before
    resp2 = service.apply_command(StartCalibration(params={"step_mm": -1}))
    assert not resp2["ok"]


def test_socket_roundtrip():
    service = make_service(fps=10)
    ready = threading.Event()
    port_holder = {}

    def run():
        # pick a free port by binding socket 0 first
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port_holder["port"] = probe.getsockname()[1]
        serve("127.0.0.1", port_holder["port"], service, ready=ready)

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    assert ready.wait(5.0)

    with socket.create_connection(("127.0.0.1", port_holder["port"]), timeout=5) as conn:
        f = conn.makefile("rwb")
        f.write(b'{"v":1,"cmd":"set_pixel","row":0,"col":0,"level":255}\n')
        f.write(b'{"v":1,"cmd":"get_state"}\n')
        f.flush()
        resp1 = json.loads(f.readline())
        resp2 = json.loads(f.readline())
        assert resp1["ok"] and resp2["ok"]
        # malformed message gets an error but keeps the connection alive
        f.write(b"garbage\n")
        f.flush()
        resp3 = json.loads(f.readline())
        assert resp3["ok"] is False
        # subscribe and observe pushed snapshots at the frame cadence
        f.write(b'{"v":1,"cmd":"subscribe_state"}\n')
        f.flush()
        ack = json.loads(f.readline())
        assert ack["ok"]
        push1 = json.loads(f.readline())
        push2 = json.loads(f.readline())
        assert "snapshot" in push1 and "snapshot" in push2
        assert push2["snapshot"]["tick"] - push1["snapshot"]["tick"] == 100
        pix = next(
            p for p in push2["snapshot"]["pixels"] if (p["row"], p["col"]) == (0, 0)
        )
        assert pix["pv_count"] == 146
