"""Display service: a deterministic frame-scheduler core plus a TCP shell.

The core is a pure state machine: commands stage level mutations, and each
frame boundary applies staged levels (last writer wins per pixel), steps
every pixel for one frame period, and emits a state snapshot. The socket
layer only shuttles newline-delimited JSON between clients and the core,
so a scripted session reproduces byte-identical snapshot streams.
"""

from __future__ import annotations

import socketserver
import threading
import time
from dataclasses import dataclass

import numpy as np

from .appearance import GrayCardBoard, auto_expose
from .assets import BUNDLED_ANIMATIONS, load_bundled
from .calibration import (
    CalibrationSet,
    CorrespondenceTable,
    apply_table,
    calibrate_multi,
    sample_characteristic,
)
from .color import lab_to_srgb_hex
from .config import SceneConfig
from .display import Animation, Display, Frame, assemble, make_module, present
from .motor import CONTROL_TICK_S
from .protocol import (
    Command,
    GetState,
    Play,
    ProtocolError,
    SetFrame,
    SetPixel,
    StartCalibration,
    SubscribeState,
    encode_line,
    make_error,
    make_ok,
    parse_line,
)

__all__ = ["DisplayService", "ScriptedSession", "serve", "default_tables"]


def default_tables(display_pixel_ids, max_length_mm: float = 20.0) -> dict[int, CorrespondenceTable]:
    """Uncalibrated identity mapping: level scales linearly to length."""
    lengths = tuple(level / 255.0 * max_length_mm for level in range(256))
    table = CorrespondenceTable(lengths_mm=lengths, reference_ogcd=0.0)
    return {pid: table for pid in display_pixel_ids}


class DisplayService:
    """Scheduler-owned display state; all mutations land at frame boundaries."""

    def __init__(
        self,
        config: SceneConfig | None = None,
        calibration: CalibrationSet | None = None,
        fps: int = 10,
    ) -> None:
        self.config = config or SceneConfig()
        if not 1 <= fps <= 10:
            raise ValueError("service fps must be in 1..10")
        self.fps = fps
        self.frame_ticks = max(1, round(1.0 / fps / CONTROL_TICK_S))
        cfg = self.config
        self._lock = threading.Lock()
        self.modules = [
            make_module(m, cfg.optics, drivetrain=cfg.drivetrain, gains=cfg.gains)
            for m in range(cfg.module_count)
        ]
        pixel_ids = [p.pixel_id for mod in self.modules for p in mod.pixels]
        if calibration is not None:
            tables = {pid: pc.table for pid, pc in calibration.pixels.items()}
        else:
            tables = default_tables(pixel_ids, cfg.drivetrain.max_length_mm)
        self.display: Display = assemble(self.modules, tables)
        self.env = cfg.environment
        self.cam = auto_expose(GrayCardBoard(), self.env, cfg.camera)
        self._levels = np.zeros((self.display.height, self.display.width), dtype=np.uint8)
        self._staged: dict[tuple[int, int], int] = {}
        self._animation: Animation | None = None
        self._anim_index = 0
        self._anim_hold = 1
        self._last_snapshot = self._snapshot()

    # -- command handling ----------------------------------------------------

    def apply_command(self, cmd: Command) -> dict:
        """Validate and stage a command; returns the response message."""
        with self._lock:
            if isinstance(cmd, SetPixel):
                if not (0 <= cmd.row < self.display.height and 0 <= cmd.col < self.display.width):
                    return make_error(
                        f"pixel ({cmd.row}, {cmd.col}) outside "
                        f"{self.display.width}x{self.display.height}"
                    )
                self._staged[(cmd.row, cmd.col)] = cmd.level
                return make_ok()
            if isinstance(cmd, SetFrame):
                expected = self.display.width * self.display.height
                if len(cmd.levels) != expected:
                    return make_error("dimension mismatch")
                for i, level in enumerate(cmd.levels):
                    self._staged[divmod(i, self.display.width)] = level
                return make_ok()
            if isinstance(cmd, GetState):
                return make_ok(snapshot=self._last_snapshot)
            if isinstance(cmd, Play):
                if cmd.name not in BUNDLED_ANIMATIONS:
                    return make_error(f"unknown animation {cmd.name!r}")
                anim = load_bundled(cmd.name)
                if (anim.width, anim.height) != (self.display.width, self.display.height):
                    return make_error("animation does not match display size")
                self._animation = anim
                self._anim_index = 0
                self._anim_hold = max(1, round(self.fps / anim.fps))
                return make_ok(frames=len(anim.frames))
            if isinstance(cmd, StartCalibration):
                return self._run_calibration(cmd.params)
            if isinstance(cmd, SubscribeState):
                # subscription bookkeeping lives in the transport layer
                return make_ok(subscribed=True)
        raise ProtocolError(f"unhandled command {cmd!r}")

    def _run_calibration(self, params: dict) -> dict:
        step_mm = params.get("step_mm", 1.0)
        if not isinstance(step_mm, (int, float)) or step_mm <= 0:
            return make_error("step_mm must be a positive number")
        chars = {}
        for mod in self.modules:
            for pixel in mod.pixels:
                pixel.home()
                chars[pixel.pixel_id] = sample_characteristic(
                    pixel, self.env, self.cam, step_mm=float(step_mm), settle=self.config.settle
                )
        cal = calibrate_multi(
            chars,
            environment_name=self.env.name,
            viewpoint_angle_deg=self.cam.viewpoint_angle_deg,
        )
        self.display.tables = {pid: pc.table for pid, pc in cal.pixels.items()}
        for mod in self.modules:
            for pixel in mod.pixels:
                pixel.home()
        return make_ok(
            reference_pixel_id=cal.reference_pixel_id,
            reference_ogcd=round(cal.reference_ogcd, 6),
            warnings=[w.message for w in cal.warnings],
        )

    # -- frame scheduling ----------------------------------------------------

    def advance_frame(self) -> dict:
        """Apply staged levels, run one frame period, and snapshot."""
        with self._lock:
            if self._animation is not None:
                frame = self._animation.frames[self._anim_index // self._anim_hold]
                self._levels = frame.as_array().copy()
                self._anim_index += 1
                if self._anim_index >= len(self._animation.frames) * self._anim_hold:
                    self._animation = None
                    self._anim_index = 0
            for (row, col), level in self._staged.items():
                self._levels[row, col] = level
            self._staged.clear()
            present(
                self.display,
                Frame.from_array(self._levels),
                self.frame_ticks * CONTROL_TICK_S,
            )
            self._last_snapshot = self._snapshot()
            return self._last_snapshot

    def _snapshot(self) -> dict:
        pixels = []
        for row, col, pixel in self.display.iter_pixels():
            lab = pixel.preview_lab(self.env, self.cam)
            pixels.append(
                {
                    "row": row,
                    "col": col,
                    "level": int(self._levels[row, col]),
                    "sp_count": pixel.setpoint.target_count,
                    "pv_count": pixel.motor.position_count,
                    "length_mm": round(pixel.motor.length_mm, 6),
                    "lab": [round(v, 6) for v in lab.as_tuple()],
                    "srgb": lab_to_srgb_hex(lab),
                }
            )
        return {
            "tick": self.display.clock_ticks,
            "width": self.display.width,
            "height": self.display.height,
            "pixels": pixels,
        }


@dataclass
class ScriptedSession:
    """Deterministic driver for golden tests: feed lines, advance frames."""

    service: DisplayService

    def run(self, script: list) -> bytes:
        """Execute a script of protocol lines and "advance" markers.

        Returns the byte stream a subscriber would have seen: every command
        response followed by every frame snapshot, in order.
        """
        out = bytearray()
        for item in script:
            if item == "advance":
                snapshot = self.service.advance_frame()
                out += encode_line({"v": 1, "snapshot": snapshot})
                continue
            try:
                cmd = parse_line(item)
            except ProtocolError as exc:
                out += encode_line(make_error(str(exc)))
                continue
            out += encode_line(self.service.apply_command(cmd))
        return bytes(out)


class _ClientHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: _DisplayServer = self.server  # type: ignore[assignment]
        subscribed = False
        try:
            for raw in self.rfile:
                line = raw.strip()
                if not line:
                    continue
                try:
                    cmd = parse_line(line)
                except ProtocolError as exc:
                    self._send(make_error(str(exc)))
                    continue
                response = server.service.apply_command(cmd)
                if isinstance(cmd, SubscribeState) and response.get("ok"):
                    if not subscribed:
                        subscribed = True
                        server.add_subscriber(self)
                self._send(response)
        finally:
            server.drop_subscriber(self)

    def _send(self, msg: dict) -> None:
        try:
            self.wfile.write(encode_line(msg))
            self.wfile.flush()
        except OSError:
            pass


class _DisplayServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, service: DisplayService):
        super().__init__(addr, _ClientHandler)
        self.service = service
        self._subscribers: list[_ClientHandler] = []
        self._sub_lock = threading.Lock()
        self._stop = threading.Event()
        self._scheduler = threading.Thread(target=self._frame_loop, daemon=True)

    def start_scheduler(self) -> None:
        self._scheduler.start()

    def add_subscriber(self, handler) -> None:
        with self._sub_lock:
            self._subscribers.append(handler)

    def drop_subscriber(self, handler) -> None:
        with self._sub_lock:
            if handler in self._subscribers:
                self._subscribers.remove(handler)

    def _frame_loop(self) -> None:
        period = 1.0 / self.service.fps
        next_deadline = time.monotonic() + period
        while not self._stop.is_set():
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            next_deadline += period
            snapshot = self.service.advance_frame()
            msg = {"v": 1, "snapshot": snapshot}
            with self._sub_lock:
                subscribers = list(self._subscribers)
            for handler in subscribers:
                handler._send(msg)

    def shutdown(self) -> None:  # type: ignore[override]
        self._stop.set()
        super().shutdown()


def serve(
    host: str,
    port: int,
    service: DisplayService,
    ready: threading.Event | None = None,
) -> None:
    """Run the TCP protocol server until interrupted."""
    with _DisplayServer((host, port), service) as server:
        server.start_scheduler()
        if ready is not None:
            ready.set()
        try:
            server.serve_forever(poll_interval=0.05)
        except KeyboardInterrupt:
            pass
        finally:
            server.shutdown()
