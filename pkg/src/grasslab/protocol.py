"""Newline-delimited JSON protocol between the display service and clients.

Every message is one JSON object per line carrying a version field "v".
Commands name an action in "cmd"; responses carry "ok" plus either payload
fields or "error". State snapshots are pushed to subscribers as
{"v": 1, "snapshot": {...}}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

__all__ = [
    "PROTOCOL_VERSION",
    "ProtocolError",
    "Command",
    "SetPixel",
    "SetFrame",
    "GetState",
    "StartCalibration",
    "Play",
    "SubscribeState",
    "parse_command",
    "encode_command",
    "parse_line",
    "encode_line",
    "make_ok",
    "make_error",
]

PROTOCOL_VERSION = 1


class ProtocolError(ValueError):
    """Malformed or unsupported protocol message."""


@dataclass(frozen=True)
class SetPixel:
    row: int
    col: int
    level: int

    def __post_init__(self) -> None:
        if not 0 <= self.level <= 255:
            raise ProtocolError(f"level {self.level} outside 0..255")
        if self.row < 0 or self.col < 0:
            raise ProtocolError("row/col must be non-negative")


@dataclass(frozen=True)
class SetFrame:
    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(not 0 <= v <= 255 for v in self.levels):
            raise ProtocolError("levels must be in 0..255")


@dataclass(frozen=True)
class GetState:
    pass


@dataclass(frozen=True)
class StartCalibration:
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.params, dict):
            raise ProtocolError("calibration params must be an object")


@dataclass(frozen=True)
class Play:
    name: str


@dataclass(frozen=True)
class SubscribeState:
    pass


Command = SetPixel | SetFrame | GetState | StartCalibration | Play | SubscribeState

_COMMAND_NAMES = {
    SetPixel: "set_pixel",
    SetFrame: "set_frame",
    GetState: "get_state",
    StartCalibration: "start_calibration",
    Play: "play",
    SubscribeState: "subscribe_state",
}


def encode_command(cmd: Command) -> dict:
    name = _COMMAND_NAMES.get(type(cmd))
    if name is None:
        raise ProtocolError(f"not a command: {cmd!r}")
    msg: dict[str, Any] = {"v": PROTOCOL_VERSION, "cmd": name}
    if isinstance(cmd, SetPixel):
        msg.update(row=cmd.row, col=cmd.col, level=cmd.level)
    elif isinstance(cmd, SetFrame):
        msg["levels"] = list(cmd.levels)
    elif isinstance(cmd, StartCalibration):
        msg["params"] = dict(cmd.params)
    elif isinstance(cmd, Play):
        msg["name"] = cmd.name
    return msg


def _require(msg: dict, key: str):
    if key not in msg:
        raise ProtocolError(f"missing field {key!r}")
    return msg[key]


def _int_field(msg: dict, key: str) -> int:
    v = _require(msg, key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ProtocolError(f"field {key!r} must be an integer, got {v!r}")
    return v


def parse_command(msg: dict) -> Command:
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    version = msg.get("v")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {version!r}")
    cmd = msg.get("cmd")
    if cmd == "set_pixel":
        return SetPixel(
            row=_int_field(msg, "row"), col=_int_field(msg, "col"), level=_int_field(msg, "level")
        )
    if cmd == "set_frame":
        levels = _require(msg, "levels")
        if not isinstance(levels, list):
            raise ProtocolError("levels must be a list")
        return SetFrame(levels=tuple(_as_level(v) for v in levels))
    if cmd == "get_state":
        return GetState()
    if cmd == "start_calibration":
        return StartCalibration(params=msg.get("params", {}))
    if cmd == "play":
        name = _require(msg, "name")
        if not isinstance(name, str):
            raise ProtocolError("name must be a string")
        return Play(name=name)
    if cmd == "subscribe_state":
        return SubscribeState()
    raise ProtocolError(f"unknown command {cmd!r}")


def _as_level(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ProtocolError(f"level {v!r} must be an integer")
    return v


def parse_line(line: str | bytes) -> Command:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc}")
    return parse_command(msg)


def encode_line(msg: dict) -> bytes:
    return (json.dumps(msg, separators=(",", ":"), sort_keys=True) + "\n").encode("utf-8")


def make_ok(**payload) -> dict:
    out = {"v": PROTOCOL_VERSION, "ok": True}
    out.update(payload)
    return out


def make_error(message: str) -> dict:
    return {"v": PROTOCOL_VERSION, "ok": False, "error": message}
