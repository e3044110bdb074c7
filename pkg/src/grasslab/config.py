"""Scene configuration: one JSON file drives the CLI and the server.

Every tunable default lives here so a config file can reproduce any run:
optics (base colors, occlusion curve, noise, seed), environment, camera
(viewpoint, image size, crop), drivetrain and PD gains, settling criteria,
module count, and the protocol port. Missing keys fall back to defaults;
unknown keys are rejected to catch typos.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .appearance import (
    ENVIRONMENT_PRESETS,
    CameraConfig,
    CropRect,
    Environment,
    GrassOptics,
)
from .color import LinearRgb
from .motor import DrivetrainParams, PdGains
from .pixel import SettleParams

__all__ = [
    "SceneConfig",
    "ConfigError",
    "DEFAULT_PORT",
    "ENV_CONFIG_VAR",
    "ENV_PORT_VAR",
    "load_config",
    "save_config",
    "config_to_dict",
    "config_from_dict",
]

DEFAULT_PORT = 7342
ENV_CONFIG_VAR = "GRASSLAB_CONFIG"
ENV_PORT_VAR = "GRASSLAB_PORT"


class ConfigError(ValueError):
    """Malformed configuration file."""


@dataclass(frozen=True)
class SceneConfig:
    """Everything needed to build pixels, modules, and measurement runs."""

    optics: GrassOptics = field(default_factory=GrassOptics)
    environment: Environment = field(default_factory=lambda: ENVIRONMENT_PRESETS["iso"])
    camera: CameraConfig = field(default_factory=CameraConfig)
    drivetrain: DrivetrainParams = field(default_factory=DrivetrainParams)
    gains: PdGains = field(default_factory=PdGains)
    settle: SettleParams = field(default_factory=SettleParams)
    module_count: int = 1
    port: int = DEFAULT_PORT

    def __post_init__(self) -> None:
        if self.module_count < 1:
            raise ConfigError("module_count must be >= 1")
        if not 0 < self.port < 65536:
            raise ConfigError("port must be in 1..65535")


def _take(section: dict, known: dict, where: str) -> dict:
    unknown = set(section) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    merged = dict(known)
    merged.update(section)
    return merged


def config_to_dict(cfg: SceneConfig) -> dict:
    o = cfg.optics
    cam = cfg.camera
    dt = cfg.drivetrain
    return {
        "optics": {
            "green_base": list(o.green_base.as_tuple()),
            "yellow_base": list(o.yellow_base.as_tuple()),
            "yellow_height_mm": o.yellow_height_mm,
            "slit_count": o.slit_count,
            "onset_mm_front": o.onset_mm_front,
            "onset_mm_side": o.onset_mm_side,
            "width_mm_front": o.width_mm_front,
            "width_mm_side": o.width_mm_side,
            "max_mix": o.max_mix,
            "side_leak": o.side_leak,
            "noise_amplitude": o.noise_amplitude,
            "pixel_jitter": o.pixel_jitter,
            "seed": o.seed,
        },
        "environment": {
            "name": cfg.environment.name,
            "illuminance_lx": cfg.environment.illuminance_lx,
            "color_temperature_k": cfg.environment.color_temperature_k,
        },
        "camera": {
            "viewpoint_angle_deg": cam.viewpoint_angle_deg,
            "image_width": cam.image_width,
            "image_height": cam.image_height,
            "crop_rect": [cam.crop_rect.x, cam.crop_rect.y, cam.crop_rect.w, cam.crop_rect.h],
        },
        "drivetrain": {
            "lead_mm_per_rev": dt.lead_mm_per_rev,
            "encoder_resolution_mm_per_count": dt.encoder_resolution_mm_per_count,
            "gain_count_per_mm": dt.gain_count_per_mm,
            "max_length_mm": dt.max_length_mm,
            "no_load_speed_counts_per_s": dt.no_load_speed_counts_per_s,
            "time_constant_s": dt.time_constant_s,
        },
        "gains": {"p": cfg.gains.p, "d": cfg.gains.d},
        "settle": {
            "tolerance_counts": cfg.settle.tolerance_counts,
            "consecutive_ticks": cfg.settle.consecutive_ticks,
            "timeout_s": cfg.settle.timeout_s,
        },
        "module_count": cfg.module_count,
        "port": cfg.port,
    }


def config_from_dict(data: dict) -> SceneConfig:
    defaults = config_to_dict(SceneConfig())
    data = _take(data, defaults, "config")

    opt = _take(data["optics"], defaults["optics"], "optics")
    optics = GrassOptics(
        green_base=LinearRgb(*opt["green_base"]),
        yellow_base=LinearRgb(*opt["yellow_base"]),
        yellow_height_mm=opt["yellow_height_mm"],
        slit_count=opt["slit_count"],
        onset_mm_front=opt["onset_mm_front"],
        onset_mm_side=opt["onset_mm_side"],
        width_mm_front=opt["width_mm_front"],
        width_mm_side=opt["width_mm_side"],
        max_mix=opt["max_mix"],
        side_leak=opt["side_leak"],
        noise_amplitude=opt["noise_amplitude"],
        pixel_jitter=opt["pixel_jitter"],
        seed=opt["seed"],
    )

    env_section = data["environment"]
    if isinstance(env_section, str):
        if env_section not in ENVIRONMENT_PRESETS:
            raise ConfigError(
                f"unknown environment preset {env_section!r}; have {sorted(ENVIRONMENT_PRESETS)}"
            )
        environment = ENVIRONMENT_PRESETS[env_section]
    else:
        env = _take(env_section, defaults["environment"], "environment")
        environment = Environment(env["name"], env["illuminance_lx"], env["color_temperature_k"])

    cam = _take(data["camera"], defaults["camera"], "camera")
    camera = CameraConfig(
        viewpoint_angle_deg=cam["viewpoint_angle_deg"],
        image_width=cam["image_width"],
        image_height=cam["image_height"],
        crop_rect=CropRect(*cam["crop_rect"]),
    )

    dt = _take(data["drivetrain"], defaults["drivetrain"], "drivetrain")
    drivetrain = DrivetrainParams(**dt)

    gains_d = _take(data["gains"], defaults["gains"], "gains")
    settle_d = _take(data["settle"], defaults["settle"], "settle")

    return SceneConfig(
        optics=optics,
        environment=environment,
        camera=camera,
        drivetrain=drivetrain,
        gains=PdGains(**gains_d),
        settle=SettleParams(**settle_d),
        module_count=data["module_count"],
        port=data["port"],
    )


def load_config(path: str | None = None) -> SceneConfig:
    """Load a config file; with no path, use $GRASSLAB_CONFIG or defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR)
    if path is None:
        return SceneConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return config_from_dict(data)


def save_config(cfg: SceneConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=1)
        fh.write("\n")


def resolve_port(cfg: SceneConfig, override: int | None = None) -> int:
    """Port precedence: CLI flag, then $GRASSLAB_PORT, then config."""
    if override is not None:
        return override
    env_port = os.environ.get(ENV_PORT_VAR)
    if env_port is not None:
        try:
            return int(env_port)
        except ValueError:
            raise ConfigError(f"{ENV_PORT_VAR} is not an integer: {env_port!r}")
    return cfg.port
