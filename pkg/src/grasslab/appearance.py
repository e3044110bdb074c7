"""Synthetic appearance model: what a camera sees looking at one grass pixel.

A pixel's color is spatial additive mixing of two reflectances: fixed yellow
grass and the green grass rising through its slits. The mixing fraction
follows a logistic occlusion curve in length whose shape depends on the
viewing angle: seen head-on (0 deg, perpendicular to the slits) the green
stays hidden until it clears the yellow, giving a strongly curved response;
seen along the slits (90 deg) some green shows even at zero length and the
response is close to linear.

The camera is fully linear: raw channel = illuminant * reflectance *
exposure * white-balance. Exposure and white balance are fixed from a
two-card gray board before any measurement, which is what makes measured
color differences nearly environment-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .color import D50, Lab, LinearRgb, Xyz, rgb_to_xyz, xyz_to_lab

__all__ = [
    "Environment",
    "ENVIRONMENT_PRESETS",
    "CropRect",
    "CameraConfig",
    "GrayCardBoard",
    "GrassOptics",
    "DEFAULT_OPTICS",
    "ExposureError",
    "MeasurementError",
    "illuminant_gains",
    "mixing_fraction",
    "mean_surface_color",
    "render_pixel_surface",
    "auto_expose",
    "measure_grass_color",
    "ideal_ogcd",
]


class ExposureError(RuntimeError):
    """Camera adjustment failed (degenerate illuminant)."""


class MeasurementError(ValueError):
    """Color measurement failed (bad crop region)."""


# Representative channel wavelengths (nm) for the blackbody illuminant model.
_CHANNEL_NM = (610.0, 550.0, 465.0)
_H = 6.62607015e-34
_C = 2.99792458e8
_KB = 1.380649e-23
_REFERENCE_KELVIN = 5000.0
_REFERENCE_LUX = 2000.0


def _planck(lambda_nm: float, kelvin: float) -> float:
    lam = lambda_nm * 1e-9
    x = _H * _C / (lam * _KB * kelvin)
    return lam ** -5 / math.expm1(x)


def illuminant_gains(illuminance_lx: float, color_temperature_k: float) -> tuple[float, float, float]:
    """Per-channel light gains from a blackbody-locus approximation.

    Normalized so the 5000 K / 2000 lx reference is (1, 1, 1); lower color
    temperatures tilt red, higher tilt blue; illuminance scales all channels.
    """
    if illuminance_lx <= 0:
        raise ValueError("illuminance must be > 0")
    if color_temperature_k <= 0:
        raise ValueError("color temperature must be > 0")
    scale = illuminance_lx / _REFERENCE_LUX
    ratios = [
        _planck(nm, color_temperature_k) / _planck(nm, _REFERENCE_KELVIN)
        for nm in _CHANNEL_NM
    ]
    green = ratios[1]
    return (scale * ratios[0] / green, scale, scale * ratios[2] / green)


@dataclass(frozen=True)
class Environment:
    """A lighting environment; gains derive from temperature and illuminance."""

    name: str
    illuminance_lx: float
    color_temperature_k: float

    def __post_init__(self) -> None:
        if self.illuminance_lx <= 0:
            raise ValueError("illuminance must be > 0")

    @property
    def gains(self) -> tuple[float, float, float]:
        return illuminant_gains(self.illuminance_lx, self.color_temperature_k)


ENVIRONMENT_PRESETS = {
    "iso": Environment("iso", 2000.0, 5000.0),
    "classroom": Environment("classroom", 404.0, 3564.0),
    "meeting_room": Environment("meeting_room", 525.0, 4380.0),
    "dimly_lit": Environment("dimly_lit", 113.0, 4059.0),
}


@dataclass(frozen=True)
class CropRect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 0 or self.h < 0 or self.x < 0 or self.y < 0:
            raise ValueError(f"invalid crop rect {self!r}")


@dataclass(frozen=True)
class CameraConfig:
    """Simulated camera: exposure, white balance, crop, and viewpoint."""

    exposure_scalar: float = 1.0
    white_balance_gains: tuple[float, float, float] = (1.0, 1.0, 1.0)
    crop_rect: CropRect = CropRect(4, 4, 16, 16)
    viewpoint_angle_deg: float = 0.0
    image_width: int = 24
    image_height: int = 24

    def __post_init__(self) -> None:
        if self.exposure_scalar <= 0:
            raise ValueError("exposure must be > 0")
        if not 0.0 <= self.viewpoint_angle_deg <= 90.0:
            raise ValueError("viewpoint angle must be in [0, 90] degrees")
        r = self.crop_rect
        if r.x + r.w > self.image_width or r.y + r.h > self.image_height:
            raise ValueError("crop rect outside image bounds")


@dataclass(frozen=True)
class GrayCardBoard:
    """Color-correction board with exactly the 18% and 50% gray cards."""

    reflectances: tuple[float, float] = (0.18, 0.50)

    def __post_init__(self) -> None:
        if tuple(self.reflectances) != (0.18, 0.50):
            raise ValueError("board must carry exactly the 18% and 50% cards")


@dataclass(frozen=True)
class GrassOptics:
    """Reflectances and occlusion-curve shape of one grass pixel.

    The mixing fraction is f(length, angle) = s * (g(length) - g(0)) + v(angle)
    clamped to [0, 1], where g is a logistic in length whose midpoint/width
    interpolate between the head-on and along-slit viewpoints, v is the
    green leak visible past 60 degrees, and s normalizes f(20 mm) to max_mix.
    """

    green_base: LinearRgb = LinearRgb(0.0354, 0.0490, 0.0240)
    yellow_base: LinearRgb = LinearRgb(0.2337, 0.2103, 0.1106)
    yellow_height_mm: float = 10.0
    slit_count: int = 3
    onset_mm_front: float = 8.5
    onset_mm_side: float = 6.0
    width_mm_front: float = 1.9
    width_mm_side: float = 7.0
    max_mix: float = 0.88
    side_leak: float = 0.10
    noise_amplitude: float = 0.01
    pixel_jitter: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.max_mix <= 1.0:
            raise ValueError("max_mix must be in (0, 1]")
        if not 0.0 <= self.side_leak < self.max_mix:
            raise ValueError("side_leak must be in [0, max_mix)")
        if self.width_mm_front <= 0 or self.width_mm_side <= 0:
            raise ValueError("logistic widths must be > 0")
        if self.noise_amplitude < 0:
            raise ValueError("noise amplitude must be >= 0")
        if self.pixel_jitter < 0:
            raise ValueError("pixel_jitter must be >= 0")

    def perturbed(self, pixel_id: int, jitter: float | None = None) -> "GrassOptics":
        """Seeded per-pixel variant modeling grass insertion differences."""
        if jitter is None:
            jitter = self.pixel_jitter
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x6A55, pixel_id]))

        def u(scale: float) -> float:
            return 1.0 + jitter * scale * (2.0 * rng.random() - 1.0)

        green = LinearRgb(
            self.green_base.r * u(0.05),
            self.green_base.g * u(0.05),
            self.green_base.b * u(0.05),
        )
        yellow = LinearRgb(
            self.yellow_base.r * u(0.04),
            self.yellow_base.g * u(0.04),
            self.yellow_base.b * u(0.04),
        )
        return replace(
            self,
            green_base=green,
            yellow_base=yellow,
            onset_mm_front=self.onset_mm_front + jitter * 0.7 * (2.0 * rng.random() - 1.0),
            width_mm_front=self.width_mm_front * u(0.12),
            onset_mm_side=self.onset_mm_side + jitter * 0.5 * (2.0 * rng.random() - 1.0),
            width_mm_side=self.width_mm_side * u(0.10),
            max_mix=min(1.0, self.max_mix * u(0.08)),
            side_leak=self.side_leak * u(0.20),
            seed=int(rng.integers(0, 2**31 - 1)),
        )


DEFAULT_OPTICS = GrassOptics()


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def mixing_fraction(optics: GrassOptics, length_mm: float, angle_deg: float) -> float:
    """Fraction of the perceived texture contributed by green grass."""
    if not 0.0 <= length_mm <= 20.0 + 1e-9:
        raise ValueError(f"length {length_mm!r} outside [0, 20] mm")
    u = min(1.0, max(0.0, angle_deg / 90.0))
    onset = optics.onset_mm_front + (optics.onset_mm_side - optics.onset_mm_front) * u
    width = optics.width_mm_front + (optics.width_mm_side - optics.width_mm_front) * u
    # Green leaks through the slit ends only at shallow viewing angles.
    leak_ramp = max(0.0, (angle_deg - 60.0) / 30.0)
    leak = optics.side_leak * leak_ramp * leak_ramp
    g0 = _logistic(-onset / width)
    g20 = _logistic((20.0 - onset) / width)
    g = _logistic((length_mm - onset) / width)
    span = g20 - g0
    if span <= 0:
        return leak
    s = (optics.max_mix - leak) / span
    return min(1.0, max(0.0, s * (g - g0) + leak))


def _camera_channel_gains(env: Environment, cam: CameraConfig) -> tuple[float, float, float]:
    il = env.gains
    wb = cam.white_balance_gains
    e = cam.exposure_scalar
    return (e * wb[0] * il[0], e * wb[1] * il[1], e * wb[2] * il[2])


def mean_surface_color(
    optics: GrassOptics, length_mm: float, env: Environment, cam: CameraConfig
) -> LinearRgb:
    """Noiseless camera color of the pixel surface (spatial mean)."""
    f = mixing_fraction(optics, length_mm, cam.viewpoint_angle_deg)
    gains = _camera_channel_gains(env, cam)
    yb, gb = optics.yellow_base, optics.green_base
    return LinearRgb(
        gains[0] * ((1.0 - f) * yb.r + f * gb.r),
        gains[1] * ((1.0 - f) * yb.g + f * gb.g),
        gains[2] * ((1.0 - f) * yb.b + f * gb.b),
    )


def render_pixel_surface(
    optics: GrassOptics,
    length_mm: float,
    env: Environment,
    cam: CameraConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Render the pixel surface as a small linear-RGB image.

    The spatial mean equals mean_surface_color plus zero-mean texture noise.
    With rng omitted the render is a pure function of its arguments (a fresh
    generator is derived from the optics seed); passing a generator stream
    gives independent trial-to-trial noise.
    """
    mean = mean_surface_color(optics, length_mm, env, cam)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([optics.seed, 0x1A6E]))
    eta = rng.standard_normal((cam.image_height, cam.image_width, 1))
    eta -= eta.mean()  # exactly zero-mean texture
    img = np.array(mean.as_tuple())[None, None, :] * (1.0 + optics.noise_amplitude * eta)
    return np.clip(img, 0.0, 1.0)


def render_card(reflectance: float, env: Environment, cam: CameraConfig) -> LinearRgb:
    """Camera color of a flat gray card under the environment."""
    gains = _camera_channel_gains(env, cam)
    return LinearRgb(gains[0] * reflectance, gains[1] * reflectance, gains[2] * reflectance)


def auto_expose(board: GrayCardBoard, env: Environment, cam: CameraConfig) -> CameraConfig:
    """Fix exposure and white balance from the gray-card board.

    Exposure puts the 18% card at the middle of the intensity range (0.5);
    white balance neutralizes the 50% card. Returns an adjusted copy.
    """
    il = env.gains
    if min(il) <= 1e-12:
        raise ExposureError(f"degenerate illuminant for {env.name!r}: {il}")
    mid_card = board.reflectances[0]
    wb = (il[1] / il[0], 1.0, il[1] / il[2])
    exposure = 0.5 / (mid_card * il[1])
    return replace(cam, exposure_scalar=exposure, white_balance_gains=wb)


def measure_grass_color(image: np.ndarray, crop: CropRect) -> Lab:
    """Average the cropped region and convert to Lab at the D50 white point."""
    h, w = image.shape[0], image.shape[1]
    if crop.w < 1 or crop.h < 1:
        raise MeasurementError(f"empty crop {crop!r}")
    if crop.x + crop.w > w or crop.y + crop.h > h:
        raise MeasurementError(f"crop {crop!r} outside {w}x{h} image")
    region = image[crop.y : crop.y + crop.h, crop.x : crop.x + crop.w, :]
    mean = region.reshape(-1, 3).mean(axis=0)
    return xyz_to_lab(rgb_to_xyz(LinearRgb(*mean)), D50)


def ideal_ogcd(
    optics: GrassOptics,
    length_mm: float,
    env: Environment,
    cam: CameraConfig,
) -> float:
    """Noiseless color difference from the zero-length color.

    Brute-force reference for the sampled-and-fitted characteristic.
    """
    from .color import ciede2000

    lab0 = xyz_to_lab(rgb_to_xyz(mean_surface_color(optics, 0.0, env, cam)), D50)
    lab = xyz_to_lab(rgb_to_xyz(mean_surface_color(optics, length_mm, env, cam)), D50)
    return ciede2000(lab0, lab)
