"""CIELAB color math for quantifying grass color.

The camera model works in linear (non-gamma) ProPhotoRGB, which is D50-native,
so the CIELAB white point defaults to D50 and no chromatic adaptation is ever
applied. Color differences use the full CIEDE2000 formula including the blue
hue-rotation term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinearRgb",
    "Xyz",
    "Lab",
    "WhitePoint",
    "D50",
    "PROPHOTO_TO_XYZ",
    "rgb_to_xyz",
    "xyz_to_lab",
    "ciede2000",
    "ciede2000_many",
    "lab_to_srgb8",
    "lab_to_srgb_hex",
]

# Linear ProPhotoRGB -> CIE 1931 XYZ (2-degree observer), D50-native.
# Published color-management matrix, full precision; rows sum to D50 white.
PROPHOTO_TO_XYZ = (
    (0.7976749, 0.1351917, 0.0313534),
    (0.2880402, 0.7118741, 0.0000857),
    (0.0000000, 0.0000000, 0.8252100),
)

# CIELAB two-segment constants as exact rationals; decimal approximations
# (0.008856 / 903.3) introduce a seam that polynomial fitting can pick up.
_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


@dataclass(frozen=True)
class LinearRgb:
    """Reflectance-linear RGB in ProPhotoRGB primaries.

    Channels are clamped to [0, 1] at construction; the clamp only guards
    file ingestion since the simulator never produces out-of-gamut values.
    """

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"non-finite {name} channel: {v!r}")
            object.__setattr__(self, name, _clamp01(v))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class Xyz:
    """CIE 1931 tristimulus values, Y normalized so reference white has Y = 1."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"XYZ component {name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class Lab:
    """CIELAB value: L* lightness, a* red-green axis, b* yellow-blue axis."""

    l_star: float
    a_star: float
    b_star: float

    def __post_init__(self) -> None:
        for name in ("l_star", "a_star", "b_star"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"non-finite {name}: {v!r}")
            object.__setattr__(self, name, v)
        if not -1e-6 <= self.l_star <= 100.0 + 1e-6:
            raise ValueError(f"l_star out of [0, 100]: {self.l_star!r}")
        object.__setattr__(self, "l_star", min(100.0, max(0.0, self.l_star)))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l_star, self.a_star, self.b_star)


@dataclass(frozen=True)
class WhitePoint:
    """XYZ of the adopted white; default is the 5000 K (D50) white."""

    x: float = 0.96422
    y: float = 1.0
    z: float = 0.82521

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"white point {name} must be > 0, got {v!r}")
            object.__setattr__(self, name, v)


D50 = WhitePoint()


def rgb_to_xyz(c: LinearRgb) -> Xyz:
    """Convert linear ProPhotoRGB to XYZ; (1,1,1) maps to the D50 white."""
    m = PROPHOTO_TO_XYZ
    return Xyz(
        m[0][0] * c.r + m[0][1] * c.g + m[0][2] * c.b,
        m[1][0] * c.r + m[1][1] * c.g + m[1][2] * c.b,
        m[2][0] * c.r + m[2][1] * c.g + m[2][2] * c.b,
    )


def _lab_f(t: float) -> float:
    if t > _EPS:
        return t ** (1.0 / 3.0)
    return (_KAPPA * t + 16.0) / 116.0


def xyz_to_lab(c: Xyz, w: WhitePoint = D50) -> Lab:
    """Standard CIELAB forward transform with the cube-root/linear branch."""
    fx = _lab_f(c.x / w.x)
    fy = _lab_f(c.y / w.y)
    fz = _lab_f(c.z / w.z)
    return Lab(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


_POW25_7 = 25.0 ** 7


def ciede2000_many(lab1: np.ndarray, lab2: np.ndarray) -> np.ndarray:
    """CIEDE2000 over arrays of shape (..., 3). Vectorized core formula."""
    lab1 = np.asarray(lab1, dtype=float)
    lab2 = np.asarray(lab2, dtype=float)
    l1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    l2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c1 = np.hypot(a1, b1)
    c2 = np.hypot(a2, b2)
    c_bar = 0.5 * (c1 + c2)
    c_bar7 = c_bar ** 7
    g = 0.5 * (1.0 - np.sqrt(c_bar7 / (c_bar7 + _POW25_7)))

    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)

    # Hue angles in degrees, 0 when the chroma vanishes.
    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h1p = np.where((a1p == 0.0) & (b1 == 0.0), 0.0, h1p)
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    h2p = np.where((a2p == 0.0) & (b2 == 0.0), 0.0, h2p)

    dlp = l2 - l1
    dcp = c2p - c1p

    dh = h2p - h1p
    dh = np.where(dh > 180.0, dh - 360.0, dh)
    dh = np.where(dh < -180.0, dh + 360.0, dh)
    dh = np.where(c1p * c2p == 0.0, 0.0, dh)
    dhp = 2.0 * np.sqrt(c1p * c2p) * np.sin(np.radians(0.5 * dh))

    l_bar = 0.5 * (l1 + l2)
    cp_bar = 0.5 * (c1p + c2p)

    hsum = h1p + h2p
    habs = np.abs(h1p - h2p)
    h_bar = np.where(
        habs <= 180.0,
        0.5 * hsum,
        np.where(hsum < 360.0, 0.5 * (hsum + 360.0), 0.5 * (hsum - 360.0)),
    )
    h_bar = np.where(c1p * c2p == 0.0, hsum, h_bar)

    t = (
        1.0
        - 0.17 * np.cos(np.radians(h_bar - 30.0))
        + 0.24 * np.cos(np.radians(2.0 * h_bar))
        + 0.32 * np.cos(np.radians(3.0 * h_bar + 6.0))
        - 0.20 * np.cos(np.radians(4.0 * h_bar - 63.0))
    )

    l_off = (l_bar - 50.0) ** 2
    s_l = 1.0 + 0.015 * l_off / np.sqrt(20.0 + l_off)
    s_c = 1.0 + 0.045 * cp_bar
    s_h = 1.0 + 0.015 * cp_bar * t

    d_theta = 30.0 * np.exp(-(((h_bar - 275.0) / 25.0) ** 2))
    cp_bar7 = cp_bar ** 7
    r_c = 2.0 * np.sqrt(cp_bar7 / (cp_bar7 + _POW25_7))
    r_t = -np.sin(np.radians(2.0 * d_theta)) * r_c

    tl = dlp / s_l
    tc = dcp / s_c
    th = dhp / s_h
    return np.sqrt(tl * tl + tc * tc + th * th + r_t * tc * th)


def ciede2000(c1: Lab, c2: Lab) -> float:
    """CIEDE2000 color difference; symmetric, non-negative, zero iff equal."""
    return float(ciede2000_many(np.array(c1.as_tuple()), np.array(c2.as_tuple())))


# XYZ (D50) -> linear sRGB with D50-adapted primaries; published matrix, used
# only for on-screen previews.
_XYZ_D50_TO_SRGB = (
    (3.1338561, -1.6168667, -0.4906146),
    (-0.9787684, 1.9161415, 0.0334540),
    (0.0719453, -0.2289914, 1.4052427),
)

_LAB_EPS3 = 6.0 / 29.0  # cube root of _EPS


def _lab_f_inv(t: float) -> float:
    if t > _LAB_EPS3:
        return t * t * t
    return (116.0 * t - 16.0) / _KAPPA


def _srgb_encode(v: float) -> float:
    v = _clamp01(v)
    if v <= 0.0031308:
        return 12.92 * v
    return 1.055 * v ** (1.0 / 2.4) - 0.055


def lab_to_srgb8(c: Lab, w: WhitePoint = D50) -> tuple[int, int, int]:
    """Gamma-encoded 8-bit sRGB preview of a Lab value (clipped to gamut)."""
    fy = (c.l_star + 16.0) / 116.0
    fx = fy + c.a_star / 500.0
    fz = fy - c.b_star / 200.0
    x = _lab_f_inv(fx) * w.x
    y = _lab_f_inv(fy) * w.y
    z = _lab_f_inv(fz) * w.z
    m = _XYZ_D50_TO_SRGB
    rgb = (
        m[0][0] * x + m[0][1] * y + m[0][2] * z,
        m[1][0] * x + m[1][1] * y + m[1][2] * z,
        m[2][0] * x + m[2][1] * y + m[2][2] * z,
    )
    return tuple(int(round(255.0 * _srgb_encode(v))) for v in rgb)  # type: ignore[return-value]


def lab_to_srgb_hex(c: Lab, w: WhitePoint = D50) -> str:
    """Preview color as an ``#rrggbb`` string."""
    r, g, b = lab_to_srgb8(c, w)
    return f"#{r:02x}{g:02x}{b:02x}"
