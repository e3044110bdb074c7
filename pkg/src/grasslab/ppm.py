"""Binary PPM (P6) image I/O at 16-bit depth, for golden-image tests."""

from __future__ import annotations

import numpy as np

__all__ = ["write_ppm16", "read_ppm16"]

_MAXVAL = 65535


def write_ppm16(path, image: np.ndarray) -> None:
    """Write a float linear-RGB image in [0, 1] as a 16-bit binary PPM."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got shape {img.shape}")
    h, w = img.shape[:2]
    samples = np.clip(np.rint(img * _MAXVAL), 0, _MAXVAL).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n{_MAXVAL}\n".encode("ascii"))
        fh.write(samples.tobytes())


def read_ppm16(path) -> np.ndarray:
    """Read a 16-bit binary PPM back into a float image in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    # header: magic, width, height, maxval separated by whitespace
    fields: list[bytes] = []
    i = 0
    while len(fields) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        fields.append(data[start:i])
    i += 1  # single whitespace after maxval
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM: magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != _MAXVAL:
        raise ValueError(f"expected 16-bit PPM (maxval {_MAXVAL}), got {maxval}")
    raw = np.frombuffer(data, dtype=">u2", offset=i, count=w * h * 3)
    return raw.reshape(h, w, 3).astype(float) / _MAXVAL
