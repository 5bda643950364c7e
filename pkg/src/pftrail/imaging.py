"""Progression images: a square-pixel raster coloured by visit parameter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvedef import CurveDefinition
from .meshgen import colormap
from .traversal import bounding_box, expansion_radius, sample_chunks

__all__ = ["RasterImage", "progression_image", "parameter_raster",
           "write_ppm", "read_ppm", "ppm_bytes"]

POLICIES = ("first", "last", "min", "max")
MARGIN = 0.02


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    pixels: bytes   # row-major RGB, top row first

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != 3 * self.width * self.height:
            raise ValueError("pixel buffer does not match dimensions")

    def array(self) -> np.ndarray:
        """Pixels as a (height, width, 3) uint8 array."""
        return np.frombuffer(self.pixels, np.uint8).reshape(self.height, self.width, 3)

    @classmethod
    def from_array(cls, a) -> "RasterImage":
        a = np.ascontiguousarray(a, np.uint8)
        return cls(a.shape[1], a.shape[0], a.tobytes())


def _frame(bbox, width, height):
    """World-to-pixel scale and offset: square pixels, aspect preserved,
    2% margin, picture centred."""
    xmin, ymin, xmax, ymax = bbox
    w = max(xmax - xmin, 1e-300)
    h = max(ymax - ymin, 1e-300)
    mx, my = MARGIN * w, MARGIN * h
    w, h = w + 2 * mx, h + 2 * my
    size = max(w / width, h / height)
    cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
    return size, cx - size * width / 2, cy - size * height / 2


def parameter_raster(defn: CurveDefinition, width: int, height: int,
                     policy: str = "last", *, threads: int = 1) -> np.ndarray:
    """(height, width) array of the chosen parameter per pixel, NaN where
    no sample landed. Row 0 is the top of the picture."""
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    R = expansion_radius(defn).radius
    bbox = bounding_box(defn, radius=R)
    size, x0, y0 = _frame(bbox, width, height)
    # chunks arrive in increasing t, so first/last coincide with min/max
    latest = policy in ("last", "max")
    empty = -np.inf if latest else np.inf
    reduce = np.maximum if latest else np.minimum
    flat = np.full(width * height, empty)
    gap = size / (2.0 * R)
    for chunk in sample_chunks(defn, gap, threads=threads, radius=R):
        keep = ~chunk.on_jump
        if not keep.any():
            continue
        col = np.clip(np.floor((chunk.x[keep] - x0) / size), 0, width - 1).astype(np.int64)
        row = np.clip(np.floor((chunk.y[keep] - y0) / size), 0, height - 1).astype(np.int64)
        reduce.at(flat, (height - 1 - row) * width + col, chunk.t[keep])
    flat[flat == empty] = np.nan
    return flat.reshape(height, width)


def progression_image(defn: CurveDefinition, width: int, height: int,
                      scheme: str = "gray", policy: str = "last", *,
                      threads: int = 1) -> RasterImage:
    """Colour each pixel by the parameter at which the curve visits it.

    Jump connectors are ignored; unvisited pixels are black.
    """
    t = parameter_raster(defn, width, height, policy, threads=threads)
    seen = ~np.isnan(t)
    rgb = np.zeros((height, width, 3), np.uint8)
    if scheme == "gray":
        v = np.round(255.0 * np.clip(t[seen], 0, 1)).astype(np.uint8)
        rgb[seen] = v[:, None]
    else:
        rgb[seen] = np.round(255.0 * colormap(scheme)(t[seen])).astype(np.uint8)
    return RasterImage.from_array(rgb)


def ppm_bytes(img: RasterImage) -> bytes:
    return b"P6\n%d %d\n255\n" % (img.width, img.height) + img.pixels


def write_ppm(img: RasterImage, out) -> None:
    """Binary P6 PPM to a path or a binary stream."""
    data = ppm_bytes(img)
    if hasattr(out, "write"):
        out.write(data)
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def read_ppm(src) -> RasterImage:
    """Parse a binary P6 PPM with maxval 255 (comments allowed)."""
    data = src if isinstance(src, (bytes, bytearray)) else open(src, "rb").read()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("not a binary 8-bit PPM")
    w, h = int(fields[1]), int(fields[2])
    pos += 1  # single whitespace after maxval
    return RasterImage(w, h, bytes(data[pos:pos + 3 * w * h]))
