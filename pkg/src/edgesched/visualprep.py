"""Detection-to-classification image preparation: box expansion, cropping,
and HSV color jitter on 8-bit RGB rasters.

Boxes use half-open pixel coordinates: (x_min, y_min) inclusive,
(x_max, y_max) exclusive, so width = x_max - x_min. Rasters are row-major
RGB24. The HSV convention is 8-bit throughout: S and V live on [0, 255];
H lives on a 256-step wheel (one full turn = 256) and is carried as an
exact float between conversions so untouched hue costs no quantization.
Conversions round half up, i.e. floor(x + 0.5).

The jitter op scales S by alpha and V by beta, clamps to [0, 255], and
leaves H alone. Hue rotation and contrast scaling exist as separate
opt-in helpers; no default pipeline applies them.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import _kernels

DEFAULT_ALPHA_RANGE = (0.7, 1.3)
DEFAULT_BETA_RANGE = (0.7, 1.3)


@dataclass(frozen=True)
class BBox:
    """Half-open pixel box; empty boxes are invalid."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"empty or inverted box: {self}")
        if self.x_min < 0 or self.y_min < 0:
            raise ValueError(f"negative box origin: {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    def contains(self, other: "BBox") -> bool:
        return (
            self.x_min <= other.x_min
            and self.y_min <= other.y_min
            and self.x_max >= other.x_max
            and self.y_max >= other.y_max
        )


@dataclass(frozen=True)
class Raster:
    """Immutable row-major RGB24 image."""

    width: int
    height: int
    data: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"raster must be at least 1x1: {self.width}x{self.height}")
        if len(self.data) != 3 * self.width * self.height:
            raise ValueError(
                f"data length {len(self.data)} != 3*{self.width}*{self.height}"
            )

    def pixel(self, x: int, y: int) -> tuple[int, int, int]:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"pixel ({x}, {y}) outside {self.width}x{self.height}")
        i = 3 * (y * self.width + x)
        return self.data[i], self.data[i + 1], self.data[i + 2]


@dataclass(frozen=True)
class AugParams:
    """Sampled jitter strengths."""

    alpha: float  # saturation scale
    beta: float  # value scale


def expand_box(box: BBox, k: float, width: int, height: int) -> BBox:
    """Grow ``box`` by k/2 of its own size on each side, clipped to the image.

    Fractional growth rounds outward (floor on the low edge, ceil on the
    high edge) so the result always contains the input, as long as the input
    itself lies inside the image.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative: {k}")
    if box.x_max > width or box.y_max > height:
        raise ValueError(f"box {box} exceeds image {width}x{height}")
    dx = k * box.width / 2.0
    dy = k * box.height / 2.0
    return BBox(
        x_min=max(0, math.floor(box.x_min - dx)),
        y_min=max(0, math.floor(box.y_min - dy)),
        x_max=min(width, math.ceil(box.x_max + dx)),
        y_max=min(height, math.ceil(box.y_max + dy)),
    )


def crop(image: Raster, box: BBox) -> Raster:
    """Exact pixel copy of ``box``. The box must lie inside the image."""
    if box.x_max > image.width or box.y_max > image.height:
        raise ValueError(f"box {box} outside image {image.width}x{image.height}")
    w = box.width
    rows = []
    for y in range(box.y_min, box.y_max):
        start = 3 * (y * image.width + box.x_min)
        rows.append(image.data[start : start + 3 * w])
    return Raster(width=w, height=box.height, data=b"".join(rows))


def hsv_scale(image: Raster, alpha: float, beta: float) -> Raster:
    """Scale saturation by ``alpha`` and value by ``beta``, hue untouched.

    Per pixel: convert to 8-bit HSV, S <- clamp(round(alpha * S)),
    V <- clamp(round(beta * V)), convert back. Rounds half up.
    """
    if alpha < 0 or beta < 0:
        raise ValueError(f"scales must be non-negative: alpha={alpha}, beta={beta}")
    buf = bytearray(image.data)
    _kernels.hsv_scale_rgb(buf, alpha, beta)
    return Raster(width=image.width, height=image.height, data=bytes(buf))


def sample_aug(
    rng: random.Random,
    alpha_range: tuple[float, float] = DEFAULT_ALPHA_RANGE,
    beta_range: tuple[float, float] = DEFAULT_BETA_RANGE,
) -> AugParams:
    """Draw jitter strengths uniformly from the given ranges (alpha first)."""
    a_lo, a_hi = alpha_range
    b_lo, b_hi = beta_range
    if not (0 <= a_lo <= a_hi and 0 <= b_lo <= b_hi):
        raise ValueError(f"bad ranges: {alpha_range}, {beta_range}")
    return AugParams(alpha=rng.uniform(a_lo, a_hi), beta=rng.uniform(b_lo, b_hi))


def rgb_to_hsv(r: int, g: int, b: int) -> tuple[float, int, int]:
    """Per-pixel conversion; see the module docstring for the convention."""
    for name, v in (("r", r), ("g", g), ("b", b)):
        if not 0 <= v <= 255:
            raise ValueError(f"{name} out of [0, 255]: {v}")
    return _kernels.rgb_to_hsv_px(r, g, b)


def hsv_to_rgb(h: float, s: int, v: int) -> tuple[int, int, int]:
    """Inverse per-pixel conversion."""
    if not 0.0 <= h < 256.0:
        raise ValueError(f"h out of [0, 256): {h}")
    if not (0 <= s <= 255 and 0 <= v <= 255):
        raise ValueError(f"s/v out of [0, 255]: s={s}, v={v}")
    return _kernels.hsv_to_rgb_px(h, s, v)


def hue_rotate(image: Raster, delta: float) -> Raster:
    """Opt-in extra: rotate hue by ``delta`` steps on the 256 wheel."""
    buf = bytearray(image.data)
    for i in range(0, len(buf), 3):
        h, s, v = _kernels.rgb_to_hsv_px(buf[i], buf[i + 1], buf[i + 2])
        h = (h + delta) % 256.0
        buf[i], buf[i + 1], buf[i + 2] = _kernels.hsv_to_rgb_px(h, s, v)
    return Raster(width=image.width, height=image.height, data=bytes(buf))


def contrast_scale(image: Raster, factor: float) -> Raster:
    """Opt-in extra: scale each channel about mid-gray 128, clamped."""
    if factor < 0:
        raise ValueError(f"factor must be non-negative: {factor}")
    table = bytes(
        min(255, max(0, int(math.floor((v - 128) * factor + 128 + 0.5))))
        for v in range(256)
    )
    return Raster(width=image.width, height=image.height, data=image.data.translate(table))


# --- trivial uncompressed raster file format (binary PPM, P6) --------------


def write_ppm(image: Raster, path: str):
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.data)


def read_ppm(path: str) -> Raster:
    with open(path, "rb") as fh:
        blob = fh.read()
    fields = []
    pos = 0
    # Header: magic, width, height, maxval; '#' comments run to end of line.
    while len(fields) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"truncated PPM header in {path}")
        fields.append(blob[start:pos])
    pos += 1  # single whitespace byte after maxval
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM (P6) file: {path}")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    data = blob[pos : pos + 3 * width * height]
    if len(data) != 3 * width * height:
        raise ValueError(f"truncated pixel data in {path}")
    return Raster(width=width, height=height, data=data)
