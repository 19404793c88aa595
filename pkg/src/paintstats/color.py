"""Nine-color proportion profiles of painting images.

Pixels are classified in HSV space (hue 0..180 half-degrees, saturation and
value 0..255) against fixed per-color boxes. Red owns both ends of the hue
circle, so it gets two boxes. A pixel can sit in more than one box (black's
value ceiling touches the chromatic floor at V=46); profile accounting
resolves that with a fixed precedence order, while color_mask stays a plain
box test.

Per color, the measured proportion is: box mask -> 3x3 dilation (twice by
default) -> fill the interior of every connected component's outer contour
-> filled pixels / image pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import ndimage

# Profile vector order (reports, serialization).
COLOR_ORDER = (
    "red",
    "orange",
    "yellow",
    "green",
    "cyan",
    "blue",
    "purple",
    "black",
    "white",
)

# Tie-break order for pixels matching several boxes.
CLASSIFY_PRECEDENCE = (
    "black",
    "white",
    "red",
    "orange",
    "yellow",
    "green",
    "cyan",
    "blue",
    "purple",
)

# (h_min, h_max, s_min, s_max, v_min, v_max), all bounds inclusive.
COLOR_BOXES: dict[str, tuple[tuple[int, int, int, int, int, int], ...]] = {
    "red": ((0, 10, 43, 255, 46, 255), (156, 180, 43, 255, 46, 255)),
    "orange": ((11, 25, 43, 255, 46, 255),),
    "yellow": ((26, 34, 43, 255, 46, 255),),
    "green": ((35, 77, 43, 255, 46, 255),),
    "cyan": ((78, 99, 43, 255, 46, 255),),
    "blue": ((100, 124, 43, 255, 46, 255),),
    "purple": ((125, 155, 43, 255, 46, 255),),
    "black": ((0, 180, 0, 255, 0, 46),),
    "white": ((0, 180, 0, 30, 221, 255),),
}

_DILATION_KERNEL = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class HsvPixel:
    h: int
    s: int
    v: int

    def __post_init__(self):
        if not 0 <= self.h <= 180:
            raise ValueError(f"hue out of range: {self.h}")
        if not 0 <= self.s <= 255:
            raise ValueError(f"saturation out of range: {self.s}")
        if not 0 <= self.v <= 255:
            raise ValueError(f"value out of range: {self.v}")


@dataclass(frozen=True)
class ColorProfile:
    """Area ratio per color. Ratios need not sum to 1: low-saturation
    mid-value pixels match no box, and dilation inflates masks."""

    proportions: Mapping[str, float]

    def __post_init__(self):
        if tuple(self.proportions.keys()) != COLOR_ORDER:
            object.__setattr__(
                self,
                "proportions",
                {c: float(self.proportions[c]) for c in COLOR_ORDER},
            )
        for color, ratio in self.proportions.items():
            if not 0.0 <= ratio <= 1.0:
                raise ValueError(f"{color} ratio out of range: {ratio}")

    def __getitem__(self, color: str) -> float:
        return self.proportions[color]

    def to_dict(self) -> dict:
        return dict(self.proportions)

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "ColorProfile":
        return cls({c: data[c] for c in COLOR_ORDER})


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Convert one RGB pixel to the 0..180 / 0..255 / 0..255 HSV scale."""
    for name, channel in (("r", r), ("g", g), ("b", b)):
        if not 0 <= channel <= 255:
            raise ValueError(f"channel {name} out of range: {channel}")
    mx = max(r, g, b)
    mn = min(r, g, b)
    delta = mx - mn
    v = mx
    s = 0 if mx == 0 else round(255 * delta / mx)
    if delta == 0:
        degrees = 0.0
    elif mx == r:
        degrees = 60.0 * (((g - b) / delta) % 6)
    elif mx == g:
        degrees = 60.0 * ((b - r) / delta + 2)
    else:
        degrees = 60.0 * ((r - g) / delta + 4)
    return HsvPixel(h=round(degrees / 2), s=s, v=v)


def image_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized rgb_to_hsv over an HxWx3 uint8 raster."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected HxWx3 raster, got shape {rgb.shape}")
    channels = rgb.astype(np.float64)
    r, g, b = channels[..., 0], channels[..., 1], channels[..., 2]
    mx = channels.max(axis=2)
    mn = channels.min(axis=2)
    delta = mx - mn
    safe_delta = np.where(delta == 0, 1.0, delta)
    degrees = np.where(
        mx == r,
        60.0 * (((g - b) / safe_delta) % 6),
        np.where(
            mx == g,
            60.0 * ((b - r) / safe_delta + 2),
            60.0 * ((r - g) / safe_delta + 4),
        ),
    )
    degrees = np.where(delta == 0, 0.0, degrees)
    safe_mx = np.where(mx == 0, 1.0, mx)
    s = np.where(mx == 0, 0.0, np.rint(255.0 * delta / safe_mx))
    hsv = np.stack([np.rint(degrees / 2.0), s, mx], axis=2)
    return hsv.astype(np.uint8)


def _in_box(h, s, v, box):
    h_min, h_max, s_min, s_max, v_min, v_max = box
    return (
        (h >= h_min) & (h <= h_max)
        & (s >= s_min) & (s <= s_max)
        & (v >= v_min) & (v <= v_max)
    )


def _box_test(h, s, v, color: str):
    result = False
    for box in COLOR_BOXES[color]:
        result = result | _in_box(h, s, v, box)
    return result


def classify_pixel(p: HsvPixel) -> str | None:
    """Label of the first precedence-ordered box containing the pixel,
    or None when no box matches (unclassified)."""
    for color in CLASSIFY_PRECEDENCE:
        if _box_test(p.h, p.s, p.v, color):
            return color
    return None


def classify_image(hsv: np.ndarray) -> np.ndarray:
    """Per-pixel label indices into COLOR_ORDER; -1 where unclassified."""
    h = hsv[..., 0].astype(np.int16)
    s = hsv[..., 1].astype(np.int16)
    v = hsv[..., 2].astype(np.int16)
    labels = np.full(hsv.shape[:2], -1, dtype=np.int8)
    for color in CLASSIFY_PRECEDENCE:
        hit = (labels == -1) & _box_test(h, s, v, color)
        labels[hit] = COLOR_ORDER.index(color)
    return labels


def color_mask(hsv_image: np.ndarray, label: str) -> np.ndarray:
    """Plain box-membership mask (no precedence)."""
    if label not in COLOR_BOXES:
        raise ValueError(f"unknown color label: {label}")
    if hsv_image.size == 0:
        raise ValueError("zero-area image")
    h = hsv_image[..., 0].astype(np.int16)
    s = hsv_image[..., 1].astype(np.int16)
    v = hsv_image[..., 2].astype(np.int16)
    return _box_test(h, s, v, label)


def dilate(mask: np.ndarray, iterations: int) -> np.ndarray:
    """Binary dilation with the full 3x3 element; outside the image is 0."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if iterations == 0 or not mask.any():
        return mask.copy()
    return ndimage.binary_dilation(
        mask, structure=_DILATION_KERNEL, iterations=iterations
    )


def fill_contours(mask: np.ndarray) -> np.ndarray:
    """Fill the interior of each 8-connected component's outer contour."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return mask.copy()
    labels, count = ndimage.label(mask, structure=_DILATION_KERNEL)
    filled = np.zeros_like(mask)
    for index, window in enumerate(ndimage.find_objects(labels), start=1):
        component = labels[window] == index
        filled[window] |= ndimage.binary_fill_holes(component)
    return filled


def contour_area_ratio(mask: np.ndarray, original_pixel_count: int) -> float:
    """Filled-contour area divided by the original pixel count, in [0, 1]."""
    if original_pixel_count <= 0:
        raise ValueError("original_pixel_count must be positive")
    filled = fill_contours(mask)
    ratio = float(np.count_nonzero(filled)) / float(original_pixel_count)
    return min(max(ratio, 0.0), 1.0)


def color_profile(rgb: np.ndarray, dilation_iterations: int = 2) -> ColorProfile:
    """Measure all nine color proportions of an RGB raster.

    Accounting uses the precedence-resolved classification, so with dilation
    disabled the nine ratios sum to at most 1.
    """
    rgb = np.asarray(rgb)
    if rgb.size == 0:
        raise ValueError("zero-area image")
    hsv = image_to_hsv(rgb)
    labels = classify_image(hsv)
    total = labels.size
    proportions = {}
    for index, color in enumerate(COLOR_ORDER):
        mask = labels == index
        mask = dilate(mask, dilation_iterations)
        proportions[color] = contour_area_ratio(mask, total)
    return ColorProfile(proportions)


def load_image(path: str | Path, max_side: int | None = 1024) -> np.ndarray:
    """Decode a PNG/JPEG file to an RGB uint8 raster.

    Images whose larger side exceeds max_side are downscaled to it
    (aspect-preserving); pass None to keep the native resolution.
    """
    from PIL import Image

    with Image.open(path) as image:
        image = image.convert("RGB")
        if max_side is not None and max(image.size) > max_side:
            scale = max_side / max(image.size)
            new_size = (
                max(1, round(image.size[0] * scale)),
                max(1, round(image.size[1] * scale)),
            )
            image = image.resize(new_size, resample=Image.LANCZOS)
        return np.asarray(image, dtype=np.uint8)


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Debug dump of a binary mask as a black/white PNG."""
    from PIL import Image

    data = (np.asarray(mask, dtype=np.uint8) * 255)
    Image.fromarray(data, mode="L").save(path, format="PNG")
