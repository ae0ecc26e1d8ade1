"""Core value types: pixel rasters, style records, and the paired sample tuple.

Pixels live in float64 [0,1] everywhere inside the library; 8-bit only at
file boundaries (see png_io). Quantization rounds half up so golden files are
bit-exact. All types are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DimMismatch

_RANGE_TOL = 1e-6


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Image:
    """H x W x C raster, float64 in [0,1], C in {1, 3}, row-major."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"expected 2-D or 3-D array, got {arr.ndim}-D")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError("image must be at least 1x1")
        if c not in (1, 3):
            raise ValueError(f"expected 1 or 3 channels, got {c}")
        if not np.isfinite(arr).all():
            raise ValueError("pixel values must be finite")
        lo, hi = float(arr.min(initial=0.0)), float(arr.max(initial=0.0))
        if lo < -_RANGE_TOL or hi > 1.0 + _RANGE_TOL:
            raise ValueError(f"pixel values outside [0,1]: min={lo}, max={hi}")
        # tolerate float dust from upstream arithmetic, then pin the range
        arr = np.clip(arr, 0.0, 1.0)
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def full(cls, height: int, width: int, value: float, channels: int = 3) -> "Image":
        return cls(np.full((height, width, channels), float(value)))


@dataclass(frozen=True)
class Mask:
    """H x W binary raster; 1 marks covered pixels."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"expected 2-D array, got {arr.ndim}-D")
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        else:
            arr = arr.astype(np.uint8, casting="unsafe")
            if not np.isin(np.asarray(self.data), (0, 1)).all():
                raise ValueError("mask values must all be 0 or 1")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)


def _check_color(name: str, color: tuple[float, float, float]) -> None:
    if len(color) != 3 or not all(0.0 <= c <= 1.0 for c in color):
        raise ValueError(f"{name} must be three components in [0,1], got {color!r}")


@dataclass(frozen=True)
class Border:
    """Outline drawn beneath the glyph fill."""

    color: tuple[float, float, float]
    width: int = 1

    def __post_init__(self) -> None:
        _check_color("border color", self.color)
        if self.width < 1:
            raise ValueError(f"border width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class Shadow:
    """Drop shadow drawn beneath fill and border."""

    offset: tuple[int, int]  # (dx, dy) pixels
    color: tuple[float, float, float] = (0.0, 0.0, 0.0)
    alpha: float = 0.5

    def __post_init__(self) -> None:
        _check_color("shadow color", self.color)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"shadow alpha must be in [0,1], got {self.alpha}")
        if len(self.offset) != 2:
            raise ValueError("shadow offset must be an (dx, dy) pair")


@dataclass(frozen=True)
class TextStyle:
    """Full parameterization of one styled text rendering.

    curve_amplitude/curve_period bend the baseline per glyph; rotation and
    perspective_jitter are applied to the finished layer; blur_sigma softens
    it. opacity scales the whole layer's coverage.
    """

    font_id: int = 0
    size: int = 32
    fill_color: tuple[float, float, float] = (0.0, 0.0, 0.0)
    border: Optional[Border] = None
    shadow: Optional[Shadow] = None
    opacity: float = 1.0
    rotation: float = 0.0
    curve_amplitude: float = 0.0
    curve_period: float = 128.0
    perspective_jitter: tuple[tuple[float, float], ...] = (
        (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
    )
    blur_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError(f"opacity must be in [0,1], got {self.opacity}")
        if self.size <= 0:
            raise ValueError(f"size must be positive, got {self.size}")
        _check_color("fill_color", self.fill_color)
        if not abs(self.rotation) <= 45.0:  # NaN fails too
            raise ValueError(f"rotation must be within ±45 degrees, got {self.rotation}")
        if self.blur_sigma < 0.0:
            raise ValueError(f"blur_sigma must be non-negative, got {self.blur_sigma}")
        if self.curve_period <= 0.0:
            raise ValueError(f"curve_period must be positive, got {self.curve_period}")
        if len(self.perspective_jitter) != 4:
            raise ValueError("perspective_jitter needs exactly 4 corner offsets")


@dataclass(frozen=True)
class GenConfig:
    """Dataset generation knobs. Directory fields default to bundled assets."""

    canvas: tuple[int, int] = (64, 256)  # (height, width)
    font_dir: Optional[Path] = None
    background_dir: Optional[Path] = None
    lexicon: Optional[Path] = None
    opacity_range: tuple[float, float] = (0.6, 1.0)
    rotation_range: float = 12.0
    curve_probability: float = 0.3
    blur_probability: float = 0.25
    master_seed: int = 0

    def __post_init__(self) -> None:
        h, w = self.canvas
        if h < 8 or w < 8:
            raise ValueError(f"canvas must be at least 8x8, got {self.canvas}")
        lo, hi = self.opacity_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(f"opacity_range must satisfy 0 <= lo <= hi <= 1, got {self.opacity_range}")
        for name in ("curve_probability", "blur_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {p}")
        if not 0.0 <= self.rotation_range <= 45.0:
            raise ValueError(
                f"rotation_range must be in [0, 45] degrees, got {self.rotation_range}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SampleTuple:
    """One paired training example: seven aligned rasters plus the word pair.

    i_s    styled source word over the background
    i_t    target word in the standard format (fixed font on gray)
    t_f    styled target word over the same background
    t_b    the clean background itself
    t_fg   styled target word over neutral gray
    t_sk   skeleton of the target stroke mask
    mask_t target stroke mask, mask_s source stroke mask
    """

    i_s: Image
    i_t: Image
    t_f: Image
    t_b: Image
    t_fg: Image
    t_sk: Mask
    mask_t: Mask
    mask_s: Mask
    word_source: str = ""
    word_target: str = ""

    RASTER_FIELDS = ("i_s", "i_t", "t_f", "t_b", "t_fg", "t_sk", "mask_t", "mask_s")


def to_bytes(img: Image) -> np.ndarray:
    """Quantize to uint8 with round-half-up: b = floor(255*v + 0.5)."""
    return np.floor(img.data * 255.0 + 0.5).astype(np.uint8)


def from_bytes(raster: np.ndarray) -> Image:
    """Inverse of to_bytes: v = b / 255. Round trip error <= 1/510 per value."""
    arr = np.asarray(raster)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 raster, got {arr.dtype}")
    return Image(arr.astype(np.float64) / 255.0)


def validate_tuple(sample: SampleTuple) -> list[str]:
    """Return the names of every violated SampleTuple invariant.

    Empty list iff the tuple is valid. Violations are data, not errors:
    - "dims_consistent":   all rasters share one height and width
    - "skeleton_subset":   every skeleton pixel lies inside mask_t
    - "background_match":  i_s and t_f agree bit-exactly outside mask_s|mask_t
    """
    violations: list[str] = []
    dims = {(getattr(sample, f).height, getattr(sample, f).width)
            for f in SampleTuple.RASTER_FIELDS}
    if len(dims) != 1:
        violations.append("dims_consistent")
        return violations  # pixelwise checks are meaningless on ragged dims

    if np.any(sample.t_sk.data & ~sample.mask_t.data & 1):
        violations.append("skeleton_subset")

    outside = ~(sample.mask_s.as_bool() | sample.mask_t.as_bool())
    if not np.array_equal(sample.i_s.data[outside], sample.t_f.data[outside]):
        violations.append("background_match")
    return violations
