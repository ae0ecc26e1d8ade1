"""Geometric augmentations applied consistently to color and coverage.

Rotation and perspective warps resample the layer's premultiplied color
together with its alpha, so antialiased stroke edges never pick up halo
colors from the empty region. All sampling is bilinear with out-of-bounds
reading as alpha 0. Blur is a separable normalized Gaussian.

Every function here is pure and uses only elementwise numpy arithmetic with
a fixed summation order, so results are reproducible bit-for-bit no matter
how many worker threads the caller runs.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .data_model import Image
from .errors import AngleOutOfRange, DegenerateHomography, NegativeSigma
from .text_render import GlyphLayer

_MAX_ROTATION = 45.0
_COND_LIMIT = 1e10


class _BilinearGather:
    """Bilinear taps for one coordinate grid, reusable across planes.

    Sampling reads a zero border outside the plane, so out-of-bounds
    coordinates fade to 0 (alpha 0 for layers).
    """

    def __init__(self, shape: tuple[int, int], ys: np.ndarray, xs: np.ndarray) -> None:
        h, w = shape
        self._shape = shape
        yc = np.clip(ys, -1.0, float(h))
        xc = np.clip(xs, -1.0, float(w))
        y0 = np.floor(yc).astype(np.int64)
        x0 = np.floor(xc).astype(np.int64)
        self._fy = yc - y0
        self._fx = xc - x0
        self._y0 = y0 + 1  # into padded coordinates; the border ring is zero
        self._x0 = x0 + 1
        self._y1 = np.minimum(self._y0 + 1, h + 1)
        self._x1 = np.minimum(self._x0 + 1, w + 1)

    def sample(self, plane: np.ndarray) -> np.ndarray:
        h, w = self._shape
        padded = np.zeros((h + 2, w + 2), dtype=np.float64)
        padded[1:-1, 1:-1] = plane
        fx, fy = self._fx, self._fy
        top = padded[self._y0, self._x0] * (1.0 - fx) + padded[self._y0, self._x1] * fx
        bottom = padded[self._y1, self._x0] * (1.0 - fx) + padded[self._y1, self._x1] * fx
        return top * (1.0 - fy) + bottom * fy


def _bilinear_zero(plane: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample a 2-D plane at float coords; outside the plane reads as 0."""
    return _BilinearGather(plane.shape, ys, xs).sample(plane)


def _resample_layer(layer: GlyphLayer, ys: np.ndarray, xs: np.ndarray) -> GlyphLayer:
    """Warp a layer through source-coordinate grids (premultiplied sampling)."""
    gather = _BilinearGather(layer.alpha.shape, ys, xs)
    premult = layer.color * layer.alpha[:, :, None]
    alpha = gather.sample(layer.alpha)
    channels = [gather.sample(premult[:, :, c]) for c in range(3)]
    safe = np.where(alpha > 1e-12, alpha, 1.0)
    color = np.stack(channels, axis=-1) / safe[:, :, None]
    color = np.where(alpha[:, :, None] > 1e-12, color, 0.0)
    return GlyphLayer(np.clip(color, 0.0, 1.0), np.clip(alpha, 0.0, 1.0))


def rotate(layer: GlyphLayer, degrees: float) -> GlyphLayer:
    """Rotate a layer about the canvas center.

    degrees == 0 returns the layer object unchanged (bit-identical).
    """
    if not math.isfinite(degrees) or abs(degrees) > _MAX_ROTATION:
        raise AngleOutOfRange(f"|degrees| must be <= {_MAX_ROTATION}, got {degrees}")
    if degrees == 0.0:
        return layer
    h, w = layer.alpha.shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dx = xx - cx
    dy = yy - cy
    xs = cx + cos_t * dx + sin_t * dy
    ys = cy - sin_t * dx + cos_t * dy
    return _resample_layer(layer, ys, xs)


def _solve_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """3x3 projective map sending each src point to its dst point (DLT)."""
    rows = []
    rhs = []
    for (sx, sy), (dx, dy) in zip(src, dst):
        rows.append([sx, sy, 1.0, 0.0, 0.0, 0.0, -dx * sx, -dx * sy])
        rhs.append(dx)
        rows.append([0.0, 0.0, 0.0, sx, sy, 1.0, -dy * sx, -dy * sy])
        rhs.append(dy)
    a = np.asarray(rows, dtype=np.float64)
    if np.linalg.cond(a) > _COND_LIMIT:
        raise DegenerateHomography("corner correspondence does not define a projective map")
    try:
        h = np.linalg.solve(a, np.asarray(rhs, dtype=np.float64))
    except np.linalg.LinAlgError as exc:
        raise DegenerateHomography(str(exc)) from exc
    return np.array([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])


def perspective_warp(
    layer: GlyphLayer,
    corner_offsets: Sequence[tuple[float, float]],
) -> GlyphLayer:
    """Warp so the canvas corners land on their offset positions.

    corner_offsets are four (dx, dy) displacements for the top-left,
    top-right, bottom-right, and bottom-left corners in that order. Each
    component must stay within 20% of the smaller canvas dimension. All-zero
    offsets return the layer object unchanged.
    """
    if len(corner_offsets) != 4:
        raise ValueError(f"expected 4 corner offsets, got {len(corner_offsets)}")
    h, w = layer.alpha.shape
    limit = 0.2 * min(h, w)
    offsets = np.asarray(corner_offsets, dtype=np.float64)
    if np.abs(offsets).max(initial=0.0) > limit:
        raise ValueError(f"corner offsets must stay within +/-{limit:.1f}px")
    if not offsets.any():
        return layer
    corners = np.array(
        [[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, h - 1.0], [0.0, h - 1.0]])
    moved = corners + offsets
    # Map each output pixel back to its source position: dst -> src.
    inverse = _solve_homography(moved, corners)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    den = inverse[2, 0] * xx + inverse[2, 1] * yy + inverse[2, 2]
    den = np.where(np.abs(den) < 1e-12, 1e-12, den)
    xs = (inverse[0, 0] * xx + inverse[0, 1] * yy + inverse[0, 2]) / den
    ys = (inverse[1, 0] * xx + inverse[1, 1] * yy + inverse[1, 2]) / den
    return _resample_layer(layer, ys, xs)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    if sigma < 0:
        raise NegativeSigma(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.array([1.0])
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _blur_axis(arr: np.ndarray, taps: np.ndarray, axis: int, *, edge_clamp: bool) -> np.ndarray:
    radius = len(taps) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge" if edge_clamp else "constant")
    out = np.zeros_like(arr, dtype=np.float64)
    index: list[slice] = [slice(None)] * arr.ndim
    for k, weight in enumerate(taps):
        index[axis] = slice(k, k + arr.shape[axis])
        out += weight * padded[tuple(index)]
    return out


def _blur_plane(plane: np.ndarray, taps: np.ndarray, *, edge_clamp: bool) -> np.ndarray:
    out = _blur_axis(plane, taps, 0, edge_clamp=edge_clamp)
    return _blur_axis(out, taps, 1, edge_clamp=edge_clamp)


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Separable Gaussian blur with edge-clamp padding; sigma 0 is identity."""
    if sigma < 0:
        raise NegativeSigma(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    taps = gaussian_kernel(sigma)
    blurred = np.stack(
        [_blur_plane(img.data[:, :, c], taps, edge_clamp=True) for c in range(img.channels)],
        axis=-1)
    return Image(np.clip(blurred, 0.0, 1.0))


def blur_layer(layer: GlyphLayer, sigma: float) -> GlyphLayer:
    """Blur a glyph layer (premultiplied color and alpha, same kernel).

    sigma 0 returns the layer object unchanged.
    """
    if sigma < 0:
        raise NegativeSigma(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return layer
    taps = gaussian_kernel(sigma)
    alpha = np.clip(_blur_plane(layer.alpha, taps, edge_clamp=False), 0.0, 1.0)
    premult = layer.color * layer.alpha[:, :, None]
    channels = [_blur_plane(premult[:, :, c], taps, edge_clamp=False) for c in range(3)]
    safe = np.where(alpha > 1e-12, alpha, 1.0)
    color = np.stack(channels, axis=-1) / safe[:, :, None]
    color = np.where(alpha[:, :, None] > 1e-12, color, 0.0)
    return GlyphLayer(np.clip(color, 0.0, 1.0), alpha)
