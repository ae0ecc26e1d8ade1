"""Ground-truth derivation: stroke masks, skeletons, and full sample tuples.

Everything a supervised editing model needs as a target is derived here by
construction rather than by annotation: the rasterizer's alpha coverage
yields exact stroke masks, thinning yields stroke skeletons, and the
compositing order guarantees the clean-background identity (source and
edited images agree bit-for-bit outside the text regions).
"""

from __future__ import annotations

import numpy as np

from .data_model import Image, Mask, SampleTuple, TextStyle
from .errors import DimMismatch
from .geometry import blur_layer, perspective_warp, rotate
from .text_render import (
    FontRasterizer,
    GlyphLayer,
    composite,
    rasterize_text,
    render_content_image,
)

# Masks used for the tuple invariants cover every pixel the glyph touches,
# including antialiased fringe: threshold 0 with the strict > comparison.
_SUPPORT_THRESHOLD = 0.0


def extract_mask(alpha: np.ndarray, threshold: float = 0.5) -> Mask:
    """Binarize a coverage raster: 1 where alpha > threshold (strict)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 2:
        raise DimMismatch(f"coverage raster must be 2-D, got shape {alpha.shape}")
    return Mask((alpha > threshold).astype(np.uint8))


def invert_mask(m: Mask) -> Mask:
    return Mask(1 - m.data)


def mask_multiply(img: Image, m: Mask) -> Image:
    """Zero the image outside the mask (mask broadcast over channels)."""
    if img.data.shape[:2] != m.data.shape:
        raise DimMismatch(f"image {img.data.shape[:2]} vs mask {m.data.shape}")
    return Image(img.data * m.data[:, :, None])


def _neighbor_planes(m: np.ndarray) -> tuple[np.ndarray, ...]:
    """The 8 neighbor planes of every pixel, clockwise from north."""
    p = np.pad(m, 1)
    north = p[0:-2, 1:-1]
    north_east = p[0:-2, 2:]
    east = p[1:-1, 2:]
    south_east = p[2:, 2:]
    south = p[2:, 1:-1]
    south_west = p[2:, 0:-2]
    west = p[1:-1, 0:-2]
    north_west = p[0:-2, 0:-2]
    return north, north_east, east, south_east, south, south_west, west, north_west


def _thinning_pass(m: np.ndarray, first_subiteration: bool) -> np.ndarray:
    """One Zhang-Suen subiteration; returns the boolean deletion set."""
    n, ne, e, se, s, sw, w, nw = _neighbor_planes(m)
    ring = (n, ne, e, se, s, sw, w, nw, n)
    count = n + ne + e + se + s + sw + w + nw
    transitions = np.zeros_like(count)
    for a, b in zip(ring[:-1], ring[1:]):
        transitions += (a == 0) & (b == 1)
    if first_subiteration:
        gate1 = n & e & s
        gate2 = e & s & w
    else:
        gate1 = n & e & w
        gate2 = n & s & w
    return (
        (m == 1)
        & (count >= 2) & (count <= 6)
        & (transitions == 1)
        & (gate1 == 0) & (gate2 == 0)
    )


def skeletonize(m: Mask) -> Mask:
    """Thin a mask to 1px-wide strokes (Zhang-Suen, iterated to fixpoint).

    The output is always a subset of the input; already-thin structures
    (including a single pixel) pass through unchanged, which also makes the
    operation idempotent.
    """
    data = m.data
    ys, xs = np.nonzero(data)
    if ys.size == 0:
        return Mask(np.zeros_like(data))
    # Everything outside the covered bounding box is zero padding either
    # way, so thinning the crop is exactly thinning the whole raster.
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    crop = data[y0:y1, x0:x1].astype(np.uint8)
    while True:
        changed = False
        for first in (True, False):
            doomed = _thinning_pass(crop, first)
            if doomed.any():
                crop[doomed] = 0
                changed = True
        if not changed:
            break
    out = np.zeros_like(data)
    out[y0:y1, x0:x1] = crop
    return Mask(out)


def render_styled(
    text: str,
    style: TextStyle,
    canvas: tuple[int, int],
    rasterizer: FontRasterizer,
) -> GlyphLayer:
    """Full styled render: rasterize, then rotate, warp, and blur per style.

    Transform stages with neutral parameters are skipped outright, so a
    style without rotation/perspective/blur yields the bare rasterization
    bit-for-bit.
    """
    layer = rasterize_text(text, style, canvas, rasterizer)
    layer = rotate(layer, style.rotation)
    layer = perspective_warp(layer, style.perspective_jitter)
    layer = blur_layer(layer, style.blur_sigma)
    return layer


def assemble_sample(
    bg: Image,
    style: TextStyle,
    word_source: str,
    word_target: str,
    rasterizer: FontRasterizer,
) -> SampleTuple:
    """Build one paired training tuple from a background, style, and word pair.

    Both words are rendered with the identical style and composited over the
    same background, so the only difference between the source image and the
    edited target image is the text itself. Stroke masks cover the full
    support of the rendered alpha (threshold 0), which is what makes the
    outside-the-union bit-identity checkable, and the skeleton is thinned
    from the target mask.
    """
    if bg.channels != 3:
        raise DimMismatch(f"background must have 3 channels, got {bg.channels}")
    canvas = (bg.height, bg.width)
    glyph_s = render_styled(word_source, style, canvas, rasterizer)
    glyph_t = render_styled(word_target, style, canvas, rasterizer)

    mask_s = extract_mask(glyph_s.alpha, _SUPPORT_THRESHOLD)
    mask_t = extract_mask(glyph_t.alpha, _SUPPORT_THRESHOLD)

    neutral = Image.full(bg.height, bg.width, 0.5, 3)
    return SampleTuple(
        i_s=composite(glyph_s, bg),
        i_t=render_content_image(word_target, canvas),
        t_f=composite(glyph_t, bg),
        t_b=bg,
        t_fg=composite(glyph_t, neutral),
        t_sk=skeletonize(mask_t),
        mask_t=mask_t,
        mask_s=mask_s,
        word_source=word_source,
        word_target=word_target,
    )
