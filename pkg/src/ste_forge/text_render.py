"""Glyph rasterization and alpha-over compositing.

Text is rendered into a GlyphLayer: a flat color plane plus an exact alpha
coverage plane. Keeping coverage separate from color is what lets the ground
truth pipeline derive stroke masks for free. Rendering is deterministic:
no timestamps, no global RNG, identical inputs give bit-identical layers.
"""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Protocol, Sequence

import numpy as np
from PIL import ImageDraw, ImageFont
from PIL import Image as PilImage
from scipy import ndimage

from . import assets
from .charset import RENDERABLE
from .data_model import Image, TextStyle
from .errors import (
    DimMismatch,
    EmptyText,
    TextWiderThanCanvas,
    UnknownFont,
    UnsupportedCharacter,
)

_SHRINK_FLOOR = 8  # px; below this a word is declared unfit for the canvas


@dataclass(frozen=True)
class GlyphLayer:
    """Rendered text: color (H, W, 3) and alpha coverage (H, W), both [0,1]."""

    color: np.ndarray
    alpha: np.ndarray

    def __post_init__(self) -> None:
        color = np.asarray(self.color, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if color.ndim != 3 or color.shape[2] != 3:
            raise ValueError(f"color must be (H, W, 3), got {color.shape}")
        if alpha.shape != color.shape[:2]:
            raise DimMismatch(f"alpha {alpha.shape} does not match color {color.shape[:2]}")
        if alpha.min(initial=0.0) < -1e-9 or alpha.max(initial=0.0) > 1.0 + 1e-9:
            raise ValueError("alpha values must lie in [0,1]")
        color = np.clip(color, 0.0, 1.0)
        alpha = np.clip(alpha, 0.0, 1.0)
        color.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "color", color)
        object.__setattr__(self, "alpha", alpha)

    @property
    def height(self) -> int:
        return self.alpha.shape[0]

    @property
    def width(self) -> int:
        return self.alpha.shape[1]


class GlyphBitmap(NamedTuple):
    """One rasterized glyph: coverage tile plus placement metrics.

    (dx, dy) position the tile's top-left corner relative to the pen point
    on the line top; advance moves the pen to the next glyph.
    """

    bitmap: np.ndarray  # (h, w) float64 coverage in [0,1]; may be 0x0
    dx: int
    dy: int
    advance: float


class FontRasterizer(Protocol):
    """Font rasterization provider: loads font bytes, rasterizes glyphs."""

    @property
    def font_count(self) -> int: ...

    def line_metrics(self, font_id: int, size: int) -> tuple[int, int]:
        """(ascent, descent) of the line box in pixels."""
        ...

    def glyph(self, font_id: int, size: int, ch: str) -> GlyphBitmap: ...

    def text_width(self, font_id: int, size: int, text: str) -> float:
        """Ink width of a whole run, for canvas-fit checks."""
        ...


class PillowRasterizer:
    """FontRasterizer backed by Pillow's FreeType bindings.

    Fonts are loaded from bytes once; size-specific faces and glyph tiles
    are cached per instance. Instances are cheap; give each worker thread
    its own rather than sharing.
    """

    def __init__(self, font_paths: Sequence[Path | str]) -> None:
        self._paths = [Path(p) for p in font_paths]
        self._bytes = [p.read_bytes() for p in self._paths]
        self._faces: dict[tuple[int, int], ImageFont.FreeTypeFont] = {}
        self._glyphs: dict[tuple[int, int, str], GlyphBitmap] = {}

    @property
    def font_count(self) -> int:
        return len(self._bytes)

    def font_name(self, font_id: int) -> str:
        return self._paths[font_id].name

    def _face(self, font_id: int, size: int) -> ImageFont.FreeTypeFont:
        if not 0 <= font_id < len(self._bytes):
            raise UnknownFont(f"font_id {font_id} not in [0, {len(self._bytes)})")
        key = (font_id, size)
        face = self._faces.get(key)
        if face is None:
            face = ImageFont.truetype(io.BytesIO(self._bytes[font_id]), size)
            self._faces[key] = face
        return face

    def line_metrics(self, font_id: int, size: int) -> tuple[int, int]:
        return self._face(font_id, size).getmetrics()

    def text_width(self, font_id: int, size: int, text: str) -> float:
        left, _, right, _ = self._face(font_id, size).getbbox(text)
        return float(right - left)

    def glyph(self, font_id: int, size: int, ch: str) -> GlyphBitmap:
        key = (font_id, size, ch)
        cached = self._glyphs.get(key)
        if cached is not None:
            return cached
        face = self._face(font_id, size)
        left, top, right, bottom = face.getbbox(ch)
        advance = float(face.getlength(ch))
        if right <= left or bottom <= top:  # no ink (should not happen for charset glyphs)
            out = GlyphBitmap(np.zeros((0, 0)), 0, 0, advance)
        else:
            tile = PilImage.new("L", (right - left + 2, bottom - top + 2), 0)
            ImageDraw.Draw(tile).text((1 - left, 1 - top), ch, font=face, fill=255)
            coverage = np.asarray(tile, dtype=np.float64) / 255.0
            out = GlyphBitmap(coverage, left - 1, top - 1, advance)
        self._glyphs[key] = out
        return out


def default_rasterizer() -> PillowRasterizer:
    """Rasterizer over the bundled font set (fresh instance, own caches)."""
    return PillowRasterizer(assets.list_fonts(assets.bundled_font_dir()))


@functools.lru_cache(maxsize=1)
def _content_rasterizer() -> PillowRasterizer:
    return PillowRasterizer([assets.standard_font_path()])


def _paste_max(canvas: np.ndarray, tile: np.ndarray, y0: int, x0: int) -> None:
    """Union a coverage tile into the canvas (max blend), clipping at edges."""
    h, w = canvas.shape
    th, tw = tile.shape
    ys, xs = max(y0, 0), max(x0, 0)
    ye, xe = min(y0 + th, h), min(x0 + tw, w)
    if ys >= ye or xs >= xe:
        return
    region = canvas[ys:ye, xs:xe]
    np.maximum(region, tile[ys - y0:ye - y0, xs - x0:xe - x0], out=region)


def _shift2d(plane: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift with zero fill (no wraparound)."""
    out = np.zeros_like(plane)
    h, w = plane.shape
    ys, xs = max(dy, 0), max(dx, 0)
    ye, xe = min(h + dy, h), min(w + dx, w)
    if ys >= ye or xs >= xe:
        return out
    out[ys:ye, xs:xe] = plane[ys - dy:ye - dy, xs - dx:xe - dx]
    return out


def _disk(radius: int) -> np.ndarray:
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return (yy * yy + xx * xx) <= r * r


def _over(top_color: np.ndarray, top_alpha: np.ndarray,
          bottom_color: np.ndarray, bottom_alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Alpha-over merge of two unpremultiplied layers."""
    out_alpha = top_alpha + bottom_alpha * (1.0 - top_alpha)
    weighted = (top_color * top_alpha[:, :, None]
                + bottom_color * (bottom_alpha * (1.0 - top_alpha))[:, :, None])
    safe = np.where(out_alpha > 0.0, out_alpha, 1.0)
    out_color = np.where(out_alpha[:, :, None] > 0.0, weighted / safe[:, :, None], 0.0)
    return out_color, out_alpha


def _flat(color: tuple[float, float, float], shape: tuple[int, int]) -> np.ndarray:
    return np.broadcast_to(np.asarray(color, dtype=np.float64), (*shape, 3)).copy()


def rasterize_text(
    text: str,
    style: TextStyle,
    canvas: tuple[int, int],
    rasterizer: FontRasterizer,
) -> GlyphLayer:
    """Rasterize styled text centered on the canvas.

    Draw order bottom-up is shadow, border, fill; the finished alpha is
    scaled by style.opacity. Curvature displaces each glyph vertically by
    amplitude * sin(2*pi*x / period), x taken at the glyph center relative
    to the left edge of the text box. If the run is wider than the canvas
    the size is stepped down 1px at a time to a floor of 8px before
    TextWiderThanCanvas is raised. Rotation, perspective, and blur are not
    applied here; see ground_truth.render_styled.
    """
    if not text:
        raise EmptyText("cannot rasterize empty text")
    bad = sorted({c for c in text if c not in RENDERABLE})
    if bad:
        raise UnsupportedCharacter(f"characters {bad!r} outside the renderable charset")
    height, width = canvas

    pad_x = 1
    if style.border is not None:
        pad_x += max(0, int(style.border.width))
    if style.shadow is not None:
        pad_x += abs(int(style.shadow.offset[0]))

    size = None
    candidates = range(style.size, _SHRINK_FLOOR - 1, -1) if style.size >= _SHRINK_FLOOR else [style.size]
    for trial in candidates:
        if rasterizer.text_width(style.font_id, trial, text) + 2 * pad_x <= width:
            size = trial
            break
    if size is None:
        raise TextWiderThanCanvas(
            f"{text!r} does not fit {width}px even at the {_SHRINK_FLOOR}px floor")

    ascent, descent = rasterizer.line_metrics(style.font_id, size)
    top = (height - (ascent + descent)) // 2

    glyphs = [rasterizer.glyph(style.font_id, size, ch) for ch in text]
    total_advance = sum(g.advance for g in glyphs)
    left = (width - total_advance) / 2.0

    coverage = np.zeros((height, width), dtype=np.float64)
    pen = left
    for g in glyphs:
        if g.bitmap.size:
            dy_curve = 0
            if style.curve_amplitude != 0.0:
                phase = 2.0 * math.pi * (pen + g.advance / 2.0 - left) / style.curve_period
                dy_curve = round(style.curve_amplitude * math.sin(phase))
            _paste_max(coverage, g.bitmap, top + g.dy + dy_curve, round(pen) + g.dx)
        pen += g.advance

    color = _flat(style.fill_color, (height, width))
    alpha = coverage

    if style.border is not None and style.border.width > 0:
        border_alpha = ndimage.grey_dilation(
            coverage, footprint=_disk(style.border.width), mode="constant", cval=0.0)
        color, alpha = _over(color, alpha, _flat(style.border.color, (height, width)), border_alpha)

    if style.shadow is not None and style.shadow.alpha > 0.0:
        dx, dy = style.shadow.offset
        shadow_alpha = _shift2d(alpha, int(dy), int(dx)) * style.shadow.alpha
        color, alpha = _over(color, alpha, _flat(style.shadow.color, (height, width)), shadow_alpha)

    alpha = alpha * style.opacity
    color = np.where(alpha[:, :, None] > 0.0, color, 0.0)
    return GlyphLayer(color, alpha)


def render_content_image(
    text: str,
    canvas: tuple[int, int],
    *,
    background_value: float = 0.5,
) -> Image:
    """Render text in the standard format: fixed sans face, black fill,
    full opacity, no transforms, centered on a uniform gray canvas.
    """
    if not text:
        raise EmptyText("cannot render empty content text")
    height, width = canvas
    style = TextStyle(
        font_id=0,
        size=max(_SHRINK_FLOOR, round(0.55 * height)),
        fill_color=(0.0, 0.0, 0.0),
        opacity=1.0,
    )
    layer = rasterize_text(text, style, canvas, _content_rasterizer())
    return composite(layer, Image.full(height, width, background_value, 3))


def composite(fg: GlyphLayer, bg: Image) -> Image:
    """Alpha-over: out = alpha * color + (1 - alpha) * bg, per pixel."""
    if bg.channels != 3:
        raise DimMismatch(f"background must have 3 channels, got {bg.channels}")
    if (fg.height, fg.width) != (bg.height, bg.width):
        raise DimMismatch(
            f"layer {(fg.height, fg.width)} vs background {(bg.height, bg.width)}")
    a = fg.alpha[:, :, None]
    return Image(a * fg.color + (1.0 - a) * bg.data)
