import numpy as np
import pytest

from ste_forge.data_model import Border, Image, Shadow, TextStyle
from ste_forge.errors import (
    DimMismatch,
    EmptyText,
    TextWiderThanCanvas,
    UnknownFont,
    UnsupportedCharacter,
)
from ste_forge.text_render import (
    GlyphLayer,
    composite,
    default_rasterizer,
    rasterize_text,
    render_content_image,
)

CANVAS = (48, 160)


def _ink_bbox(alpha, thr=0.5):
    ys, xs = np.nonzero(alpha > thr)
    return ys.min(), ys.max(), xs.min(), xs.max()


# ---------------------------------------------------------------- GlyphLayer


def test_glyph_layer_validation():
    GlyphLayer(np.zeros((8, 8, 3)), np.zeros((8, 8)))
    with pytest.raises(ValueError):
        GlyphLayer(np.zeros((8, 8)), np.zeros((8, 8)))  # color must be HxWx3
    with pytest.raises(ValueError):
        GlyphLayer(np.zeros((8, 8, 3)), np.zeros((4, 8)))  # dims disagree
    with pytest.raises(ValueError):
        GlyphLayer(np.zeros((8, 8, 3)), np.full((8, 8), 2.0))


def test_glyph_layer_is_read_only():
    layer = GlyphLayer(np.zeros((8, 8, 3)), np.zeros((8, 8)))
    with pytest.raises(ValueError):
        layer.alpha[0, 0] = 1.0


# ---------------------------------------------------------------- errors


def test_empty_text_rejected(rasterizer):
    with pytest.raises(EmptyText):
        rasterize_text("", TextStyle(), CANVAS, rasterizer)


def test_unsupported_character_rejected(rasterizer):
    with pytest.raises(UnsupportedCharacter):
        rasterize_text("héllo", TextStyle(), CANVAS, rasterizer)
    with pytest.raises(UnsupportedCharacter):
        rasterize_text("two words", TextStyle(), CANVAS, rasterizer)


def test_unknown_font_rejected(rasterizer):
    with pytest.raises(UnknownFont):
        rasterize_text("abc", TextStyle(font_id=9999), CANVAS, rasterizer)


def test_text_wider_than_canvas(rasterizer):
    # Even the size-8 floor cannot fit this many glyphs in 24 px.
    with pytest.raises(TextWiderThanCanvas):
        rasterize_text("WWWWWWWWWW", TextStyle(size=30), (16, 24), rasterizer)


# ---------------------------------------------------------------- basic render


def test_render_shape_range_and_determinism(rasterizer):
    style = TextStyle(size=28, fill_color=(0.8, 0.2, 0.1))
    a = rasterize_text("Forge", style, CANVAS, rasterizer)
    b = rasterize_text("Forge", style, CANVAS, rasterizer)
    assert a.color.shape == (48, 160, 3)
    assert a.alpha.shape == (48, 160)
    assert 0.0 <= a.alpha.min() and a.alpha.max() <= 1.0
    assert np.array_equal(a.color, b.color)
    assert np.array_equal(a.alpha, b.alpha)


def test_ink_carries_fill_color_and_nothing_else(rasterizer):
    style = TextStyle(size=28, fill_color=(0.8, 0.2, 0.1))
    layer = rasterize_text("Forge", style, CANVAS, rasterizer)
    ink = layer.alpha > 0
    assert ink.any()
    assert np.allclose(layer.color[ink], (0.8, 0.2, 0.1))
    assert np.all(layer.color[~ink] == 0.0)


def test_text_is_roughly_centered(rasterizer):
    layer = rasterize_text("Center", TextStyle(size=28), CANVAS, rasterizer)
    y0, y1, x0, x1 = _ink_bbox(layer.alpha)
    assert abs((y0 + y1) / 2 - 48 / 2) < 6
    assert abs((x0 + x1) / 2 - 160 / 2) < 4


def test_requested_size_autoshrinks_to_fit(rasterizer):
    # A size-60 request cannot fit, but the renderer steps the size down
    # instead of failing while >= 8 px still fits.
    layer = rasterize_text("Mmmmmmmm", TextStyle(size=60), (32, 80), rasterizer)
    assert layer.alpha.max() > 0.5
    _, _, x0, x1 = _ink_bbox(layer.alpha)
    assert x1 - x0 < 80


# ---------------------------------------------------------------- style knobs


def test_opacity_scales_alpha_linearly(rasterizer):
    full = rasterize_text("op", TextStyle(size=28), CANVAS, rasterizer)
    half = rasterize_text("op", TextStyle(size=28, opacity=0.5), CANVAS, rasterizer)
    assert np.allclose(half.alpha, full.alpha * 0.5)


def test_border_extends_coverage(rasterizer):
    plain = rasterize_text("Bd", TextStyle(size=28), CANVAS, rasterizer)
    bordered = rasterize_text(
        "Bd",
        TextStyle(size=28, border=Border(color=(0.0, 1.0, 0.0), width=2)),
        CANVAS,
        rasterizer,
    )
    sup_plain = plain.alpha > 0
    sup_border = bordered.alpha > 0
    assert np.all(sup_border[sup_plain])
    assert sup_border.sum() > sup_plain.sum()
    # the ring around the glyph carries the border color
    ring = sup_border & ~sup_plain
    greens = bordered.color[ring]
    assert greens[:, 1].mean() > 0.9


def test_shadow_extends_coverage_along_offset(rasterizer):
    plain = rasterize_text("Sh", TextStyle(size=28), CANVAS, rasterizer)
    shadowed = rasterize_text(
        "Sh",
        TextStyle(size=28, shadow=Shadow(offset=(3, 3), alpha=0.6)),
        CANVAS,
        rasterizer,
    )
    y0, y1, x0, x1 = _ink_bbox(plain.alpha, thr=0.0)
    sy0, sy1, sx0, sx1 = _ink_bbox(shadowed.alpha, thr=0.0)
    assert sy1 >= y1 + 2 and sx1 >= x1 + 2
    assert sy0 == y0 and sx0 == x0


def test_curve_displaces_columns_vertically(rasterizer):
    flat = rasterize_text("mmmmm", TextStyle(size=24), CANVAS, rasterizer)
    bent = rasterize_text(
        "mmmmm",
        TextStyle(size=24, curve_amplitude=5.0, curve_period=80.0),
        CANVAS,
        rasterizer,
    )

    def column_centroids(alpha):
        w = alpha.sum(axis=0)
        ys = np.arange(alpha.shape[0], dtype=float)
        cols = w > 1e-6
        return (alpha * ys[:, None]).sum(axis=0)[cols] / w[cols]

    spread_flat = np.ptp(column_centroids(flat.alpha))
    spread_bent = np.ptp(column_centroids(bent.alpha))
    assert spread_bent > spread_flat + 3.0


# ---------------------------------------------------------------- composite


def test_composite_identities(rasterizer):
    bg = Image(np.random.default_rng(3).uniform(0, 1, (48, 160, 3)))
    opaque = GlyphLayer(np.full((48, 160, 3), 0.25), np.ones((48, 160)))
    transparent = GlyphLayer(np.zeros((48, 160, 3)), np.zeros((48, 160)))
    assert np.array_equal(composite(opaque, bg).data, np.full((48, 160, 3), 0.25))
    assert np.array_equal(composite(transparent, bg).data, bg.data)


def test_composite_blends_linearly():
    bg = Image(np.full((8, 8, 3), 0.2))
    layer = GlyphLayer(np.full((8, 8, 3), 0.6), np.full((8, 8), 0.5))
    out = composite(layer, bg)
    assert np.allclose(out.data, 0.5 * 0.6 + 0.5 * 0.2)


def test_composite_rejects_mismatched_dims():
    bg = Image(np.zeros((8, 8, 3)))
    layer = GlyphLayer(np.zeros((8, 16, 3)), np.zeros((8, 16)))
    with pytest.raises(DimMismatch):
        composite(layer, bg)
    gray = Image(np.zeros((8, 8)))
    square = GlyphLayer(np.zeros((8, 8, 3)), np.zeros((8, 8)))
    with pytest.raises(DimMismatch):
        composite(square, gray)


# ---------------------------------------------------------------- content image


def test_content_image_is_plain_text_on_gray():
    img = render_content_image("target", (64, 256))
    assert img.data.shape == (64, 256, 3)
    # corners are untouched background
    assert np.allclose(img.data[0, 0], 0.5)
    assert np.allclose(img.data[-1, -1], 0.5)
    # there is dark ink somewhere
    assert img.data.min() < 0.2
    again = render_content_image("target", (64, 256))
    assert np.array_equal(img.data, again.data)


def test_content_image_differs_by_text():
    a = render_content_image("alpha", (64, 256))
    b = render_content_image("bravo", (64, 256))
    assert not np.array_equal(a.data, b.data)


def test_default_rasterizer_has_fonts():
    r = default_rasterizer()
    assert r.font_count >= 1
