"""Paths to the bundled fonts, backgrounds, and lexicon."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

_FONT_EXTENSIONS = {".ttf", ".otf"}
_IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}


def _asset_root() -> Path:
    return Path(str(resources.files("ste_forge").joinpath("assets")))


def bundled_font_dir() -> Path:
    return _asset_root() / "fonts"


def bundled_background_dir() -> Path:
    return _asset_root() / "backgrounds"


def bundled_lexicon() -> Path:
    return _asset_root() / "words.txt"


def standard_font_path() -> Path:
    """The fixed face used for standard-format content images."""
    return bundled_font_dir() / "DejaVuSans.ttf"


def list_fonts(font_dir: Path | str) -> list[Path]:
    """Font files in a directory, sorted by name for stable indexing."""
    d = Path(font_dir)
    return sorted(p for p in d.iterdir() if p.suffix.lower() in _FONT_EXTENSIONS)


def list_backgrounds(background_dir: Path | str) -> list[Path]:
    """Background images in a directory, sorted by name for stable indexing."""
    d = Path(background_dir)
    return sorted(p for p in d.iterdir() if p.suffix.lower() in _IMAGE_EXTENSIONS)
