"""PNG encode/decode for Image and Mask values.

Images are written as 8-bit RGB (or 8-bit grayscale for single-channel data),
masks as 8-bit grayscale holding exactly {0, 255}. Decoding maps bytes back
through b/255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from .data_model import Image, Mask, from_bytes, to_bytes


def save_image(img: Image, path: Path | str) -> None:
    raster = to_bytes(img)
    if img.channels == 1:
        PilImage.fromarray(raster[:, :, 0], "L").save(path, format="PNG")
    else:
        PilImage.fromarray(raster, "RGB").save(path, format="PNG")


def load_image(path: Path | str) -> Image:
    with PilImage.open(path) as pil:
        if pil.mode in ("L", "I;16", "1"):
            arr = np.asarray(pil.convert("L"))[:, :, np.newaxis]
        else:
            arr = np.asarray(pil.convert("RGB"))
    return from_bytes(np.ascontiguousarray(arr, dtype=np.uint8))


def save_mask(mask: Mask, path: Path | str) -> None:
    PilImage.fromarray(mask.data * np.uint8(255), "L").save(path, format="PNG")


def load_mask(path: Path | str, *, threshold: int = 127) -> tuple[Mask, bool]:
    """Decode a mask PNG. Returns (mask, was_binary).

    Gray values are split at `threshold`; was_binary reports whether the file
    held only {0, 255} so callers can warn on lossy inputs.
    """
    with PilImage.open(path) as pil:
        arr = np.asarray(pil.convert("L"))
    was_binary = bool(np.isin(arr, (0, 255)).all())
    return Mask(arr > threshold), was_binary


def load_gray(path: Path | str) -> np.ndarray:
    """Decode any image to a single (H, W) float64 plane in [0,1]."""
    with PilImage.open(path) as pil:
        arr = np.asarray(pil.convert("L"))
    return arr.astype(np.float64) / 255.0
