"""Dataset generation: style sampling, parallel writing, and readback.

The whole dataset is a pure function of (config, count). Sample i draws
every style parameter from a private RNG seeded by (master_seed, i), so
workers can build samples in any order — or any number of threads — and the
bytes on disk come out identical. The manifest is written last and serves
as the commit marker for the run.

Layout (one file per sample per layer, masks hold exactly {0, 255}):

    <out_dir>/
      i_s/  i_t/  t_f/  t_b/  t_fg/  t_sk/  mask_t/  mask_s/   %08d.png
      labels.txt      "<%08d>\\t<word_source>\\t<word_target>\\n" per sample
      manifest.json   written last
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from PIL import Image as PilImage

from . import assets, png_io
from .charset import Charset, default_charset
from .data_model import (
    Border,
    GenConfig,
    Image,
    SampleTuple,
    Shadow,
    TextStyle,
)
from .errors import (
    ConfigError,
    CorruptSample,
    EmptyFontSet,
    EmptyLexicon,
    IndexOutOfRange,
    SteForgeError,
)
from .ground_truth import assemble_sample
from .rng import SplitMix64, derive_seed
from .text_render import PillowRasterizer

GENERATOR_VERSION = "1"

_IMAGE_LAYERS = ("i_s", "i_t", "t_f", "t_b", "t_fg")
_MASK_LAYERS = ("t_sk", "mask_t", "mask_s")
_MAX_RETRIES = 5

_BORDER_PROBABILITY = 0.25
_SHADOW_PROBABILITY = 0.25


@dataclass(frozen=True)
class DatasetManifest:
    """Summary of a generated dataset; doubles as its commit marker."""

    count: int
    canvas: tuple[int, int]
    master_seed: int
    charset: str
    generator_version: str = GENERATOR_VERSION
    skipped: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if len(self.canvas) != 2 or any(side < 1 for side in self.canvas):
            raise ValueError(f"canvas must be a positive (H, W) pair, got {self.canvas}")
        if any(i < 0 for i in self.skipped):
            raise ValueError("skipped indices must be non-negative")

    def to_json(self) -> str:
        return json.dumps({
            "count": self.count,
            "canvas": list(self.canvas),
            "master_seed": self.master_seed,
            "charset": self.charset,
            "generator_version": self.generator_version,
            "skipped": list(self.skipped),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        raw = json.loads(text)
        return cls(
            count=int(raw["count"]),
            canvas=(int(raw["canvas"][0]), int(raw["canvas"][1])),
            master_seed=int(raw["master_seed"]),
            charset=str(raw["charset"]),
            generator_version=str(raw.get("generator_version", "")),
            skipped=tuple(int(i) for i in raw.get("skipped", [])),
        )


def load_lexicon(path: Union[str, Path], charset: Charset) -> list[str]:
    """Words from a one-per-line file, keeping only charset-clean entries."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if charset.valid_word(word):
            words.append(word)
    if not words:
        raise EmptyLexicon(f"no usable words in {path}")
    return words


def sample_style(
    rng_seed: int,
    config: GenConfig,
    font_count: int,
    background_count: int,
    lexicon: list[str],
) -> tuple[TextStyle, int, tuple[str, str]]:
    """Draw one sample's style, background index, and word pair.

    Every parameter comes from a SplitMix64 stream seeded by rng_seed, and
    every draw happens unconditionally in a fixed order (optional features
    draw their parameters even when disabled). That makes the mapping
    seed -> sample part of the dataset format: reordering or skipping draws
    is a format change and must bump GENERATOR_VERSION.
    """
    if font_count < 1:
        raise EmptyFontSet("need at least one font")
    if background_count < 1:
        raise ConfigError("need at least one background image")
    if not lexicon:
        raise EmptyLexicon("lexicon is empty")

    rng = SplitMix64(rng_seed)
    height, width = config.canvas

    word_source = lexicon[rng.randint(len(lexicon))]
    word_target = lexicon[rng.randint(len(lexicon))]
    font_id = rng.randint(font_count)

    size_lo = max(8, round(0.35 * height))
    size_hi = max(size_lo, round(0.70 * height))
    size = size_lo + rng.randint(size_hi - size_lo + 1)

    fill = (rng.uniform(), rng.uniform(), rng.uniform())

    with_border = rng.chance(_BORDER_PROBABILITY)
    border_color = (rng.uniform(), rng.uniform(), rng.uniform())
    border_width = 1 + rng.randint(2)
    border = Border(border_color, border_width) if with_border else None

    with_shadow = rng.chance(_SHADOW_PROBABILITY)
    shadow_dx = rng.randint(7) - 3
    shadow_dy = rng.randint(7) - 3
    shadow_gray = rng.uniform(0.0, 0.25)
    shadow_alpha = rng.uniform(0.3, 0.7)
    shadow = (Shadow((shadow_dx, shadow_dy), (shadow_gray,) * 3, shadow_alpha)
              if with_shadow else None)

    opacity = rng.uniform(*config.opacity_range)
    rotation = rng.uniform(-config.rotation_range, config.rotation_range)

    curved = rng.chance(config.curve_probability)
    curve_amplitude = rng.uniform(1.0, max(1.5, 0.05 * height))
    curve_period = rng.uniform(0.6 * width, 1.4 * width)

    blurred = rng.chance(config.blur_probability)
    blur_sigma = rng.uniform(0.4, 1.1)

    background_index = rng.randint(background_count)

    style = TextStyle(
        font_id=font_id,
        size=size,
        fill_color=fill,
        border=border,
        shadow=shadow,
        opacity=opacity,
        rotation=rotation,
        curve_amplitude=curve_amplitude if curved else 0.0,
        curve_period=curve_period,
        blur_sigma=blur_sigma if blurred else 0.0,
    )
    return style, background_index, (word_source, word_target)


def _load_background(path: Path, canvas: tuple[int, int]) -> Image:
    """Decode a background as RGB, resizing to the canvas if needed."""
    height, width = canvas
    with PilImage.open(path) as pil:
        pil = pil.convert("RGB")
        if pil.size != (width, height):
            pil = pil.resize((width, height), PilImage.Resampling.BILINEAR)
        arr = np.asarray(pil, dtype=np.float64) / 255.0
    return Image(arr)


class _Workspace:
    """Shared read-only state for one generation run."""

    def __init__(self, config: GenConfig, charset: Charset) -> None:
        self.config = config
        self.charset = charset
        font_dir = config.font_dir or assets.bundled_font_dir()
        self.font_paths = assets.list_fonts(font_dir)
        if not self.font_paths:
            raise EmptyFontSet(f"no font files in {font_dir}")
        background_dir = config.background_dir or assets.bundled_background_dir()
        self.background_paths = assets.list_backgrounds(background_dir)
        if not self.background_paths:
            raise ConfigError(f"no background images in {background_dir}")
        self.lexicon = load_lexicon(config.lexicon or assets.bundled_lexicon(), charset)
        self._backgrounds: dict[int, Image] = {}
        self._bg_lock = threading.Lock()
        self._local = threading.local()

    def rasterizer(self) -> PillowRasterizer:
        # FreeType faces keep mutable internal state; one instance per thread.
        r = getattr(self._local, "rasterizer", None)
        if r is None:
            r = PillowRasterizer(self.font_paths)
            self._local.rasterizer = r
        return r

    def background(self, index: int) -> Image:
        bg = self._backgrounds.get(index)
        if bg is None:
            loaded = _load_background(self.background_paths[index], self.config.canvas)
            with self._bg_lock:
                bg = self._backgrounds.setdefault(index, loaded)
        return bg

    def build_sample(self, index: int) -> tuple[Optional[SampleTuple], Optional[str]]:
        """Build sample `index`, retrying with fresh sub-seeds on failure."""
        last_error = "unknown"
        for retry in range(_MAX_RETRIES + 1):
            seed = derive_seed(self.config.master_seed, index, retry)
            try:
                style, bg_index, (ws, wt) = sample_style(
                    seed, self.config, len(self.font_paths),
                    len(self.background_paths), self.lexicon)
                bg = self.background(bg_index)
                return assemble_sample(bg, style, ws, wt, self.rasterizer()), None
            except SteForgeError as exc:
                last_error = f"{type(exc).__name__}: {exc}"
        return None, last_error


def _write_sample(out_dir: Path, index: int, sample: SampleTuple) -> None:
    name = f"{index:08d}.png"
    for layer in _IMAGE_LAYERS:
        png_io.save_image(getattr(sample, layer), out_dir / layer / name)
    for layer in _MASK_LAYERS:
        png_io.save_mask(getattr(sample, layer), out_dir / layer / name)


def generate_dataset(
    config: GenConfig,
    count: int,
    out_dir: Union[str, Path],
    *,
    threads: int = 1,
    charset: Optional[Charset] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> DatasetManifest:
    """Write `count` samples under out_dir and return the manifest.

    A sample that keeps failing after retries (e.g. every lexicon word is
    too wide for a tiny canvas) is skipped: its index appears in the
    manifest's skipped list and leaves no files behind. Output bytes are
    independent of `threads`.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    charset = charset or default_charset()
    workspace = _Workspace(config, charset)

    out = Path(out_dir)
    for layer in _IMAGE_LAYERS + _MASK_LAYERS:
        (out / layer).mkdir(parents=True, exist_ok=True)

    words: list[Optional[tuple[str, str]]] = [None] * count
    failures: list[tuple[int, str]] = []
    done = 0
    progress_lock = threading.Lock()

    def produce(index: int) -> None:
        nonlocal done
        sample, error = workspace.build_sample(index)
        if sample is None:
            failures.append((index, error or ""))
        else:
            _write_sample(out, index, sample)
            words[index] = (sample.word_source, sample.word_target)
        if progress is not None:
            with progress_lock:
                done += 1
                progress(done, count)

    if threads <= 1:
        for i in range(count):
            produce(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # materialize to re-raise the first worker exception, if any
            list(pool.map(produce, range(count)))

    with open(out / "labels.txt", "w", encoding="utf-8", newline="") as fh:
        for i in range(count):
            if words[i] is not None:
                ws, wt = words[i]
                fh.write(f"{i:08d}\t{ws}\t{wt}\n")

    manifest = DatasetManifest(
        count=count - len(failures),
        canvas=config.canvas,
        master_seed=config.master_seed,
        charset=charset.chars,
        generator_version=GENERATOR_VERSION,
        skipped=tuple(sorted(i for i, _ in failures)),
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def read_manifest(dataset_dir: Union[str, Path]) -> DatasetManifest:
    path = Path(dataset_dir) / "manifest.json"
    if not path.is_file():
        raise CorruptSample(f"{dataset_dir} has no manifest.json")
    return DatasetManifest.from_json(path.read_text(encoding="utf-8"))


def _read_words(dataset_dir: Path, index: int) -> tuple[str, str]:
    prefix = f"{index:08d}\t"
    labels = dataset_dir / "labels.txt"
    if not labels.is_file():
        raise CorruptSample("labels.txt is missing")
    for line in labels.read_text(encoding="utf-8").splitlines():
        if line.startswith(prefix):
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorruptSample(f"malformed label line for sample {index}")
            return parts[1], parts[2]
    raise CorruptSample(f"no label line for sample {index}")


def read_sample(dataset_dir: Union[str, Path], index: int) -> SampleTuple:
    """Load one stored sample; indices follow generation order.

    Skipped indices raise IndexOutOfRange (they own no files); a present
    index with missing/broken layer files raises CorruptSample naming the
    layer.
    """
    dataset_dir = Path(dataset_dir)
    manifest = read_manifest(dataset_dir)
    total = manifest.count + len(manifest.skipped)
    if not 0 <= index < total:
        raise IndexOutOfRange(f"index {index} outside [0, {total})")
    if index in manifest.skipped:
        raise IndexOutOfRange(f"sample {index} was skipped during generation")

    name = f"{index:08d}.png"
    loaded: dict[str, object] = {}
    for layer in _IMAGE_LAYERS:
        path = dataset_dir / layer / name
        if not path.is_file():
            raise CorruptSample(f"sample {index}: missing layer {layer}")
        loaded[layer] = png_io.load_image(path)
    for layer in _MASK_LAYERS:
        path = dataset_dir / layer / name
        if not path.is_file():
            raise CorruptSample(f"sample {index}: missing layer {layer}")
        mask, was_binary = png_io.load_mask(path)
        if not was_binary:
            raise CorruptSample(f"sample {index}: layer {layer} is not a binary mask")
        loaded[layer] = mask

    dims = {(v.height, v.width) for v in loaded.values()}  # type: ignore[union-attr]
    if len(dims) != 1:
        raise CorruptSample(f"sample {index}: layer dimensions disagree: {sorted(dims)}")

    word_source, word_target = _read_words(dataset_dir, index)
    return SampleTuple(word_source=word_source, word_target=word_target, **loaded)  # type: ignore[arg-type]
