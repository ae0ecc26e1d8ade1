import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PilImage

from ste_forge.charset import default_charset
from ste_forge.data_model import GenConfig, validate_tuple
from ste_forge.errors import CorruptSample, EmptyLexicon, IndexOutOfRange
from ste_forge.pipeline import (
    GENERATOR_VERSION,
    DatasetManifest,
    generate_dataset,
    load_lexicon,
    read_manifest,
    read_sample,
    sample_style,
)

LAYERS = ("i_s", "i_t", "t_f", "t_b", "t_fg", "t_sk", "mask_t", "mask_s")


def _tree_digest(root):
    root = Path(root)
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(path.relative_to(root)).encode())
        h.update(path.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------- lexicon


def test_load_lexicon_filters_by_charset(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("hello\nWorld\ncafé\nnum83r\n  \n", encoding="utf-8")
    letters = load_lexicon(path, default_charset())
    assert letters == ["hello", "World"]


def test_load_lexicon_empty_raises(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("é é é\n", encoding="utf-8")
    with pytest.raises(EmptyLexicon):
        load_lexicon(path, default_charset())


# ---------------------------------------------------------------- sample_style


def test_sample_style_is_deterministic(gen_config):
    lex = ["alpha", "bravo", "carol"]
    a = sample_style(123, gen_config, font_count=3, background_count=5, lexicon=lex)
    b = sample_style(123, gen_config, font_count=3, background_count=5, lexicon=lex)
    assert a == b
    c = sample_style(124, gen_config, font_count=3, background_count=5, lexicon=lex)
    assert c != a


def test_sample_style_degenerate_opacity(gen_config):
    import dataclasses

    cfg = dataclasses.replace(gen_config, opacity_range=(1.0, 1.0))
    style, _, _ = sample_style(5, cfg, 2, 2, ["word"])
    assert style.opacity == 1.0


def test_sample_style_respects_ranges(gen_config):
    import dataclasses

    cfg = dataclasses.replace(gen_config, opacity_range=(0.5, 1.0), rotation_range=9.0)
    lex = ["one", "two"]
    for seed in range(2000):
        style, bg_idx, (ws, wt) = sample_style(seed, cfg, 4, 7, lex)
        assert 0.5 <= style.opacity <= 1.0
        assert abs(style.rotation) <= 9.0
        assert 0 <= style.font_id < 4
        assert 0 <= bg_idx < 7
        assert ws in lex and wt in lex


def test_sample_style_rejects_empty_inputs(gen_config):
    from ste_forge.errors import ConfigError, EmptyFontSet

    with pytest.raises(EmptyFontSet):
        sample_style(1, gen_config, 0, 3, ["w"])
    with pytest.raises(ConfigError):
        sample_style(1, gen_config, 3, 0, ["w"])
    with pytest.raises(EmptyLexicon):
        sample_style(1, gen_config, 3, 3, [])


# ---------------------------------------------------------------- generate


def test_generate_zero_samples_is_valid_empty_dataset(gen_config, tmp_path):
    manifest = generate_dataset(gen_config, 0, tmp_path / "ds")
    assert manifest.count == 0
    assert manifest.skipped == ()
    for layer in LAYERS:
        d = tmp_path / "ds" / layer
        assert d.is_dir() and not list(d.iterdir())
    assert (tmp_path / "ds" / "labels.txt").read_text() == ""
    with pytest.raises(IndexOutOfRange):
        read_sample(tmp_path / "ds", 0)


def test_generate_writes_complete_layout(gen_config, tmp_path):
    out = tmp_path / "ds"
    manifest = generate_dataset(gen_config, 12, out)
    assert manifest.count == 12
    assert manifest.generator_version == GENERATOR_VERSION
    assert manifest.canvas == gen_config.canvas
    for layer in LAYERS:
        files = sorted((out / layer).iterdir())
        assert [f.name for f in files] == [f"{i:08d}.png" for i in range(12)]
    lines = (out / "labels.txt").read_text().splitlines()
    assert len(lines) == 12
    for i, line in enumerate(lines):
        idx, ws, wt = line.split("\t")
        assert idx == f"{i:08d}"
        assert ws and wt


def test_generated_masks_are_binary_on_disk(gen_config, tmp_path):
    out = tmp_path / "ds"
    generate_dataset(gen_config, 3, out)
    for layer in ("t_sk", "mask_t", "mask_s"):
        arr = np.asarray(PilImage.open(out / layer / "00000001.png"))
        assert set(np.unique(arr)) <= {0, 255}


def test_generate_is_thread_count_invariant(gen_config, tmp_path):
    a = tmp_path / "t1"
    b = tmp_path / "t3"
    generate_dataset(gen_config, 8, a, threads=1)
    generate_dataset(gen_config, 8, b, threads=3)
    assert _tree_digest(a) == _tree_digest(b)


def test_generate_depends_only_on_seed(gen_config, tmp_path):
    import dataclasses

    a = generate_dataset(gen_config, 4, tmp_path / "a")
    again = generate_dataset(gen_config, 4, tmp_path / "again")
    assert _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "again")
    other_cfg = dataclasses.replace(gen_config, master_seed=gen_config.master_seed + 1)
    generate_dataset(other_cfg, 4, tmp_path / "b")
    assert _tree_digest(tmp_path / "a") != _tree_digest(tmp_path / "b")
    assert a.master_seed == gen_config.master_seed


def test_progress_callback_sees_every_sample(gen_config, tmp_path):
    seen = []
    generate_dataset(gen_config, 5, tmp_path / "ds", progress=lambda done, total: seen.append((done, total)))
    assert seen == [(i, 5) for i in range(1, 6)]


# ---------------------------------------------------------------- read back


def test_read_sample_round_trip(gen_config, tmp_path):
    out = tmp_path / "ds"
    generate_dataset(gen_config, 6, out)
    sample = read_sample(out, 3)
    assert validate_tuple(sample) == []
    assert sample.word_source and sample.word_target
    labels = (out / "labels.txt").read_text().splitlines()[3].split("\t")
    assert (sample.word_source, sample.word_target) == (labels[1], labels[2])


def test_read_sample_index_errors(gen_config, tmp_path):
    out = tmp_path / "ds"
    generate_dataset(gen_config, 2, out)
    with pytest.raises(IndexOutOfRange):
        read_sample(out, 2)
    with pytest.raises(IndexOutOfRange):
        read_sample(out, -1)


def test_read_sample_missing_layer_is_corrupt(gen_config, tmp_path):
    out = tmp_path / "ds"
    generate_dataset(gen_config, 2, out)
    (out / "t_sk" / "00000001.png").unlink()
    with pytest.raises(CorruptSample, match="t_sk"):
        read_sample(out, 1)
    read_sample(out, 0)  # neighbours unaffected


def test_read_manifest_missing_is_corrupt(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(CorruptSample):
        read_manifest(tmp_path / "empty")


# ---------------------------------------------------------------- skip handling


def test_unrenderable_words_are_skipped_not_fatal(tmp_path):
    lex = tmp_path / "lex.txt"
    lex.write_text("wwwwwwwwwwwwwwwwwwwwwwww\n")  # cannot fit a 16px canvas
    cfg = GenConfig(canvas=(8, 16), lexicon=lex, master_seed=1)
    out = tmp_path / "ds"
    manifest = generate_dataset(cfg, 3, out)
    assert manifest.count == 0
    assert manifest.skipped == (0, 1, 2)
    assert (out / "labels.txt").read_text() == ""
    assert not list((out / "i_s").iterdir())
    with pytest.raises(IndexOutOfRange):
        read_sample(out, 0)


# ---------------------------------------------------------------- manifest


def test_manifest_json_round_trip():
    m = DatasetManifest(count=5, canvas=(64, 256), master_seed=7, charset="letters", skipped=(2,))
    back = DatasetManifest.from_json(m.to_json())
    assert back == m
    data = json.loads(m.to_json())
    assert set(data) == {"count", "canvas", "master_seed", "charset", "generator_version", "skipped"}


def test_manifest_validation():
    with pytest.raises(ValueError):
        DatasetManifest(count=-1, canvas=(64, 256), master_seed=0, charset="letters")
