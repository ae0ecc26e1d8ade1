"""Command line interface: generate, evaluate, tool, and loss subcommands.

Standard output carries only machine-readable payloads (a manifest path, a
metric report, a loss scalar); progress and warnings go to standard error.

Exit codes:
    0  success
    2  usage, flag, or config errors
    3  I/O errors (unreadable/unwritable paths)
    4  evaluation found no filename-matched image pairs
    5  malformed feature or transcription inputs
    6  invalid image input (undecodable, or a non-binary mask where a
       binary one is required — the output is still written from the
       thresholded mask, but the exit code flags the lossy input)
    1  anything else unexpected
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import UnidentifiedImageError

from . import metrics, png_io
from .charset import default_charset, letters_digits_charset
from .config import load_gen_config
from .data_model import Image
from .errors import (
    ConfigError,
    EmptyFontSet,
    EmptyLexicon,
    EmptyLists,
    EmptyText,
    LengthMismatch,
    MalformedFeatureFile,
    NonFiniteInput,
    NonSymmetric,
    NoPairs,
    NotPSD,
    PairDimMismatch,
    SteForgeError,
    TextWiderThanCanvas,
    TooFewSamples,
    UnsupportedCharacter,
)
from .ground_truth import extract_mask, invert_mask, skeletonize
from .losses import (
    LossComponents,
    dice_loss,
    gan_loss_value,
    l2_loss,
    recognizer_loss,
    total_losses,
    CharProbs,
)
from .pipeline import generate_dataset
from .text_render import GlyphLayer, composite, render_content_image

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NO_PAIRS = 4
EXIT_MALFORMED = 5
EXIT_INVALID_IMAGE = 6


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _thread_count(flag_value: Optional[int]) -> int:
    if flag_value is not None:
        if flag_value < 1:
            raise ConfigError(f"--threads must be >= 1, got {flag_value}")
        return flag_value
    env = os.environ.get("STE_FORGE_THREADS")
    if env is None:
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"STE_FORGE_THREADS must be an integer, got {env!r}") from None
    if value < 1:
        raise ConfigError(f"STE_FORGE_THREADS must be >= 1, got {value}")
    return value


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        config = load_gen_config(args.config)
        if args.seed is not None:
            config = replace(config, master_seed=args.seed)
        threads = _thread_count(args.threads)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO

    total = args.count
    step = max(1, total // 20)

    def report(done: int, n: int) -> None:
        if done % step == 0 or done == n:
            print(f"generated {done}/{n}", file=sys.stderr)

    try:
        manifest = generate_dataset(
            config, total, args.out, threads=threads, progress=report)
    except (ConfigError, EmptyFontSet, EmptyLexicon, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO

    if manifest.skipped:
        _warn(f"{len(manifest.skipped)} sample(s) skipped after retries: "
              f"indices {list(manifest.skipped)}")
    print(str(Path(args.out) / "manifest.json"))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    if (args.fid_features_a is None) != (args.fid_features_b is None):
        _err("--fid-features-a and --fid-features-b must be given together")
        return EXIT_USAGE
    if (args.wra_pred is None) != (args.wra_target is None):
        _err("--wra-pred and --wra-target must be given together")
        return EXIT_USAGE

    try:
        pred_lines = (metrics.read_transcriptions(args.wra_pred)
                      if args.wra_pred else None)
        target_lines = (metrics.read_transcriptions(args.wra_target)
                        if args.wra_target else None)
        report = metrics.evaluate_dirs(
            args.pred, args.gt,
            features_a=args.fid_features_a,
            features_b=args.fid_features_b,
            transcriptions_pred=pred_lines,
            transcriptions_target=target_lines,
        )
    except NoPairs as exc:
        _err(str(exc))
        return EXIT_NO_PAIRS
    except (MalformedFeatureFile, TooFewSamples, NonSymmetric, NotPSD,
            NonFiniteInput, LengthMismatch, EmptyLists) as exc:
        _err(str(exc))
        return EXIT_MALFORMED
    except PairDimMismatch as exc:
        _err(str(exc))
        return EXIT_ERROR
    except UnidentifiedImageError as exc:
        _err(str(exc))
        return EXIT_INVALID_IMAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO

    payload = report.to_csv() if args.format == "csv" else report.to_json() + "\n"
    if args.out:
        try:
            Path(args.out).write_text(payload, encoding="utf-8")
        except OSError as exc:
            _err(str(exc))
            return EXIT_IO
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _load_binary_mask(path: str):
    """(mask, exit_code): non-binary input warns, thresholds, and flags 6."""
    mask, was_binary = png_io.load_mask(path)
    if not was_binary:
        _warn(f"{path} is not a binary mask; thresholding at 127")
        return mask, EXIT_INVALID_IMAGE
    return mask, EXIT_OK


def cmd_tool(args: argparse.Namespace) -> int:
    try:
        if args.tool == "skeletonize":
            mask, code = _load_binary_mask(args.input)
            png_io.save_mask(skeletonize(mask), args.output)
            return code
        if args.tool == "invert":
            mask, code = _load_binary_mask(args.input)
            png_io.save_mask(invert_mask(mask), args.output)
            return code
        if args.tool == "mask":
            coverage = png_io.load_gray(args.input)
            png_io.save_mask(extract_mask(coverage, args.threshold), args.output)
            return EXIT_OK
        if args.tool == "composite":
            fg = png_io.load_image(args.fg)
            if fg.channels == 1:
                fg = Image(np.repeat(fg.data, 3, axis=2))
            alpha = png_io.load_gray(args.alpha)
            bg = png_io.load_image(args.bg)
            if bg.channels == 1:
                bg = Image(np.repeat(bg.data, 3, axis=2))
            layer = GlyphLayer(fg.data, alpha)
            png_io.save_image(composite(layer, bg), args.output)
            return EXIT_OK
        if args.tool == "content":
            img = render_content_image(args.text, (args.height, args.width))
            png_io.save_image(img, args.output)
            return EXIT_OK
        raise AssertionError(f"unhandled tool {args.tool}")
    except UnidentifiedImageError as exc:
        _err(f"not a decodable image: {exc}")
        return EXIT_INVALID_IMAGE
    except (EmptyText, UnsupportedCharacter, TextWiderThanCanvas) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except SteForgeError as exc:
        _err(str(exc))
        return EXIT_ERROR
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO


def _parse_components(text: str) -> LossComponents:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 9:
        raise ConfigError(
            "total expects 9 comma-separated scalars: background_l2,text_l2,"
            "skeleton_dice,text_gan,fusion_l2,fusion_gan,perceptual,style,recognizer")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad component scalar: {exc}") from exc
    return LossComponents(*values)


def cmd_loss(args: argparse.Namespace) -> int:
    try:
        if args.loss in ("l2", "dice"):
            if not args.target or not args.output:
                raise ConfigError(f"--loss {args.loss} needs --target and --output")
            t = png_io.load_gray(args.target)
            o = png_io.load_gray(args.output)
            value = l2_loss(t, o) if args.loss == "l2" else dice_loss(t, o)
        elif args.loss == "gan":
            if args.d_real is None or args.d_fake is None:
                raise ConfigError("--loss gan needs --d-real and --d-fake")
            value = gan_loss_value(args.d_real, args.d_fake)
        elif args.loss == "rec":
            if not args.probs or not args.target_word:
                raise ConfigError("--loss rec needs --probs and --target-word")
            charset = (letters_digits_charset() if args.charset == "letters_digits"
                       else default_charset())
            probs = CharProbs(metrics.load_features(args.probs))
            value = recognizer_loss(probs, charset.indices(args.target_word))
        elif args.loss == "total":
            if not args.components:
                raise ConfigError("--loss total needs --components with 9 scalars")
            value = total_losses(_parse_components(args.components)).total
        else:
            raise AssertionError(f"unhandled loss {args.loss}")
    except (ConfigError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except SteForgeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except UnidentifiedImageError as exc:
        _err(f"not a decodable image: {exc}")
        return EXIT_INVALID_IMAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO

    print(f"{value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ste-forge",
        description="Synthesize paired scene-text-editing data and score results.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a paired training dataset")
    gen.add_argument("--config", required=True, help="TOML config file")
    gen.add_argument("--count", type=int, required=True, help="samples to generate")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--seed", type=int, default=None,
                     help="override the config's master_seed")
    gen.add_argument("--threads", type=int, default=None,
                     help="worker threads (default: $STE_FORGE_THREADS or 1)")
    gen.set_defaults(func=cmd_generate)

    ev = sub.add_parser("evaluate", help="score predictions against ground truth")
    ev.add_argument("--pred", required=True, help="directory of predicted images")
    ev.add_argument("--gt", required=True, help="directory of ground-truth images")
    ev.add_argument("--fid-features-a", default=None, help="feature file, predictions")
    ev.add_argument("--fid-features-b", default=None, help="feature file, ground truth")
    ev.add_argument("--wra-pred", default=None, help="recognized words, one per line")
    ev.add_argument("--wra-target", default=None, help="target words, one per line")
    ev.add_argument("--format", choices=("json", "csv"), default="json")
    ev.add_argument("--out", default=None, help="write the report here instead of stdout")
    ev.set_defaults(func=cmd_evaluate)

    tool = sub.add_parser("tool", help="single-image ground-truth operations")
    tool_sub = tool.add_subparsers(dest="tool", required=True)

    t_skel = tool_sub.add_parser("skeletonize", help="thin a binary mask")
    t_skel.add_argument("--in", dest="input", required=True)
    t_skel.add_argument("--out", dest="output", required=True)

    t_inv = tool_sub.add_parser("invert", help="complement a binary mask")
    t_inv.add_argument("--in", dest="input", required=True)
    t_inv.add_argument("--out", dest="output", required=True)

    t_mask = tool_sub.add_parser("mask", help="binarize a coverage image")
    t_mask.add_argument("--in", dest="input", required=True)
    t_mask.add_argument("--out", dest="output", required=True)
    t_mask.add_argument("--threshold", type=float, default=0.5)

    t_comp = tool_sub.add_parser("composite", help="alpha-over a layer onto a background")
    t_comp.add_argument("--fg", required=True, help="foreground color image")
    t_comp.add_argument("--alpha", required=True, help="grayscale coverage image")
    t_comp.add_argument("--bg", required=True, help="background image")
    t_comp.add_argument("--out", dest="output", required=True)

    t_content = tool_sub.add_parser("content", help="render a standard-format word image")
    t_content.add_argument("--text", required=True)
    t_content.add_argument("--out", dest="output", required=True)
    t_content.add_argument("--height", type=int, default=64)
    t_content.add_argument("--width", type=int, default=256)

    tool.set_defaults(func=cmd_tool)

    loss = sub.add_parser("loss", help="evaluate one loss oracle")
    loss.add_argument("--loss", required=True,
                      choices=("l2", "dice", "gan", "rec", "total"))
    loss.add_argument("--target", default=None, help="target image/mask file")
    loss.add_argument("--output", default=None, help="output image/mask file")
    loss.add_argument("--d-real", type=float, default=None)
    loss.add_argument("--d-fake", type=float, default=None)
    loss.add_argument("--probs", default=None,
                      help="per-step class probabilities (feature-file or CSV)")
    loss.add_argument("--target-word", default=None)
    loss.add_argument("--charset", choices=("letters", "letters_digits"),
                      default="letters")
    loss.add_argument("--components", default=None,
                      help="9 comma-separated scalars for --loss total")
    loss.set_defaults(func=cmd_loss)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SteForgeError as exc:
        _err(str(exc))
        return EXIT_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
