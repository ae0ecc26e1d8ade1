"""Forward-only loss oracles for training scene-text-editing networks.

Each function evaluates one training objective on concrete arrays and
returns a float. There are no gradients and no networks here: the point is
a trustworthy reference value that any framework's implementation can be
checked against. Discriminator scores and character probabilities are
wrapped in small validated types so boundary values (0, 1) are clamped
once, consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .data_model import Image, Mask
from .errors import (
    DimMismatch,
    IndexOutOfRange,
    LayerMismatch,
    NonFiniteInput,
)

_SCORE_EPS = 1e-7
_DICE_EPS = 1e-6
_PROB_EPS = 1e-7

ArrayLike = Union[Image, Mask, np.ndarray, float, int, Sequence]


def _plane(x: ArrayLike) -> np.ndarray:
    if isinstance(x, Image):
        return x.data
    if isinstance(x, Mask):
        return x.data.astype(np.float64)
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class LossWeights:
    """Balance factors combining the individual objectives."""

    lambda_ts1: float = 10.0
    lambda_f1: float = 10.0
    lambda_v1: float = 1.0
    lambda_v2: float = 500.0
    lambda_1: float = 1.0
    lambda_2: float = 0.1

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class DiscriminatorScore:
    """Post-sigmoid discriminator output: a scalar or a map of probabilities.

    Values are clamped into [1e-7, 1 - 1e-7] on construction so downstream
    logs never see exact 0 or 1.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.size == 0:
            raise ValueError("score must contain at least one value")
        if not np.isfinite(values).all():
            raise NonFiniteInput("discriminator scores must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("discriminator scores must lie in [0, 1]")
        values = np.clip(values, _SCORE_EPS, 1.0 - _SCORE_EPS)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class CharProbs:
    """Per-step character distributions: (steps, classes), rows sum to 1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise ValueError(f"expected (steps, classes), got shape {values.shape}")
        if not np.isfinite(values).all():
            raise NonFiniteInput("probabilities must be finite")
        if values.min() < 0.0:
            raise ValueError("probabilities must be non-negative")
        sums = values.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise ValueError("each probability row must sum to 1 (+/- 1e-6)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def steps(self) -> int:
        return self.values.shape[0]

    @property
    def classes(self) -> int:
        return self.values.shape[1]


def _score(x: Union[DiscriminatorScore, ArrayLike]) -> np.ndarray:
    if isinstance(x, DiscriminatorScore):
        return x.values
    return DiscriminatorScore(np.asarray(x, dtype=np.float64)).values


def l2_loss(target: ArrayLike, output: ArrayLike) -> float:
    """Mean squared error over all elements."""
    t = _plane(target)
    o = _plane(output)
    if t.shape != o.shape:
        raise DimMismatch(f"target {t.shape} vs output {o.shape}")
    diff = t - o
    return float(np.mean(diff * diff))


def dice_loss(target: ArrayLike, output: ArrayLike) -> float:
    """One minus the (smoothed) Dice overlap coefficient.

    Inputs are rasters in [0,1]; typically a binary target against a soft
    prediction. Smoothing makes the empty-vs-empty case come out 0.
    """
    t = _plane(target)
    o = _plane(output)
    if t.shape != o.shape:
        raise DimMismatch(f"target {t.shape} vs output {o.shape}")
    for name, arr in (("target", t), ("output", o)):
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError(f"dice {name} values must lie in [0, 1]")
    overlap = 2.0 * float(np.sum(t * o)) + _DICE_EPS
    total = float(np.sum(t * t)) + float(np.sum(o * o)) + _DICE_EPS
    return 1.0 - overlap / total


def gan_loss_value(d_real: Union[DiscriminatorScore, ArrayLike],
                   d_fake: Union[DiscriminatorScore, ArrayLike]) -> float:
    """Discriminator objective value: E[log D(real)] + E[log(1 - D(fake))].

    Always <= 0; approaches 0 as the discriminator becomes perfectly
    confident (scores are epsilon-clamped, so the value stays finite).
    """
    real = _score(d_real)
    fake = _score(d_fake)
    return float(np.mean(np.log(real)) + np.mean(np.log(1.0 - fake)))


def generator_adversarial_loss(d_fake: Union[DiscriminatorScore, ArrayLike],
                               mode: str = "non_saturating") -> float:
    """Generator-side adversarial term.

    "saturating" is mean log(1 - D(fake)) (the minimax form); the
    "non_saturating" default is mean -log D(fake), the variant actually
    trained in practice.
    """
    fake = _score(d_fake)
    if mode == "saturating":
        return float(np.mean(np.log(1.0 - fake)))
    if mode == "non_saturating":
        return float(np.mean(-np.log(fake)))
    raise ValueError(f"unknown mode {mode!r}; expected saturating or non_saturating")


def recognizer_loss(probs: CharProbs, target: Sequence[int]) -> float:
    """Mean negative log-likelihood of the target characters.

    target holds charset indices, one per sequence position; it may be
    shorter than the probability sequence (padding steps are ignored).
    """
    indices = list(target)
    if len(indices) == 0:
        raise IndexOutOfRange("target must contain at least one index")
    if len(indices) > probs.steps:
        raise IndexOutOfRange(
            f"target length {len(indices)} exceeds {probs.steps} sequence steps")
    total = 0.0
    for step, idx in enumerate(indices):
        if not 0 <= idx < probs.classes:
            raise IndexOutOfRange(f"index {idx} outside [0, {probs.classes}) at step {step}")
        total += -math.log(max(probs.values[step, idx], _PROB_EPS))
    return total / len(indices)


def _check_feature_lists(features_t: Sequence[np.ndarray],
                         features_o: Sequence[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray]]:
    if len(features_t) != len(features_o):
        raise LayerMismatch(f"{len(features_t)} layers vs {len(features_o)}")
    if len(features_t) == 0:
        raise LayerMismatch("feature lists must contain at least one layer")
    pairs = []
    for i, (ft, fo) in enumerate(zip(features_t, features_o)):
        ft = np.asarray(ft, dtype=np.float64)
        fo = np.asarray(fo, dtype=np.float64)
        if ft.shape != fo.shape:
            raise LayerMismatch(f"layer {i}: {ft.shape} vs {fo.shape}")
        pairs.append((ft, fo))
    return pairs


def perceptual_loss(features_t: Sequence[np.ndarray],
                    features_o: Sequence[np.ndarray]) -> float:
    """Content distance: sum over layers of the feature-map MSE."""
    total = 0.0
    for ft, fo in _check_feature_lists(features_t, features_o):
        diff = ft - fo
        total += float(np.mean(diff * diff))
    return total


def _gram(features: np.ndarray) -> np.ndarray:
    """Channel correlation matrix of a (C, H, W) map, 1/(C*H*W) normalized."""
    if features.ndim == 2:
        features = features[None, :, :]
    if features.ndim != 3:
        raise LayerMismatch(f"expected (C, H, W) feature map, got shape {features.shape}")
    c, h, w = features.shape
    flat = features.reshape(c, h * w)
    return (flat @ flat.T) / float(c * h * w)


def style_loss(features_t: Sequence[np.ndarray],
               features_o: Sequence[np.ndarray]) -> float:
    """Texture distance: sum over layers of the Gram-matrix MSE."""
    total = 0.0
    for ft, fo in _check_feature_lists(features_t, features_o):
        diff = _gram(ft) - _gram(fo)
        total += float(np.mean(diff * diff))
    return total


@dataclass(frozen=True)
class LossComponents:
    """The nine scalar terms the combined training objective is built from."""

    background_l2: float = 0.0   # clean-background reconstruction
    text_l2: float = 0.0         # swapped-text foreground reconstruction
    skeleton_dice: float = 0.0   # stroke-skeleton overlap
    text_gan: float = 0.0        # adversarial term on the swapped text
    fusion_l2: float = 0.0       # final composite reconstruction
    fusion_gan: float = 0.0      # adversarial term on the final composite
    perceptual: float = 0.0
    style: float = 0.0
    recognizer: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return (self.background_l2, self.text_l2, self.skeleton_dice,
                self.text_gan, self.fusion_l2, self.fusion_gan,
                self.perceptual, self.style, self.recognizer)


class TotalLosses(NamedTuple):
    text: float     # weighted text-swap branch
    fusion: float   # weighted fusion branch
    feature: float  # perceptual + style combination
    total: float    # full training objective


def total_losses(components: LossComponents,
                 weights: LossWeights = LossWeights()) -> TotalLosses:
    """Combine the nine component scalars into branch totals and the full sum.

    text    = lambda_ts1 * text_l2 + skeleton_dice + text_gan
    fusion  = lambda_f1 * fusion_l2 + fusion_gan
    feature = lambda_v1 * perceptual + lambda_v2 * style
    total   = background_l2 + text + fusion + lambda_1*feature + lambda_2*recognizer
    """
    for name, value in components.__dict__.items():
        if not math.isfinite(value):
            raise NonFiniteInput(f"component {name} is not finite: {value}")
    text = weights.lambda_ts1 * components.text_l2 + components.skeleton_dice + components.text_gan
    fusion = weights.lambda_f1 * components.fusion_l2 + components.fusion_gan
    feature = weights.lambda_v1 * components.perceptual + weights.lambda_v2 * components.style
    total = (components.background_l2 + text + fusion
             + weights.lambda_1 * feature + weights.lambda_2 * components.recognizer)
    return TotalLosses(text, fusion, feature, total)
