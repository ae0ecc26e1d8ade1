import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ste_forge.errors import (
    DimMismatch,
    IndexOutOfRange,
    LayerMismatch,
    NonFiniteInput,
)
from ste_forge.losses import (
    CharProbs,
    DiscriminatorScore,
    LossComponents,
    LossWeights,
    dice_loss,
    gan_loss_value,
    generator_adversarial_loss,
    l2_loss,
    perceptual_loss,
    recognizer_loss,
    style_loss,
    total_losses,
)

# ---------------------------------------------------------------- l2


def test_l2_examples():
    z = np.zeros((8, 8))
    assert l2_loss(z, z) == 0.0
    assert l2_loss(z, np.full((8, 8), 0.5)) == 0.25
    assert l2_loss(z, np.ones((8, 8))) == 1.0


def test_l2_symmetric_and_positive():
    rng = np.random.default_rng(1)
    a, b = rng.uniform(0, 1, (2, 6, 6))
    assert l2_loss(a, b) == l2_loss(b, a)
    assert l2_loss(a, b) > 0.0


def test_l2_dim_mismatch():
    with pytest.raises(DimMismatch):
        l2_loss(np.zeros((4, 4)), np.zeros((4, 5)))


# ---------------------------------------------------------------- dice


def test_dice_examples():
    m = np.array([1.0, 1.0, 0.0, 0.0])
    assert dice_loss(m, m) <= 1e-6
    disjoint = np.array([0.0, 0.0, 1.0, 1.0])
    assert abs(dice_loss(m, disjoint) - 1.0) <= 1e-6
    val = dice_loss([1, 1, 0, 0], [1, 0, 0, 0])
    assert abs(val - (1.0 - 4.0 / 6.0)) <= 1e-5


def test_dice_empty_vs_empty_is_zero():
    z = np.zeros(10)
    assert dice_loss(z, z) == 0.0


def test_dice_rejects_out_of_range():
    with pytest.raises(ValueError):
        dice_loss([0.5, 2.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        dice_loss([0.5, 0.5], [-0.1, 0.5])


@settings(max_examples=100)
@given(
    hnp.arrays(np.float64, (12,), elements=st.floats(0, 1)),
    hnp.arrays(np.float64, (12,), elements=st.floats(0, 1)),
)
def test_dice_bounded_and_self_zero(t, o):
    v = dice_loss(t, o)
    assert -1e-9 <= v <= 1.0 + 1e-9
    assert dice_loss(t, t) <= 1e-6


# ---------------------------------------------------------------- gan


def test_gan_examples():
    assert abs(gan_loss_value(0.5, 0.5) - 2 * math.log(0.5)) <= 1e-4
    assert abs(gan_loss_value(0.9, 0.1) - (math.log(0.9) + math.log(0.9))) <= 1e-4
    best = gan_loss_value(1.0, 0.0)  # clamped at the boundary
    assert -1e-6 < best < 0.0


def test_gan_accepts_score_maps():
    real = DiscriminatorScore(np.full((4, 4), 0.5))
    fake = DiscriminatorScore(np.full((4, 4), 0.5))
    assert abs(gan_loss_value(real, fake) - 2 * math.log(0.5)) <= 1e-9


def test_gan_always_nonpositive():
    rng = np.random.default_rng(2)
    for _ in range(50):
        assert gan_loss_value(rng.uniform(), rng.uniform()) <= 0.0


def test_generator_adversarial_modes():
    assert abs(generator_adversarial_loss(0.5, mode="non_saturating") - 0.6931) <= 1e-4
    assert abs(generator_adversarial_loss(0.5, mode="saturating") + 0.6931) <= 1e-4
    # generator optimum: confident fake → loss → 0 from above
    assert 0.0 < generator_adversarial_loss(1.0, mode="non_saturating") < 1e-6
    with pytest.raises(ValueError):
        generator_adversarial_loss(0.5, mode="bogus")


def test_discriminator_score_validation():
    assert float(DiscriminatorScore(np.array(0.0)).values) == 1e-7
    assert float(DiscriminatorScore(np.array(1.0)).values) == 1.0 - 1e-7
    with pytest.raises(ValueError):
        DiscriminatorScore(np.array(1.5))
    with pytest.raises(ValueError):
        DiscriminatorScore(np.array(-0.1))
    with pytest.raises(ValueError):
        DiscriminatorScore(np.array(float("nan")))


# ---------------------------------------------------------------- recognizer


def test_recognizer_one_hot_is_zero():
    hot = np.zeros((3, 5))
    hot[[0, 1, 2], [1, 2, 3]] = 1.0
    assert recognizer_loss(CharProbs(hot), [1, 2, 3]) <= 1e-6


def test_recognizer_uniform_is_log_classes():
    p52 = CharProbs(np.full((6, 52), 1.0 / 52))
    assert abs(recognizer_loss(p52, [0, 5, 51]) - math.log(52)) <= 1e-4
    p62 = CharProbs(np.full((6, 62), 1.0 / 62))
    assert abs(recognizer_loss(p62, [10, 20]) - math.log(62)) <= 1e-4


def test_recognizer_index_errors():
    probs = CharProbs(np.full((2, 4), 0.25))
    with pytest.raises(IndexOutOfRange):
        recognizer_loss(probs, [0, 1, 2])  # longer than steps
    with pytest.raises(IndexOutOfRange):
        recognizer_loss(probs, [4])  # class out of range


def test_char_probs_validation():
    good = np.full((4, 10), 0.1)
    assert CharProbs(good).steps == 4
    assert CharProbs(good).classes == 10
    bad_sum = good.copy()
    bad_sum[1, 0] = 0.5
    with pytest.raises(ValueError):
        CharProbs(bad_sum)
    negative = np.full((2, 2), 0.5)
    negative[0] = (1.5, -0.5)
    with pytest.raises(ValueError):
        CharProbs(negative)
    with pytest.raises(ValueError):
        CharProbs(np.full((4,), 0.25))  # must be 2-D


# ---------------------------------------------------------------- perceptual / style


def test_perceptual_examples():
    rng = np.random.default_rng(3)
    feats = [rng.uniform(0, 1, (4, 6, 6)) for _ in range(3)]
    assert perceptual_loss(feats, [f.copy() for f in feats]) == 0.0
    base = [np.zeros((2, 4, 4))]
    assert perceptual_loss(base, [np.ones((2, 4, 4))]) == 1.0
    # per-layer MSEs 0.25 and 0.75 add up
    a = [np.zeros((1, 4, 4)), np.zeros((1, 4, 4))]
    b = [np.full((1, 4, 4), 0.5), np.full((1, 4, 4), math.sqrt(0.75))]
    assert abs(perceptual_loss(a, b) - 1.0) <= 1e-12


def test_perceptual_layer_mismatch():
    with pytest.raises(LayerMismatch):
        perceptual_loss([np.zeros((1, 2, 2))], [])
    with pytest.raises(LayerMismatch):
        perceptual_loss([np.zeros((1, 2, 2))], [np.zeros((1, 3, 3))])


def test_style_identical_is_zero():
    rng = np.random.default_rng(4)
    feats = [rng.uniform(0, 1, (3, 5, 5))]
    assert style_loss(feats, [f.copy() for f in feats]) == 0.0


def test_style_constant_map_closed_form():
    a, b = 0.6, 0.3
    fa = [np.full((1, 4, 8), a)]
    fb = [np.full((1, 4, 8), b)]
    expected = (a * a - b * b) ** 2
    assert abs(style_loss(fa, fb) - expected) <= 1e-12


def test_style_invariant_under_shared_channel_permutation():
    rng = np.random.default_rng(5)
    ft = rng.uniform(0, 1, (4, 6, 6))
    fo = rng.uniform(0, 1, (4, 6, 6))
    base = style_loss([ft], [fo])
    perm = rng.permutation(4)
    permuted = style_loss([ft[perm]], [fo[perm]])
    assert abs(base - permuted) <= 1e-12


def test_style_detects_texture_difference():
    # same per-pixel mean, different channel correlations
    ft = np.zeros((2, 2, 2))
    ft[0] = 1.0
    fo = np.full((2, 2, 2), 0.5)
    assert style_loss([ft], [fo]) > 0.0


# ---------------------------------------------------------------- totals


def _components(value=1.0, **overrides):
    fields = dict(
        background_l2=value, text_l2=value, skeleton_dice=value,
        text_gan=value, fusion_l2=value, fusion_gan=value,
        perceptual=value, style=value, recognizer=value,
    )
    fields.update(overrides)
    return LossComponents(**fields)


def test_totals_zero_components():
    t = total_losses(_components(0.0))
    assert t.text == t.fusion == t.feature == t.total == 0.0


def test_totals_default_weights_all_ones():
    t = total_losses(_components(1.0))
    assert t.text == 12.0
    assert t.fusion == 11.0
    assert t.feature == 501.0
    assert t.total == 525.1


def test_totals_doubled_lambda():
    # three-term sum: 20*1 (weighted l2) + 1 (dice) + 1 (gan)
    w = LossWeights(lambda_ts1=20.0)
    assert total_losses(_components(1.0), w).text == 22.0


def test_total_linear_in_recognizer():
    base = total_losses(_components(0.0, recognizer=0.0)).total
    bumped = total_losses(_components(0.0, recognizer=1.0)).total
    assert bumped - base == 0.1  # lambda_2 exactly, all else zero
    a = total_losses(_components(1.0, recognizer=2.0)).total
    b = total_losses(_components(1.0, recognizer=3.0)).total
    assert abs((b - a) - 0.1) <= 1e-12


def test_totals_reject_non_finite():
    with pytest.raises(NonFiniteInput):
        total_losses(_components(1.0, style=float("nan")))
    with pytest.raises(NonFiniteInput):
        total_losses(_components(1.0, text_gan=float("-inf")))


def test_weights_must_be_positive():
    LossWeights()  # defaults fine
    with pytest.raises(ValueError):
        LossWeights(lambda_v2=0.0)
    with pytest.raises(ValueError):
        LossWeights(lambda_1=-1.0)


def test_components_as_tuple_order():
    c = _components(0.0, background_l2=9.0)
    assert c.as_tuple()[0] == 9.0
    assert len(c.as_tuple()) == 9
