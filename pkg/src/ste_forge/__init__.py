"""ste-forge: paired scene-text-editing data synthesis, loss oracles, metrics.

The package builds fully aligned training tuples (source image, target
image, background, foreground, stroke masks, skeleton) by construction,
provides forward-only reference values for the common editing losses, and
scores predictions with MSE/PSNR/SSIM, Fréchet distance, and word accuracy.
"""

from .charset import Charset, default_charset, letters_digits_charset
from .data_model import (
    Border,
    GenConfig,
    Image,
    Mask,
    SampleTuple,
    Shadow,
    TextStyle,
    from_bytes,
    to_bytes,
    validate_tuple,
)
from .errors import SteForgeError
from .geometry import blur_layer, gaussian_blur, perspective_warp, rotate
from .ground_truth import (
    assemble_sample,
    extract_mask,
    invert_mask,
    mask_multiply,
    render_styled,
    skeletonize,
)
from .losses import (
    CharProbs,
    DiscriminatorScore,
    LossComponents,
    LossWeights,
    TotalLosses,
    dice_loss,
    gan_loss_value,
    generator_adversarial_loss,
    l2_loss,
    perceptual_loss,
    recognizer_loss,
    style_loss,
    total_losses,
)
from .metrics import (
    MetricReport,
    compute_stats,
    evaluate_dirs,
    frechet_distance,
    load_features,
    mse,
    psnr,
    ssim,
    wra,
    write_features,
)
from .pipeline import (
    DatasetManifest,
    generate_dataset,
    read_manifest,
    read_sample,
    sample_style,
)
from .text_render import (
    FontRasterizer,
    GlyphLayer,
    PillowRasterizer,
    composite,
    default_rasterizer,
    rasterize_text,
    render_content_image,
)

__version__ = "0.1.0"

__all__ = [
    "Border", "Charset", "CharProbs", "DatasetManifest", "DiscriminatorScore",
    "FontRasterizer", "GenConfig", "GlyphLayer", "Image", "LossComponents",
    "LossWeights", "Mask", "MetricReport", "PillowRasterizer", "SampleTuple",
    "Shadow", "SteForgeError", "TextStyle", "TotalLosses",
    "assemble_sample", "blur_layer", "composite", "compute_stats",
    "default_charset", "default_rasterizer", "dice_loss", "evaluate_dirs",
    "extract_mask", "frechet_distance", "from_bytes", "gan_loss_value",
    "gaussian_blur", "generate_dataset", "generator_adversarial_loss",
    "invert_mask", "l2_loss", "letters_digits_charset", "load_features",
    "mask_multiply", "mse", "perceptual_loss", "perspective_warp", "psnr",
    "rasterize_text", "read_manifest", "read_sample", "recognizer_loss",
    "render_content_image", "render_styled", "rotate", "sample_style",
    "skeletonize", "ssim", "style_loss", "to_bytes", "total_losses",
    "validate_tuple", "wra", "write_features",
]
