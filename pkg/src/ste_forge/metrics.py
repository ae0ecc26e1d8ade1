"""Evaluation metrics: MSE, PSNR, SSIM, Fréchet distance, and WRA.

Images are compared in the unit float range. The Fréchet distance operates
on externally computed embedding vectors (this package computes moments and
the distance itself; no embedding network ships here), and word recognition
accuracy compares externally produced transcriptions. evaluate_dirs ties it
all together over a pair of prediction/ground-truth directories.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import png_io
from .data_model import Image
from .errors import (
    DimMismatch,
    EmptyLists,
    LengthMismatch,
    MalformedFeatureFile,
    NonFiniteInput,
    NonSymmetric,
    NoPairs,
    NotPSD,
    PairDimMismatch,
    TooFewSamples,
    TooSmall,
)

PSNR_CAP_DB = 100.0  # stand-in for infinity when averaging over a dataset

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03

_FEATURE_MAGIC = b"FIDF"
_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


def _data(x: Union[Image, np.ndarray]) -> np.ndarray:
    if isinstance(x, Image):
        return x.data
    return np.asarray(x, dtype=np.float64)


def mse(a: Union[Image, np.ndarray], b: Union[Image, np.ndarray]) -> float:
    """Mean squared error over all elements."""
    da, db = _data(a), _data(b)
    if da.shape != db.shape:
        raise DimMismatch(f"{da.shape} vs {db.shape}")
    diff = da - db
    return float(np.mean(diff * diff))


def psnr(a: Union[Image, np.ndarray], b: Union[Image, np.ndarray]) -> float:
    """Peak signal-to-noise ratio in dB with MAX = 1.

    Identical inputs return math.inf; use PSNR_CAP_DB when averaging.
    """
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def _luma(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return arr
    if arr.shape[2] == 1:
        return arr[:, :, 0]
    return 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]


def _window_taps() -> np.ndarray:
    radius = _SSIM_WINDOW // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets * offsets) / (2.0 * _SSIM_SIGMA * _SSIM_SIGMA))
    return taps / taps.sum()


def _valid_filter(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable windowed average at every fully-inside window position."""
    k = len(taps)
    rows = sliding_window_view(plane, k, axis=0) @ taps
    return sliding_window_view(rows, k, axis=1) @ taps


def _ssim_plane(x: np.ndarray, y: np.ndarray) -> float:
    taps = _window_taps()
    mu_x = _valid_filter(x, taps)
    mu_y = _valid_filter(y, taps)
    xx = _valid_filter(x * x, taps) - mu_x * mu_x
    yy = _valid_filter(y * y, taps) - mu_y * mu_y
    xy = _valid_filter(x * y, taps) - mu_x * mu_y
    c1 = _SSIM_K1 * _SSIM_K1
    c2 = _SSIM_K2 * _SSIM_K2
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    return float(np.mean(numerator / denominator))


def ssim(a: Union[Image, np.ndarray], b: Union[Image, np.ndarray],
         *, per_channel: bool = False) -> float:
    """Mean structural similarity (11x11 Gaussian window, sigma 1.5, L=1).

    Color images are compared on luma by default; per_channel=True averages
    the per-channel indices instead. Only fully-inside window positions
    contribute (no padding), so inputs must be at least 11px on each side.
    """
    da, db = _data(a), _data(b)
    if da.shape != db.shape:
        raise DimMismatch(f"{da.shape} vs {db.shape}")
    if min(da.shape[0], da.shape[1]) < _SSIM_WINDOW:
        raise TooSmall(f"need at least {_SSIM_WINDOW}px per side, got {da.shape[:2]}")
    if per_channel and da.ndim == 3 and da.shape[2] > 1:
        values = [_ssim_plane(da[:, :, c], db[:, :, c]) for c in range(da.shape[2])]
        return float(np.mean(values))
    return _ssim_plane(_luma(da), _luma(db))


def compute_stats(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance of an (n, d) feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimMismatch(f"expected (n, d) features, got shape {features.shape}")
    if features.shape[0] < 2:
        raise TooFewSamples(f"covariance needs >= 2 samples, got {features.shape[0]}")
    if not np.isfinite(features).all():
        raise NonFiniteInput("features contain non-finite values")
    mu = features.mean(axis=0)
    sigma = np.atleast_2d(np.cov(features, rowvar=False))
    sigma = (sigma + sigma.T) / 2.0
    return mu, sigma


def frechet_distance(mu1: np.ndarray, sigma1: np.ndarray,
                     mu2: np.ndarray, sigma2: np.ndarray) -> float:
    """Fréchet distance between two Gaussians given their moments.

    ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)), the product root taken
    by eigendecomposition of the symmetrized product. Symmetrizing makes the
    result exactly invariant under argument swap; tiny negative eigenvalues
    (above -1e-5) are treated as zero, anything lower is rejected.
    """
    mu1 = np.asarray(mu1, dtype=np.float64).ravel()
    mu2 = np.asarray(mu2, dtype=np.float64).ravel()
    sigma1 = np.asarray(sigma1, dtype=np.float64)
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    d = mu1.shape[0]
    if mu2.shape[0] != d or sigma1.shape != (d, d) or sigma2.shape != (d, d):
        raise DimMismatch(
            f"inconsistent dims: mu {mu1.shape}/{mu2.shape}, "
            f"sigma {sigma1.shape}/{sigma2.shape}")
    for arr in (mu1, mu2, sigma1, sigma2):
        if not np.isfinite(arr).all():
            raise NonFiniteInput("moments contain non-finite values")
    for sigma in (sigma1, sigma2):
        scale = max(1.0, float(np.abs(sigma).max()))
        if float(np.abs(sigma - sigma.T).max()) > 1e-8 * scale:
            raise NonSymmetric("covariance matrix is not symmetric")
    diff = mu1 - mu2
    product = sigma1 @ sigma2
    eigenvalues = np.linalg.eigvalsh((product + product.T) / 2.0)
    if eigenvalues.min(initial=0.0) < -1e-5:
        raise NotPSD(
            f"covariance product has eigenvalue {eigenvalues.min():.3e} < -1e-5")
    eigenvalues = np.where(eigenvalues > 0.0, eigenvalues, 0.0)
    trace_root = float(np.sqrt(eigenvalues).sum())
    # (tr1 + tr2) grouped first so swapping the arguments is bitwise neutral
    trace_sum = float(np.trace(sigma1)) + float(np.trace(sigma2))
    return float(diff @ diff) + trace_sum - 2.0 * trace_root


def write_features(path: Union[str, Path], features: np.ndarray) -> None:
    """Write an (n, d) feature matrix in the binary feature-file format."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimMismatch(f"expected (n, d) features, got shape {features.shape}")
    n, d = features.shape
    payload = features.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(_FEATURE_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(payload)


def load_features(path: Union[str, Path]) -> np.ndarray:
    """Read a feature matrix: binary format, or CSV fallback (n rows x d).

    Binary layout: magic "FIDF", u32 row count, u32 dimension, then
    row-major little-endian float32 values.
    """
    raw = Path(path).read_bytes()
    if raw[:4] == _FEATURE_MAGIC:
        if len(raw) < 12:
            raise MalformedFeatureFile(f"{path}: truncated header")
        n, d = struct.unpack("<II", raw[4:12])
        expected = 12 + n * d * 4
        if n == 0 or d == 0:
            raise MalformedFeatureFile(f"{path}: empty feature matrix ({n}x{d})")
        if len(raw) != expected:
            raise MalformedFeatureFile(
                f"{path}: payload is {len(raw) - 12} bytes, expected {expected - 12}")
        features = np.frombuffer(raw, dtype="<f4", offset=12).astype(np.float64)
        features = features.reshape(n, d)
    else:
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFeatureFile(f"{path}: neither binary format nor UTF-8 CSV") from exc
        rows = []
        width = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = [float(cell) for cell in line.split(",")]
            except ValueError as exc:
                raise MalformedFeatureFile(f"{path}:{lineno}: {exc}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MalformedFeatureFile(
                    f"{path}:{lineno}: {len(row)} values, expected {width}")
            rows.append(row)
        if not rows:
            raise MalformedFeatureFile(f"{path}: no feature rows")
        features = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(features).all():
        raise MalformedFeatureFile(f"{path}: non-finite feature values")
    return features


def wra(predicted: Sequence[str], target: Sequence[str],
        case_sensitive: bool = True) -> float:
    """Word recognition accuracy: exact-match fraction of two string lists."""
    if len(predicted) == 0 and len(target) == 0:
        raise EmptyLists("cannot score empty transcription lists")
    if len(predicted) != len(target):
        raise LengthMismatch(f"{len(predicted)} predictions vs {len(target)} targets")
    if case_sensitive:
        hits = sum(1 for p, t in zip(predicted, target) if p == t)
    else:
        hits = sum(1 for p, t in zip(predicted, target) if p.lower() == t.lower())
    return hits / len(predicted)


@dataclass(frozen=True)
class MetricReport:
    """Aggregated evaluation results over a directory pair."""

    mse: float
    psnr_db: float  # math.inf when every pair matched exactly
    ssim: float
    fid: Optional[float]
    wra: Optional[float]
    n_pairs: int

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError("a report needs at least one pair")
        if not -1.0 - 1e-9 <= self.ssim <= 1.0 + 1e-9:
            raise ValueError(f"ssim {self.ssim} outside [-1, 1]")
        if self.wra is not None and not 0.0 <= self.wra <= 1.0:
            raise ValueError(f"wra {self.wra} outside [0, 1]")

    def _fields(self) -> dict:
        out: dict = {
            "mse": self.mse,
            "psnr_db": "inf" if math.isinf(self.psnr_db) else self.psnr_db,
            "ssim": self.ssim,
        }
        if self.fid is not None:
            out["fid"] = self.fid
        if self.wra is not None:
            out["wra"] = self.wra
        out["n_pairs"] = self.n_pairs
        return out

    def to_json(self) -> str:
        return json.dumps(self._fields(), indent=2)

    def to_csv(self) -> str:
        def cell(value) -> str:
            if value is None:
                return ""
            if isinstance(value, float) and math.isinf(value):
                return "inf"
            return str(value)

        row = [self.mse,
               math.inf if math.isinf(self.psnr_db) else self.psnr_db,
               self.ssim, self.fid, self.wra, self.n_pairs]
        return ("mse,psnr_db,ssim,fid,wra,n_pairs\n"
                + ",".join(cell(v) for v in row) + "\n")


def _list_images(directory: Path) -> dict[str, Path]:
    return {p.name: p for p in sorted(directory.iterdir())
            if p.suffix.lower() in _IMAGE_SUFFIXES}


def read_transcriptions(path: Union[str, Path]) -> list[str]:
    """One transcription per line; line i pairs with the i-th sorted image."""
    text = Path(path).read_text(encoding="utf-8")
    return [line.rstrip("\n") for line in text.splitlines()]


def evaluate_dirs(
    pred_dir: Union[str, Path],
    gt_dir: Union[str, Path],
    *,
    features_a: Optional[Union[str, Path, np.ndarray]] = None,
    features_b: Optional[Union[str, Path, np.ndarray]] = None,
    transcriptions_pred: Optional[Sequence[str]] = None,
    transcriptions_target: Optional[Sequence[str]] = None,
    case_sensitive: bool = True,
) -> MetricReport:
    """Score a prediction directory against a ground-truth directory.

    Images are paired by filename (the sorted intersection of both
    directories); filenames present on only one side are warned about and
    skipped. The per-pair mean PSNR treats exact matches as PSNR_CAP_DB,
    except that the sentinel infinity is kept when every single pair
    matched exactly. FID is computed when both feature inputs are supplied;
    WRA when both transcription lists are supplied.
    """
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    pred_files = _list_images(pred_dir)
    gt_files = _list_images(gt_dir)
    names = sorted(set(pred_files) & set(gt_files))
    leftover = len(pred_files) + len(gt_files) - 2 * len(names)
    if not names:
        raise NoPairs(f"no shared image filenames between {pred_dir} and {gt_dir}")
    if leftover:
        warnings.warn(f"{leftover} unmatched image file(s) ignored", stacklevel=2)

    mse_values: list[float] = []
    psnr_values: list[float] = []
    ssim_values: list[float] = []
    for name in names:
        a = png_io.load_image(pred_files[name])
        b = png_io.load_image(gt_files[name])
        if a.data.shape != b.data.shape:
            raise PairDimMismatch(f"{name}: pred {a.data.shape} vs gt {b.data.shape}")
        mse_values.append(mse(a, b))
        psnr_values.append(psnr(a, b))
        ssim_values.append(ssim(a, b))

    if all(math.isinf(p) for p in psnr_values):
        psnr_mean = math.inf
    else:
        psnr_mean = float(np.mean(
            [PSNR_CAP_DB if math.isinf(p) else p for p in psnr_values]))

    fid_value: Optional[float] = None
    if features_a is not None and features_b is not None:
        fa = features_a if isinstance(features_a, np.ndarray) else load_features(features_a)
        fb = features_b if isinstance(features_b, np.ndarray) else load_features(features_b)
        mu_a, sigma_a = compute_stats(fa)
        mu_b, sigma_b = compute_stats(fb)
        fid_value = frechet_distance(mu_a, sigma_a, mu_b, sigma_b)

    wra_value: Optional[float] = None
    if transcriptions_pred is not None and transcriptions_target is not None:
        wra_value = wra(list(transcriptions_pred), list(transcriptions_target),
                        case_sensitive=case_sensitive)

    return MetricReport(
        mse=float(np.mean(mse_values)),
        psnr_db=psnr_mean,
        ssim=float(np.mean(ssim_values)),
        fid=fid_value,
        wra=wra_value,
        n_pairs=len(names),
    )
