"""Map-quality metrics: SSIM, RMSE and occupied-set alignment error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import OCCUPIED, _check_geometry
from .pgm import render_pixels

SSIM_WINDOW = 7
# stabilizing constants for the 0-255 dynamic range
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


@dataclass
class MapQuality:
    ssim: float
    rmse: float
    alignment_error: float


def _window_means(img: np.ndarray, win: int) -> np.ndarray:
    """Mean over every win x win window (valid positions only), via an
    integral image."""
    s = np.cumsum(np.cumsum(img, axis=0), axis=1)
    s = np.pad(s, ((1, 0), (1, 0)))
    total = (
        s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]
    )
    return total / (win * win)


def ssim_index(a: np.ndarray, b: np.ndarray, win: int = SSIM_WINDOW) -> float:
    """Mean structural similarity over sliding windows (stride 1)."""
    if a.shape != b.shape:
        raise ValueError("image shapes differ")
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    win = min(win, a.shape[0], a.shape[1])

    mu_a = _window_means(a, win)
    mu_b = _window_means(b, win)
    mu_aa = _window_means(a * a, win)
    mu_bb = _window_means(b * b, win)
    mu_ab = _window_means(a * b, win)

    var_a = mu_aa - mu_a * mu_a
    var_b = mu_bb - mu_b * mu_b
    cov = mu_ab - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
    den = (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError("image shapes differ")
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(math.sqrt(np.mean(diff * diff)))


def alignment_error(grid, truth) -> float:
    """Symmetric mean nearest-neighbor distance (in cells) between the two
    occupied-cell sets. 0 when both sets coincide; NaN if exactly one set
    is empty."""
    pts_a = np.argwhere(grid.cells == OCCUPIED).astype(np.float64)
    pts_b = np.argwhere(truth.cells == OCCUPIED).astype(np.float64)
    if len(pts_a) == 0 and len(pts_b) == 0:
        return 0.0
    if len(pts_a) == 0 or len(pts_b) == 0:
        return float("nan")
    return float(
        0.5 * (_directed_nn_mean(pts_a, pts_b) + _directed_nn_mean(pts_b, pts_a))
    )


def _directed_nn_mean(src: np.ndarray, dst: np.ndarray, chunk: int = 512) -> float:
    total = 0.0
    for i in range(0, len(src), chunk):
        block = src[i:i + chunk]
        d2 = ((block[:, None, :] - dst[None, :, :]) ** 2).sum(axis=2)
        total += np.sqrt(d2.min(axis=1)).sum()
    return total / len(src)


def map_quality(grid, truth) -> MapQuality:
    """Compare a belief grid against the ground truth on the grayscale
    renderings (Occupied=0, Unknown=128, Free=255)."""
    _check_geometry(grid, truth)
    img_a = render_pixels(grid)
    img_b = render_pixels(truth)
    return MapQuality(
        ssim=ssim_index(img_a, img_b),
        rmse=rmse(img_a, img_b),
        alignment_error=alignment_error(grid, truth),
    )
