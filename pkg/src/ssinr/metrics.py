"""Image quality metrics and trial statistics.

Callers rescale signals to [0, 1] first, so PSNR and SSIM are comparable
across different training ranges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ContractViolation

PSNR_CAP = 100.0


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 1.0


@dataclass(frozen=True)
class TrialStats:
    mean: float
    std: float
    count: int


def _same_shape(a, b, name):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractViolation(f"{name}: shape mismatch {a.shape} vs {b.shape}")
    return a, b


def psnr_from_mse(mse, peak=1.0):
    if mse <= 0:
        return PSNR_CAP
    return 10.0 * math.log10(peak * peak / mse)


def psnr(pred, target, peak=1.0):
    """Peak signal-to-noise ratio in dB; identical inputs give the 100 dB cap."""
    pred, target = _same_shape(pred, target, "psnr")
    return psnr_from_mse(float(np.mean((pred - target) ** 2)), peak)


def gaussian_taps(size, sigma):
    """Normalised 1-D Gaussian of ``size`` taps centred on the middle tap."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _ssim_channel(x, y, taps, c1, c2):
    filt = _kernels.filter_valid
    mu_x = filt(x, taps)
    mu_y = filt(y, taps)
    sxx = filt(x * x, taps) - mu_x * mu_x
    syy = filt(y * y, taps) - mu_y * mu_y
    sxy = filt(x * y, taps) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def ssim(pred, target, params=SsimParams()):
    """Mean Gaussian-windowed SSIM over valid window positions.

    Accepts H x W or H x W x C arrays; colour images average the per-channel
    scores. Images smaller than the window use a centred window of side
    min(window, H, W) with renormalised weights.
    """
    pred, target = _same_shape(pred, target, "ssim")
    if pred.ndim == 2:
        pred, target = pred[..., None], target[..., None]
    if pred.ndim != 3:
        raise ContractViolation(f"ssim expects H x W or H x W x C images, got {pred.shape}")
    h, w, c = pred.shape
    side = min(params.window, h, w)
    taps = gaussian_taps(side, params.sigma)
    c1 = (params.k1 * params.data_range) ** 2
    c2 = (params.k2 * params.data_range) ** 2
    scores = [
        _ssim_channel(np.ascontiguousarray(pred[..., k]), np.ascontiguousarray(target[..., k]), taps, c1, c2)
        for k in range(c)
    ]
    return float(np.mean(scores))


def aggregate_trials(values):
    """Mean and population standard deviation."""
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size == 0:
        raise ContractViolation("aggregate_trials needs at least one value")
    return TrialStats(float(vals.mean()), float(vals.std()), int(vals.size))
