"""Evaluation metrics and training-loss terms.

PSNR is computed on the BT.601 full-range luminance channel, the
convention for super-resolution benchmarking.  The regression loss is the
plain L1 norm over the 33 degradation values (a sum, not a mean); the
pixel loss averages per element so it is resolution-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, InvalidVector
from .pipeline import LUMA_WEIGHTS


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 1.0   # degradation regression
    lambda2: float = 1.0   # perceptual (supplied externally)
    lambda3: float = 0.1   # adversarial (supplied externally)

    def validate(self) -> None:
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise DomainError("loss weights must be non-negative")


def luminance(img: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    img = np.asarray(img, dtype=float)
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def psnr_y(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Luminance-channel PSNR in dB; returns inf for identical inputs."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((luminance(a) - luminance(b)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def regression_loss(v_hat: np.ndarray, v: np.ndarray) -> float:
    """L1 distance between estimated and true degradation vectors."""
    v_hat, v = np.asarray(v_hat, dtype=float), np.asarray(v, dtype=float)
    if v_hat.shape != v.shape:
        raise InvalidVector(f"length mismatch {v_hat.shape} vs {v.shape}")
    if not (np.all(np.isfinite(v_hat)) and np.all(np.isfinite(v))):
        raise InvalidVector("non-finite entries")
    return float(np.sum(np.abs(v_hat - v)))


def pixel_loss(y_hat: np.ndarray, y: np.ndarray) -> float:
    """Mean absolute difference over all pixels and channels."""
    y_hat, y = np.asarray(y_hat, dtype=float), np.asarray(y, dtype=float)
    if y_hat.shape != y.shape:
        raise DimensionError(f"shape mismatch {y_hat.shape} vs {y.shape}")
    return float(np.mean(np.abs(y_hat - y)))


def total_loss(pixel: float, regression: float, perceptual: float, adversarial: float,
               w: LossWeights = LossWeights()) -> float:
    """pixel + l1*regression + l2*perceptual + l3*adversarial."""
    w.validate()
    return pixel + w.lambda1 * regression + w.lambda2 * perceptual + w.lambda3 * adversarial
