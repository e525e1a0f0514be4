"""Evaluation metrics: eigenvalue error statistics across trials, frame-wise
PSNR/SSIM averages, and eigenvalue-to-target matching.

PSNR uses the pixel-count numerator (peak 1, consistent with unit-range
fields); SSIM uses an 11x11 Gaussian window with std 1.5, K1 = 0.01,
K2 = 0.03, dynamic range 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from .exceptions import DimensionError
from .field import Field

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class TrialSet:
    """Matched eigenvalues per trial and target.

    ``matched[k, t]`` is trial k's eigenvalue for target t; ``gt[t]`` the
    ground truth.
    """

    matched: np.ndarray
    gt: np.ndarray

    def __post_init__(self):
        if self.matched.ndim != 2 or self.matched.shape[1] != self.gt.size:
            raise DimensionError("trial matrix does not match target count")
        if self.matched.shape[0] < 1:
            raise DimensionError("trial set is empty")


def eig_mse(trials: TrialSet, target: int) -> float:
    """Mean squared complex distance to the ground-truth eigenvalue."""
    errors = trials.matched[:, target] - trials.gt[target]
    return float(np.mean(np.abs(errors) ** 2))


def eig_std(trials: TrialSet, target: int) -> float:
    """Population standard deviation around the complex trial mean."""
    lams = trials.matched[:, target]
    return float(np.sqrt(np.mean(np.abs(lams - lams.mean()) ** 2)))


def _check_same_shape(truth: Field, estimate: Field) -> None:
    if truth.dims != estimate.dims:
        raise DimensionError(
            f"field shapes differ: {truth.dims} vs {estimate.dims}"
        )


def frame_psnr(truth: Field, estimate: Field) -> np.ndarray:
    """Per-frame ``10 log10(N / ||err||^2)``; a perfect frame gives +inf."""
    _check_same_shape(truth, estimate)
    err = truth.frames() - estimate.frames()
    sq = np.sum(err * err, axis=(1, 2))
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(truth.n / sq)


def mpsnr(truth: Field, estimate: Field) -> float:
    """Mean of the per-frame PSNR values, in dB; +inf propagates uncapped."""
    return float(np.mean(frame_psnr(truth, estimate)))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()


def _ssim_frame(x: np.ndarray, y: np.ndarray, win: np.ndarray) -> float:
    pad = win.shape[0] // 2

    def local_mean(img):
        full = correlate(img, win, mode="constant")
        return full[pad:-pad, pad:-pad]

    mu_x = local_mean(x)
    mu_y = local_mean(y)
    sxx = local_mean(x * x) - mu_x * mu_x
    syy = local_mean(y * y) - mu_y * mu_y
    sxy = local_mean(x * y) - mu_x * mu_y
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def frame_ssim(truth: Field, estimate: Field) -> np.ndarray:
    """Per-frame SSIM over the valid (fully windowed) region."""
    _check_same_shape(truth, estimate)
    if truth.n1 < SSIM_WINDOW or truth.n2 < SSIM_WINDOW:
        raise DimensionError(
            f"frames of {truth.n1}x{truth.n2} are smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    tf, ef = truth.frames(), estimate.frames()
    return np.array(
        [_ssim_frame(tf[t], ef[t], win) for t in range(truth.m)]
    )


def mssim(truth: Field, estimate: Field) -> float:
    """Mean of the per-frame SSIM values."""
    return float(np.mean(frame_ssim(truth, estimate)))


def match_eigenvalues(
    estimated: np.ndarray,
    targets: np.ndarray,
    target_order: np.ndarray | None = None,
) -> np.ndarray:
    """Greedy one-to-one matching of estimated eigenvalues to targets.

    Targets are processed in the given order (descending importance);
    each takes its nearest remaining estimate in the complex plane.
    """
    estimated = np.asarray(estimated, dtype=np.complex128).ravel()
    targets = np.asarray(targets, dtype=np.complex128).ravel()
    if estimated.size < targets.size:
        raise DimensionError(
            f"{estimated.size} estimates cannot cover {targets.size} targets"
        )
    order = (
        np.arange(targets.size) if target_order is None
        else np.asarray(target_order, dtype=np.intp).ravel()
    )
    remaining = list(range(estimated.size))
    matched = np.zeros(targets.size, dtype=np.complex128)
    for t in order:
        dists = [abs(estimated[j] - targets[t]) for j in remaining]
        j = remaining.pop(int(np.argmin(dists)))
        matched[t] = estimated[j]
    return matched
