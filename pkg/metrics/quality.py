"""Frame and clip quality measures on [-1, 1] data.

MSE and SSIM compare intensities rescaled to [0, 1]; FSIM and PCS work on an
8-bit scale. Colour frames are reduced to grey by averaging channels.
"""
import logging
from typing import Dict, Sequence, Union

import numpy as np
from phasepack import phasecong
from skimage.filters import scharr_h, scharr_v
from skimage.metrics import structural_similarity

from errors import ShapeMismatch
from synthetic import VideoClip

logger = logging.getLogger("Metrics")

ClipLike = Union[VideoClip, np.ndarray]

SSIM_SIGMA = 1.5
# side of the Gaussian SSIM window; frames must be at least this large
SSIM_WINDOW = 11
# FSIM stabilising constants for 8-bit grey images
T_PC = 0.85
T_G = 160.0


def _frames(clip: ClipLike) -> np.ndarray:
    frames = clip.frames if isinstance(clip, VideoClip) else np.asarray(clip, dtype=np.float64)
    if frames.ndim != 4:
        raise ShapeMismatch(f"expected (T, C, H, W) frames, got {frames.shape}")
    return frames


def _pair(x: ClipLike, g: ClipLike):
    a, b = _frames(x), _frames(g)
    if a.shape != b.shape:
        raise ShapeMismatch(f"clip shapes differ: {a.shape} vs {b.shape}")
    return a, b


def unit_range(x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) + 1.0) / 2.0


def grey(frame: np.ndarray) -> np.ndarray:
    """(C, H, W) or (H, W) frame in [-1, 1] -> (H, W) grey in [0, 1]."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3:
        frame = frame.mean(axis=0)
    if frame.ndim != 2:
        raise ShapeMismatch(f"expected a (C, H, W) or (H, W) frame, got {frame.shape}")
    return unit_range(frame)


def mse_frames(x: ClipLike, g: ClipLike) -> float:
    a, b = _pair(x, g)
    return float(np.mean((unit_range(a) - unit_range(b)) ** 2))


def ssim(x: np.ndarray, g: np.ndarray) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5) and unit dynamic range."""
    a, b = grey(x), grey(g)
    if a.shape != b.shape:
        raise ShapeMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ShapeMismatch(f"SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}")
    return float(structural_similarity(a, b, data_range=1.0, gaussian_weights=True,
                                       sigma=SSIM_SIGMA, use_sample_covariance=False))


def _similarity(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    return (2.0 * a * b + t) / (a * a + b * b + t)


def phase_congruency(image: np.ndarray) -> np.ndarray:
    """Log-Gabor phase congruency summed over orientations (4 scales, 4 orientations)."""
    pc = phasecong(image, nscale=4, norient=4, minWaveLength=6, mult=2, sigmaOnf=0.5978)[4]
    return np.sum(np.asarray(pc), axis=0)


def gradient_magnitude(image: np.ndarray) -> np.ndarray:
    return np.sqrt(scharr_h(image) ** 2 + scharr_v(image) ** 2)


def fsim(x: np.ndarray, g: np.ndarray) -> float:
    """Feature similarity: phase congruency and gradient similarity, pooled by the larger PC."""
    a, b = grey(x) * 255.0, grey(g) * 255.0
    if a.shape != b.shape:
        raise ShapeMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    pc_a, pc_b = phase_congruency(a), phase_congruency(b)
    s_l = _similarity(pc_a, pc_b, T_PC) * _similarity(gradient_magnitude(a), gradient_magnitude(b), T_G)
    pc_max = np.maximum(pc_a, pc_b)
    mass = pc_max.sum()
    if mass <= 0:
        return float(np.clip(s_l.mean(), 0.0, 1.0))
    return float(np.clip((s_l * pc_max).sum() / mass, 0.0, 1.0))


def clip_ssim(x: ClipLike, g: ClipLike) -> float:
    a, b = _pair(x, g)
    return float(np.mean([ssim(fa, fb) for fa, fb in zip(a, b)]))


def clip_fsim(x: ClipLike, g: ClipLike) -> float:
    a, b = _pair(x, g)
    return float(np.mean([fsim(fa, fb) for fa, fb in zip(a, b)]))


def frame_distances(s: ClipLike, g: ClipLike) -> np.ndarray:
    """Euclidean distance between flattened frames on the 0..255 scale."""
    a, b = _pair(s, g)
    diff = (unit_range(a) - unit_range(b)) * 255.0
    return np.linalg.norm(diff.reshape(diff.shape[0], -1), axis=1)


def pcs(s: ClipLike, g: ClipLike, thresholds: Sequence[float]) -> Dict[float, float]:
    """Percentage of frames whose distance to the ground truth is within each threshold."""
    d = frame_distances(s, g)
    return {float(xi): 100.0 * float(np.count_nonzero(d <= xi)) / d.shape[0] for xi in thresholds}
