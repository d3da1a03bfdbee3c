from .quality import (
    clip_fsim,
    clip_ssim,
    frame_distances,
    fsim,
    gradient_magnitude,
    grey,
    mse_frames,
    pcs,
    phase_congruency,
    ssim,
    SSIM_WINDOW,
)
from .report import DEFAULT_THRESHOLDS, MetricReport, evaluate_clips
