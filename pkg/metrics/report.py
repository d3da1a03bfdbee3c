import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Sequence, Union

import numpy as np

from errors import FrameCountMismatch
from synthetic import VideoClip

from .quality import fsim, mse_frames, pcs, ssim

logger = logging.getLogger("Metrics")

DEFAULT_THRESHOLDS = (1.0, 3.0, 5.0, 25.0, 30.0, 40.0, 50.0)


@dataclass
class MetricReport:
    mse: float
    ssim: float
    fsim: float
    pcs: Dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "ssim": self.ssim,
            "fsim": self.fsim,
            "pcs": {f"{xi:g}": value for xi, value in sorted(self.pcs.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")
        logger.info(f"Saved metric report to {path}")


def evaluate_clips(pred: Sequence[VideoClip], truth: Sequence[VideoClip],
                   thresholds: Sequence[float] = DEFAULT_THRESHOLDS, workers: int = 1) -> MetricReport:
    """Score predicted clips against ground truth, pooling every frame of every clip."""
    if len(pred) != len(truth):
        raise FrameCountMismatch(f"{len(pred)} predicted clips for {len(truth)} ground-truth clips")
    for p, t in zip(pred, truth):
        if p.n_frames != t.n_frames:
            raise FrameCountMismatch(f"predicted clip has {p.n_frames} frames, ground truth {t.n_frames}")

    pred_frames = np.concatenate([p.frames for p in pred])
    truth_frames = np.concatenate([t.frames for t in truth])
    pairs = list(zip(pred_frames, truth_frames))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            ssims = list(executor.map(lambda ab: ssim(*ab), pairs))
            fsims = list(executor.map(lambda ab: fsim(*ab), pairs))
    else:
        ssims = [ssim(a, b) for a, b in pairs]
        fsims = [fsim(a, b) for a, b in pairs]

    report = MetricReport(
        mse=mse_frames(pred_frames, truth_frames),
        ssim=float(np.mean(ssims)),
        fsim=float(np.mean(fsims)),
        pcs=pcs(pred_frames, truth_frames, thresholds),
    )
    logger.info(f"Evaluated {len(pairs)} frames: mse={report.mse:.4f} ssim={report.ssim:.4f} fsim={report.fsim:.4f}")
    return report

