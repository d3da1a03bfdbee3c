import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from csi_io import load_csib, quantize_cfr, save_csib
from csi_model import CsiSequence
from errors import EmptyDataset, FormatError, IndivisiblePacketCount, InvalidConfigValue

from .channel import SceneConfig, synthesize_csi
from .clip import KINDS, VideoClip
from .netpbm import read_frame, write_frame
from .pose import pose_trajectory
from .render import render

logger = logging.getLogger("Synthetic")

Pair = Tuple[VideoClip, CsiSequence]

CSI_FILE = "csi.csib"
CONFIG_FILE = "dataset.cfg"


def _frame_suffix(kind: str) -> str:
    return ".pgm" if kind == "silhouette" else ".ppm"


def packet_timestamps(n_pkt: int, rate_hz: int) -> np.ndarray:
    return (np.arange(n_pkt, dtype=np.uint64) * 1000) // np.uint64(rate_hz)


def generate_sample(index: int, T: int, P: int, cfg: SceneConfig,
                    kind: str, height: int, width: int) -> Pair:
    """One synchronised pair; its random streams depend only on (cfg.seed, index)."""
    trajectory_seed, noise_seed = np.random.SeedSequence([cfg.seed, index]).spawn(2)
    poses = pose_trajectory(trajectory_seed, T)
    clip = VideoClip(np.stack([render(pose, height, width, kind) for pose in poses]), kind)
    csi = synthesize_csi(poses, cfg, P // T, rng=np.random.default_rng(noise_seed),
                         timestamps=packet_timestamps(P, cfg.packet_rate_hz))
    return clip, quantize_cfr(csi, cfg.cfr_scale)


def _generate_star(args) -> Pair:
    return generate_sample(*args)


def generate_dataset(n_samples: int, T: int, P: int, cfg: SceneConfig,
                     kind: str = "silhouette", height: int = 48, width: int = 64,
                     workers: int = 1) -> List[Pair]:
    """Paired clips and CSI; packet i belongs to frame i * T // P.

    Samples are independent, so the pool and the serial path produce the same bytes.
    """
    if T < 1 or P < 1 or P % T != 0:
        raise IndivisiblePacketCount(f"packet count {P} must be a positive multiple of frame count {T}")
    if kind not in KINDS:
        raise InvalidConfigValue(f"unknown clip kind: {kind}")

    jobs = [(i, T, P, cfg, kind, height, width) for i in range(n_samples)]
    if workers > 1 and n_samples > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            pairs = list(executor.map(_generate_star, jobs))
    else:
        pairs = [_generate_star(job) for job in jobs]
    logger.info(f"Generated {n_samples} {kind} samples (T={T}, P={P}, {height}x{width})")
    return pairs


def sample_dir(root: Union[str, Path], index: int) -> Path:
    return Path(root) / f"sample_{index:04d}"


def write_clip(directory: Union[str, Path], clip: VideoClip) -> None:
    """Frames as clip_0000.pgm, clip_0001.pgm, ... (ppm for skeleton clips)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    suffix = _frame_suffix(clip.kind)
    for t, frame in enumerate(clip.frames):
        write_frame(directory / f"clip_{t:04d}{suffix}", frame)


def write_dataset(root: Union[str, Path], pairs: List[Pair], config_text: Optional[str] = None) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for index, (clip, csi) in enumerate(pairs):
        directory = sample_dir(root, index)
        write_clip(directory, clip)
        save_csib(directory / CSI_FILE, csi)
        logger.debug(f"Wrote sample {index} to {directory}")
    if config_text is not None:
        (root / CONFIG_FILE).write_text(config_text, encoding="utf-8")
    logger.info(f"Wrote {len(pairs)} samples to {root}")


def _sample_dirs(root: Path) -> List[Path]:
    dirs = sorted(p for p in root.glob("sample_*") if p.is_dir())
    if not dirs:
        raise EmptyDataset(f"no sample_* directories under {root}")
    return dirs


def read_clip(directory: Union[str, Path]) -> VideoClip:
    directory = Path(directory)
    pgm = sorted(directory.glob("clip_*.pgm"))
    ppm = sorted(directory.glob("clip_*.ppm"))
    if pgm and ppm:
        raise FormatError(f"{directory} mixes silhouette and skeleton frames")
    files, kind = (pgm, "silhouette") if pgm else (ppm, "skeleton")
    if not files:
        raise EmptyDataset(f"no clip frames in {directory}")
    return VideoClip(np.stack([read_frame(path) for path in files]), kind)


def load_dataset(root: Union[str, Path]) -> List[Pair]:
    return [(read_clip(d), load_csib(d / CSI_FILE)) for d in _sample_dirs(Path(root))]


def load_csi_only(root: Union[str, Path]) -> List[CsiSequence]:
    """CSI of every sample, without touching any frame file."""
    return [load_csib(d / CSI_FILE) for d in _sample_dirs(Path(root))]


def load_clips(root: Union[str, Path]) -> List[VideoClip]:
    """Clips of every sample_* directory under root, or the clip stored directly in root."""
    root = Path(root)
    if any(p.is_dir() for p in root.glob("sample_*")):
        return [read_clip(d) for d in _sample_dirs(root)]
    return [read_clip(root)]
