import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from csi_model import CsiSequence
from errors import InvalidConfigValue

from .pose import Pose

logger = logging.getLogger("Synthetic")

NS = 1e-9
PAIR_OFFSET = 0.5 * NS


@dataclass(frozen=True)
class SceneConfig:
    """Toy MIMO-OFDM scene: fixed static paths plus one pose-driven body reflection."""
    n_rx: int = 3
    n_tx: int = 3
    n_sub: int = 30
    carrier_spacing: float = 1.25e6
    static_paths: Tuple[Tuple[float, float], ...] = ((0.0, 1.0), (1.5e-8, 0.5))
    body_path_gain: float = 0.6
    noise_std: float = 0.02
    seed: int = 0
    cfr_scale: float = 40.0
    packet_rate_hz: int = 1000

    def __post_init__(self):
        if min(self.n_rx, self.n_tx, self.n_sub) < 1:
            raise InvalidConfigValue("scene antenna and subcarrier counts must be >= 1")
        if not self.static_paths:
            raise InvalidConfigValue("scene needs at least one static path")
        if self.noise_std < 0:
            raise InvalidConfigValue(f"noise_std must be >= 0, got {self.noise_std}")
        if self.carrier_spacing <= 0 or self.cfr_scale <= 0 or self.packet_rate_hz <= 0:
            raise InvalidConfigValue("carrier_spacing, cfr_scale and packet_rate_hz must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfigValue(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "static_paths", tuple((float(d), float(g)) for d, g in self.static_paths))

    def subcarrier_frequencies(self) -> np.ndarray:
        return np.arange(self.n_sub) * self.carrier_spacing


def body_path(pose: Pose, cfg: SceneConfig) -> Tuple[np.ndarray, float]:
    """Body reflection delay per antenna pair (n_rx, n_tx) and its gain."""
    cx, cy = pose.centroid()
    spread = pose.limb_spread()
    base = 20 * NS + 40 * NS * cx + 20 * NS * cy + 30 * NS * spread

    theta = np.arange(cfg.n_rx)[:, None] - (cfg.n_rx - 1) / 2
    gamma = np.arange(cfg.n_tx)[None, :] - (cfg.n_tx - 1) / 2
    delay = base + 2 * NS * theta * (cx - 0.5) + 2 * NS * gamma * (cy - 0.5)
    gain = cfg.body_path_gain * (0.75 + 0.25 * np.tanh(spread - 0.2))
    return delay, gain


def channel_response(pose: Pose, cfg: SceneConfig) -> np.ndarray:
    """Noise-free CFR for one pose, shaped (n_rx, n_tx, n_sub)."""
    f = cfg.subcarrier_frequencies()
    offset = (np.arange(cfg.n_rx)[:, None] * cfg.n_tx + np.arange(cfg.n_tx)[None, :]) * PAIR_OFFSET

    H = np.zeros((cfg.n_rx, cfg.n_tx, cfg.n_sub), dtype=np.complex128)
    for delay, gain in cfg.static_paths:
        H += gain * np.exp(-2j * np.pi * f * (delay + offset[..., None]))
    if cfg.body_path_gain != 0:
        body_delay, body_gain = body_path(pose, cfg)
        H += body_gain * np.exp(-2j * np.pi * f * (body_delay + offset)[..., None])
    return H


def synthesize_csi(poses: Sequence[Pose], cfg: SceneConfig, packets_per_frame: int,
                   rng: Optional[np.random.Generator] = None,
                   timestamps: Optional[Sequence[int]] = None) -> CsiSequence:
    """Packet-rate CFR for a pose sequence.

    Packet i of a frame sits i / packets_per_frame of the way to the next pose;
    the last frame holds its pose.
    """
    if packets_per_frame < 1:
        raise InvalidConfigValue(f"packets_per_frame must be >= 1, got {packets_per_frame}")
    n_frames = len(poses)
    packets = []
    for t, pose in enumerate(poses):
        following = poses[t + 1] if t + 1 < n_frames else pose
        for i in range(packets_per_frame):
            u = i / packets_per_frame
            current = pose if u == 0 or following == pose else pose.interpolate(following, u)
            packets.append(channel_response(current, cfg))
    values = np.stack(packets)

    if cfg.noise_std > 0:
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        values = values + (rng.normal(0.0, cfg.noise_std, values.shape)
                           + 1j * rng.normal(0.0, cfg.noise_std, values.shape))
    return CsiSequence(values, timestamps)
