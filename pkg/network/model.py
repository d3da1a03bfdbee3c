import logging
from typing import Dict, List, Sequence, Union

import numpy as np

from errors import ShapeMismatch
from sanitizer import AmplitudeMatrix
from synthetic import VideoClip
from tensor_engine import Module, Tensor, split_meta

from .plan import LayerPlan
from .student import StudentModel
from .teacher import Discriminator, VideoDecoder, VideoEncoder

logger = logging.getLogger("Network")

ClipInput = Union[VideoClip, Sequence[VideoClip], Tensor]
SignalInput = Union[AmplitudeMatrix, Sequence[AmplitudeMatrix], Tensor]


def clips_to_tensor(clips: Union[VideoClip, Sequence[VideoClip]]) -> Tensor:
    """(T, C, H, W) clips -> one (N, C, T, H, W) batch."""
    if isinstance(clips, VideoClip):
        clips = [clips]
    return Tensor(np.stack([np.moveaxis(c.frames, 0, 1) for c in clips]))


def tensor_to_clips(batch: Tensor, kind: str) -> List[VideoClip]:
    return [VideoClip(np.clip(np.moveaxis(volume, 0, 1), -1.0, 1.0), kind) for volume in batch.data]


def matrices_to_tensor(matrices: Union[AmplitudeMatrix, Sequence[AmplitudeMatrix]]) -> Tensor:
    if isinstance(matrices, AmplitudeMatrix):
        matrices = [matrices]
    return Tensor(np.stack([m.values for m in matrices]))


class CrossModalNet(Module):
    """Teacher (video encoder, decoder, discriminator) and the radio student sharing its decoder."""

    def __init__(self, plan: LayerPlan):
        super().__init__()
        self._plan = plan
        self.encoder = VideoEncoder(plan)
        self.decoder = VideoDecoder(plan)
        self.discriminator = Discriminator(plan)
        self.student = StudentModel(plan, self.decoder)
        logger.debug(f"Built network for clip {plan.clip_shape}, latent {plan.latent}, hidden {plan.hidden}")

    @property
    def plan(self) -> LayerPlan:
        return self._plan

    def _video(self, clip: ClipInput) -> Tensor:
        x = clip if isinstance(clip, Tensor) else clips_to_tensor(clip)
        if x.ndim != 5 or x.shape[1:] != self._plan.clip_shape:
            raise ShapeMismatch(f"expected clips shaped (N, {self._plan.clip_shape}), got {x.shape}")
        return x

    def _signal(self, a: SignalInput) -> Tensor:
        x = a if isinstance(a, Tensor) else matrices_to_tensor(a)
        expected = (self._plan.n_pkt, self._plan.n_sub)
        if x.ndim != 3 or x.shape[1:] != expected:
            raise ShapeMismatch(f"expected amplitude matrices shaped {expected}, got {x.shape[1:]}")
        return x

    def encode_video(self, clip: ClipInput) -> Tensor:
        return self.encoder(self._video(clip))

    def decode_video(self, latent: Tensor) -> Tensor:
        if latent.ndim != 5 or latent.shape[1:] != self._plan.latent:
            raise ShapeMismatch(f"expected latent blocks shaped {self._plan.latent}, got {latent.shape[1:]}")
        return self.decoder(latent)

    def discriminate(self, clip: ClipInput) -> Tensor:
        """Probability per clip that it is real, shape (N,)."""
        return self.discriminator(self._video(clip))

    def encode_signal(self, a: SignalInput) -> Tensor:
        return self.student.encoder(self._signal(a))

    def lift_to_visual(self, h: Tensor) -> Tensor:
        if h.ndim != 2 or h.shape[1] != self._plan.hidden:
            raise ShapeMismatch(f"expected hidden states of width {self._plan.hidden}, got {h.shape}")
        return self.student.lift_to_visual(h)

    def synthesize(self, a: SignalInput) -> List[VideoClip]:
        """Student-only path from amplitudes to clips."""
        frames = self.decode_video(self.lift_to_visual(self.encode_signal(a)))
        return tensor_to_clips(frames, self._plan.kind)

    def blocks(self) -> Dict[str, np.ndarray]:
        """Checkpoint blocks: plan metadata, parameters and batch-norm statistics."""
        state = {f"meta/{k}": np.array(v) for k, v in self._plan.to_meta().items()}
        state.update(self.state_dict())
        return state

    @classmethod
    def from_blocks(cls, blocks: Dict[str, np.ndarray]) -> "CrossModalNet":
        meta, tensors = split_meta(blocks)
        net = cls(LayerPlan.from_meta(meta))
        net.load_state_dict({k: v for k, v in tensors.items() if not k.startswith("optim/")})
        return net
