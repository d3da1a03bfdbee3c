import numpy as np

from errors import DataError

KINDS = {"silhouette": 1, "skeleton": 3}


class VideoClip:
    """T frames shaped (T, C, H, W) with values in [-1, 1]; C is 1 for silhouettes, 3 for skeletons."""

    def __init__(self, frames: np.ndarray, kind: str):
        if kind not in KINDS:
            raise DataError(f"clip kind must be one of {sorted(KINDS)}, got {kind!r}")
        frames = np.array(frames, dtype=np.float64)
        if frames.ndim != 4 or frames.shape[0] < 1 or frames.shape[1] != KINDS[kind]:
            raise DataError(f"{kind} clip must be shaped (T, {KINDS[kind]}, H, W), got {frames.shape}")
        if not np.all(np.isfinite(frames)) or frames.min() < -1.0 or frames.max() > 1.0:
            raise DataError("clip values must lie in [-1, 1]")
        frames.setflags(write=False)
        self._frames = frames
        self.kind = kind

    @property
    def frames(self) -> np.ndarray:
        return self._frames

    @property
    def n_frames(self) -> int:
        return self._frames.shape[0]

    @property
    def channels(self) -> int:
        return self._frames.shape[1]

    @property
    def height(self) -> int:
        return self._frames.shape[2]

    @property
    def width(self) -> int:
        return self._frames.shape[3]

    def __eq__(self, other):
        if not isinstance(other, VideoClip):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self._frames, other._frames)

    def __repr__(self):
        return f"VideoClip(kind={self.kind!r}, shape={self._frames.shape})"
