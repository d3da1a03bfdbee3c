from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

from errors import InvalidConfigValue, ShapeMismatch

HIDDEN_SIZES = (100, 200, 300, 400)


@dataclass(frozen=True)
class LayerPlan:
    """Geometry shared by the teacher and the student.

    Each encoder layer pads by `padding`, then applies an unpadded strided conv;
    each decoder layer mirrors it with a transposed conv cropped by `padding`.
    """
    in_channels: int = 1
    frames: int = 16
    height: int = 48
    width: int = 64
    channels: Tuple[int, ...] = (16, 32, 64)
    kernel: int = 4
    stride: int = 2
    padding: int = 1
    leaky_slope: float = 0.2
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    hidden: int = 300
    n_sub: int = 30
    n_pkt: int = 256
    amplitude_scale: float = 40.0
    latent: Tuple[int, int, int, int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if self.in_channels not in (1, 3):
            raise InvalidConfigValue(f"in_channels must be 1 or 3, got {self.in_channels}")
        if not self.channels or min(self.channels) < 1:
            raise InvalidConfigValue(f"channel plan must be non-empty and positive, got {self.channels}")
        if self.kernel < 1 or self.stride < 1 or self.padding < 0:
            raise InvalidConfigValue("kernel and stride must be >= 1 and padding >= 0")
        if min(self.hidden, self.n_sub, self.n_pkt) < 1 or self.amplitude_scale <= 0:
            raise InvalidConfigValue("hidden, n_sub, n_pkt and amplitude_scale must be positive")

        dims = (self.frames, self.height, self.width)
        for _ in self.channels:
            dims = tuple(self._down(n) for n in dims)
        if min(dims) < 1:
            raise ShapeMismatch(f"clip {self.clip_shape} collapses to {dims} in the encoder")
        back = dims
        for _ in self.channels:
            back = tuple(self._up(n) for n in back)
        if back != (self.frames, self.height, self.width):
            raise ShapeMismatch(
                f"decoder would rebuild {back} from latent {dims}, not the clip size "
                f"{(self.frames, self.height, self.width)}")
        object.__setattr__(self, "latent", (self.channels[-1],) + dims)

    def _down(self, n: int) -> int:
        return (n + 2 * self.padding - self.kernel) // self.stride + 1

    def _up(self, n: int) -> int:
        return (n - 1) * self.stride + self.kernel - 2 * self.padding

    @property
    def clip_shape(self) -> Tuple[int, int, int, int]:
        """(C, T, H, W) of one clip as the network sees it."""
        return (self.in_channels, self.frames, self.height, self.width)

    @property
    def kind(self) -> str:
        return "silhouette" if self.in_channels == 1 else "skeleton"

    def to_meta(self) -> Dict[str, float]:
        meta = {k: float(v) for k, v in asdict(self).items() if k not in ("channels", "latent")}
        meta["n_layers"] = float(len(self.channels))
        meta.update({f"channel_{i}": float(c) for i, c in enumerate(self.channels)})
        return meta

    @classmethod
    def from_meta(cls, meta: Dict[str, float]) -> "LayerPlan":
        try:
            channels = tuple(int(meta[f"channel_{i}"]) for i in range(int(meta["n_layers"])))
            ints = ("in_channels", "frames", "height", "width", "kernel", "stride", "padding",
                    "hidden", "n_sub", "n_pkt")
            floats = ("leaky_slope", "bn_momentum", "bn_eps", "amplitude_scale")
            kwargs = {k: int(meta[k]) for k in ints}
            kwargs.update({k: float(meta[k]) for k in floats})
        except KeyError as e:
            raise ShapeMismatch(f"checkpoint metadata lacks {e}") from e
        return cls(channels=channels, **kwargs)
