"""Run configuration: a key=value file read with python-dotenv.

Keys are lowercase and grouped by a dotted section prefix. Every key has a default;
``auto`` values for ``optim.epochs`` and ``model.hidden`` resolve from ``clip.kind``.
"""
import io
import logging
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from errors import InvalidConfigValue, ShapeMismatch, UnknownConfigKey
from metrics import SSIM_WINDOW
from network import LayerPlan
from sanitizer import HampelConfig
from synthetic import KINDS, SceneConfig
from training import LossWeights, OptimConfig, TrainSettings

logger = logging.getLogger("MainPipeline")

AUTO = "auto"
AUTO_EPOCHS = {"silhouette": 800, "skeleton": 1600}
AUTO_HIDDEN = {"silhouette": 300, "skeleton": 100}


def _int(text: str) -> int:
    return int(text)


def _float(text: str) -> float:
    return float(text)


def _kind(text: str) -> str:
    if text not in KINDS:
        raise ValueError(f"expected one of {sorted(KINDS)}")
    return text


def _int_or_auto(text: str):
    return AUTO if text == AUTO else int(text)


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _paths(text: str) -> Tuple[Tuple[float, float], ...]:
    pairs = []
    for item in text.split(","):
        delay, gain = item.split(":")
        pairs.append((float(delay), float(gain)))
    return tuple(pairs)


# key -> (default, parser), in the order dump() writes them
KEYS: Dict[str, Tuple[str, Callable]] = {
    "scene.n_rx": ("3", _int),
    "scene.n_tx": ("3", _int),
    "scene.n_sub": ("30", _int),
    "scene.carrier_spacing": ("1250000", _float),
    "scene.static_paths": ("0:1.0,1.5e-08:0.5", _paths),
    "scene.body_path_gain": ("0.6", _float),
    "scene.noise_std": ("0.02", _float),
    "scene.cfr_scale": ("40", _float),
    "scene.packet_rate_hz": ("1000", _int),
    "scene.seed": ("0", _int),
    "clip.kind": ("silhouette", _kind),
    "clip.frames": ("16", _int),
    "clip.height": ("48", _int),
    "clip.width": ("64", _int),
    "clip.packets": ("256", _int),
    "sanitize.window": ("51", _int),
    "sanitize.n_sigmas": ("3", _float),
    "model.hidden": (AUTO, _int_or_auto),
    "model.channels": ("16,32,64", _ints),
    "model.kernel": ("4", _int),
    "model.stride": ("2", _int),
    "model.padding": ("1", _int),
    "model.leaky_slope": ("0.2", _float),
    "model.bn_momentum": ("0.1", _float),
    "model.bn_eps": ("1e-05", _float),
    "model.amplitude_scale": ("40", _float),
    "optim.lr": ("0.0002", _float),
    "optim.beta1": ("0.5", _float),
    "optim.beta2": ("0.999", _float),
    "optim.eps": ("1e-08", _float),
    "optim.epochs": (AUTO, _int_or_auto),
    "optim.batch_size": ("4", _int),
    "optim.init_std": ("0.02", _float),
    "optim.train_fraction": ("0.75", _float),
    "optim.seed": ("0", _int),
    "loss.w_adv": ("0.5", _float),
    "loss.w_y": ("1", _float),
    "loss.w_v": ("0.5", _float),
    "loss.w_s": ("1", _float),
    "metrics.thresholds": ("1,3,5,25,30,40,50", _floats),
    "runtime.workers": ("1", _int),
}


class RunConfig:
    """Validated run settings; building it checks every module's invariants."""

    def __init__(self, values: Optional[Mapping[str, Optional[str]]] = None):
        given = {}
        for key, value in (values or {}).items():
            if key not in KEYS:
                raise UnknownConfigKey(f"unknown config key: {key}")
            if value is None:
                raise InvalidConfigValue(f"{key} has no value")
            given[key] = value.strip()
        raw = {key: given.get(key, default) for key, (default, _) in KEYS.items()}

        self._given = given
        self._raw = raw
        self._values = {}
        for key, text in raw.items():
            try:
                self._values[key] = KEYS[key][1](text)
            except ValueError as e:
                raise InvalidConfigValue(f"{key}={text!r}: {e}") from e
        self._resolve_auto()

        if self["runtime.workers"] < 1:
            raise InvalidConfigValue("runtime.workers must be >= 1")
        if min(self["clip.frames"], self["clip.height"], self["clip.width"], self["clip.packets"]) < 1:
            raise InvalidConfigValue("clip geometry and packet count must be positive")
        if self["clip.packets"] % self["clip.frames"]:
            raise InvalidConfigValue(f"clip.packets={self['clip.packets']} is not a multiple of clip.frames={self['clip.frames']}")
        if min(self["clip.height"], self["clip.width"]) < SSIM_WINDOW:
            raise InvalidConfigValue(f"clip height and width must be at least {SSIM_WINDOW} for SSIM")
        if not self.thresholds or min(self.thresholds) < 0:
            raise InvalidConfigValue("metrics.thresholds must be a non-empty list of nonnegative values")
        # constructing each settings object runs its own validation
        self.scene_config()
        self.hampel_config()
        self.layer_plan()
        self.optim_config()
        self.loss_weights()

    def _resolve_auto(self) -> None:
        kind = self._values["clip.kind"]
        for key, table in (("optim.epochs", AUTO_EPOCHS), ("model.hidden", AUTO_HIDDEN)):
            if self._values[key] == AUTO:
                self._values[key] = table[kind]
                self._raw[key] = str(table[kind])

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(dotenv_values(stream=io.StringIO(text), interpolate=False))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        config = cls(dotenv_values(path, interpolate=False))
        logger.debug(f"Loaded run config from {path}")
        return config

    def with_overrides(self, overrides: Mapping[str, Optional[str]]) -> "RunConfig":
        """Copy with some keys replaced; `auto` keys re-resolve against the new values."""
        merged = dict(self._given)
        merged.update((key, value) for key, value in overrides.items() if value is not None)
        return RunConfig(merged)

    def __getitem__(self, key: str):
        try:
            return self._values[key]
        except KeyError:
            raise UnknownConfigKey(f"unknown config key: {key}") from None

    @property
    def kind(self) -> str:
        return self["clip.kind"]

    @property
    def thresholds(self) -> Tuple[float, ...]:
        return self["metrics.thresholds"]

    @property
    def workers(self) -> int:
        return self["runtime.workers"]

    def dump(self) -> str:
        return "".join(f"{key}={self._raw[key]}\n" for key in KEYS)

    def scene_config(self) -> SceneConfig:
        return SceneConfig(
            n_rx=self["scene.n_rx"], n_tx=self["scene.n_tx"], n_sub=self["scene.n_sub"],
            carrier_spacing=self["scene.carrier_spacing"], static_paths=self["scene.static_paths"],
            body_path_gain=self["scene.body_path_gain"], noise_std=self["scene.noise_std"],
            seed=self["scene.seed"], cfr_scale=self["scene.cfr_scale"],
            packet_rate_hz=self["scene.packet_rate_hz"],
        )

    def hampel_config(self) -> HampelConfig:
        return HampelConfig(window=self["sanitize.window"], n_sigmas=self["sanitize.n_sigmas"])

    def layer_plan(self) -> LayerPlan:
        try:
            return LayerPlan(
                in_channels=KINDS[self.kind], frames=self["clip.frames"],
                height=self["clip.height"], width=self["clip.width"],
                channels=self["model.channels"], kernel=self["model.kernel"],
                stride=self["model.stride"], padding=self["model.padding"],
                leaky_slope=self["model.leaky_slope"], bn_momentum=self["model.bn_momentum"],
                bn_eps=self["model.bn_eps"], hidden=self["model.hidden"],
                n_sub=self["scene.n_sub"], n_pkt=self["clip.packets"],
                amplitude_scale=self["model.amplitude_scale"],
            )
        except ShapeMismatch as e:
            raise InvalidConfigValue(f"model geometry does not fit the clip: {e}") from e

    def optim_config(self) -> OptimConfig:
        return OptimConfig(
            lr=self["optim.lr"], beta1=self["optim.beta1"], beta2=self["optim.beta2"],
            eps=self["optim.eps"], epochs=self["optim.epochs"], batch_size=self["optim.batch_size"],
            init_std=self["optim.init_std"], train_fraction=self["optim.train_fraction"],
            seed=self["optim.seed"],
        )

    def loss_weights(self) -> LossWeights:
        return LossWeights(w_adv=self["loss.w_adv"], w_y=self["loss.w_y"],
                           w_v=self["loss.w_v"], w_s=self["loss.w_s"])

    def train_settings(self) -> TrainSettings:
        return TrainSettings(plan=self.layer_plan(), optim=self.optim_config(),
                             weights=self.loss_weights(), hampel=self.hampel_config(),
                             thresholds=self.thresholds, workers=self.workers)
