"""Shared fixtures: a run configuration small enough to train in seconds."""
import pytest

from cli import RunConfig
from synthetic import generate_dataset, write_dataset

TINY = {
    "scene.n_rx": "2",
    "scene.n_tx": "2",
    "scene.n_sub": "4",
    "clip.frames": "8",
    "clip.height": "16",
    "clip.width": "16",
    "clip.packets": "16",
    "sanitize.window": "5",
    "model.hidden": "6",
    "model.channels": "2,4,4",
    "optim.epochs": "2",
    "optim.batch_size": "2",
}


def tiny_text(**overrides: str) -> str:
    values = {**TINY, **{k.replace("__", "."): v for k, v in overrides.items()}}
    return "".join(f"{k}={v}\n" for k, v in values.items())


@pytest.fixture
def tiny_config() -> RunConfig:
    return RunConfig(TINY)


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(tiny_text(), encoding="utf-8")
    return path


@pytest.fixture
def tiny_pairs(tiny_config):
    c = tiny_config
    return generate_dataset(4, c["clip.frames"], c["clip.packets"], c.scene_config(),
                            c.kind, c["clip.height"], c["clip.width"])


@pytest.fixture
def tiny_dataset(tmp_path, tiny_pairs, tiny_config):
    root = tmp_path / "data"
    write_dataset(root, tiny_pairs, tiny_config.dump())
    return root
