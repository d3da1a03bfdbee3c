import json
import logging

import numpy as np
import pandas as pd
import pytest

from cli import KEYS, RunConfig
from conftest import TINY, tiny_text
from csi_io import save_csib
from csi_model import CsiSequence
from errors import InvalidConfigValue, UnknownConfigKey
from main import HANDLER_NAME, main
from synthetic import CSI_FILE, VideoClip, load_clips, read_clip, sample_dir, write_clip
from training import CHECKPOINT_FILE, LOSS_LOG_FILE, REPORT_FILE


@pytest.fixture(autouse=True)
def drop_cli_handler():
    yield
    root = logging.getLogger()
    for handler in [h for h in root.handlers if h.get_name() == HANDLER_NAME]:
        root.removeHandler(handler)


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def trained(tmp_path, tiny_dataset, tiny_config_file):
    out = tmp_path / "run"
    assert main(["train", "--data", str(tiny_dataset), "--out", str(out), "--config", str(tiny_config_file)]) == 0
    return out


class TestRunConfig:
    def test_defaults_resolve_auto_values(self):
        config = RunConfig()
        assert config["optim.epochs"] == 800
        assert config["model.hidden"] == 300
        skeleton = RunConfig({"clip.kind": "skeleton"})
        assert skeleton["optim.epochs"] == 1600
        assert skeleton["model.hidden"] == 100
        assert "model.hidden=100\n" in skeleton.dump()

    def test_explicit_values_win_over_auto(self, tiny_config):
        assert tiny_config["model.hidden"] == 6
        assert tiny_config["optim.epochs"] == 2
        assert tiny_config.layer_plan().latent == (4, 1, 2, 2)

    def test_dump_round_trip(self, tiny_config):
        text = tiny_config.dump()
        assert [line.split("=")[0] for line in text.splitlines()] == list(KEYS)
        assert RunConfig.from_text(text).dump() == text

    def test_file_and_overrides(self, tiny_config_file):
        config = RunConfig.from_file(tiny_config_file)
        assert config["clip.frames"] == 8
        changed = config.with_overrides({"model.hidden": "9", "scene.seed": None})
        assert changed["model.hidden"] == 9
        assert changed["scene.seed"] == config["scene.seed"]
        with pytest.raises(FileNotFoundError):
            RunConfig.from_file(tiny_config_file.parent / "missing.cfg")

    def test_unknown_key(self):
        with pytest.raises(UnknownConfigKey):
            RunConfig.from_text("optim.learning_rate=0.1\n")
        with pytest.raises(UnknownConfigKey):
            RunConfig()["nope"]

    @pytest.mark.parametrize("key, value", [
        ("optim.lr", "fast"),
        ("optim.lr", "0"),
        ("clip.kind", "mesh"),
        ("sanitize.window", "4"),
        ("runtime.workers", "0"),
        ("metrics.thresholds", "1,-3"),
        ("scene.static_paths", "0:1.0,bad"),
        ("loss.w_adv", "2"),
        ("clip.packets", "20"),
        ("clip.height", "8"),
        ("clip.width", "10"),
    ])
    def test_invalid_values(self, key, value):
        with pytest.raises(InvalidConfigValue):
            RunConfig({key: value})

    def test_geometry_must_fit_the_model(self):
        with pytest.raises(InvalidConfigValue):
            RunConfig({**TINY, "clip.frames": "12", "clip.packets": "24"})


class TestGenerate:
    def test_same_seed_same_bytes(self, tmp_path, tiny_config_file, capsys):
        for name in ("a", "b"):
            code = main(["generate", "--out", str(tmp_path / name), "--samples", "2",
                         "--config", str(tiny_config_file), "--seed", "5"])
            assert code == 0
        assert "2 samples written" in capsys.readouterr().out
        a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
        assert a == b
        assert "sample_0001/clip_0007.pgm" in a
        assert "sample_0000/csi.csib" in a
        assert b"scene.seed=5\n" in a["dataset.cfg"]

    def test_seed_changes_the_data(self, tmp_path, tiny_config_file):
        for seed in ("1", "2"):
            main(["generate", "--out", str(tmp_path / seed), "--samples", "1",
                  "--config", str(tiny_config_file), "--seed", seed])
        assert ((tmp_path / "1" / "sample_0000" / CSI_FILE).read_bytes()
                != (tmp_path / "2" / "sample_0000" / CSI_FILE).read_bytes())

    def test_skeleton_kind(self, tmp_path, tiny_config_file):
        out = tmp_path / "skel"
        assert main(["generate", "--out", str(out), "--samples", "1", "--kind", "skeleton",
                     "--config", str(tiny_config_file)]) == 0
        assert read_clip(sample_dir(out, 0)).kind == "skeleton"

    def test_unwritable_output(self, tmp_path, tiny_config_file):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code = main(["generate", "--out", str(blocker / "data"), "--samples", "1",
                     "--config", str(tiny_config_file)])
        assert code == 3

    def test_usage_errors(self, tmp_path):
        assert main(["generate", "--out", str(tmp_path)]) == 1
        assert main(["generate", "--out", str(tmp_path), "--samples", "1", "--kind", "mesh"]) == 1
        assert main([]) == 1

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(tiny_text(optim__lr="fast"))
        assert main(["generate", "--out", str(tmp_path / "d"), "--samples", "1", "--config", str(cfg)]) == 2
        assert main(["generate", "--out", str(tmp_path / "d"), "--samples", "1",
                     "--config", str(tmp_path / "absent.cfg")]) == 3

    def test_indivisible_packet_count_is_a_config_error(self, tmp_path):
        cfg = tmp_path / "odd.cfg"
        cfg.write_text(tiny_text(clip__packets="20"))
        assert main(["generate", "--out", str(tmp_path / "d"), "--samples", "1", "--config", str(cfg)]) == 2
        assert not (tmp_path / "d").exists()


class TestSanitize:
    def test_writes_amplitude_csv(self, tmp_path, tiny_dataset):
        out = tmp_path / "amp.csv"
        code = main(["sanitize", "--in", str(sample_dir(tiny_dataset, 0) / CSI_FILE),
                     "--out", str(out), "--window", "5"])
        assert code == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["k0", "k1", "k2", "k3"]
        assert len(frame) == 16
        assert (frame.to_numpy() >= 0).all()

    def sanitized(self, tmp_path, values):
        path = tmp_path / "in.csib"
        save_csib(path, CsiSequence(values))
        out = tmp_path / "amp.csv"
        assert main(["sanitize", "--in", str(path), "--out", str(out), "--window", "5"]) == 0
        return pd.read_csv(out).to_numpy()

    def test_constant_amplitude_is_unchanged(self, tmp_path):
        values = np.full((20, 2, 2, 3), 3 + 4j)
        assert np.array_equal(self.sanitized(tmp_path, values), np.full((20, 3), 5.0))

    def test_spike_is_removed(self, tmp_path):
        values = np.full((20, 2, 2, 3), 3 + 4j)
        # every antenna pair spikes, so condensing alone would keep it
        values[7, :, :, 1] = 90
        values[19, :, :, 2] = 100
        amplitudes = self.sanitized(tmp_path, values)
        assert amplitudes.max() == 5.0
        assert np.array_equal(amplitudes, np.full((20, 3), 5.0))

    def test_bad_input(self, tmp_path):
        junk = tmp_path / "junk.csib"
        junk.write_bytes(b"NOPE" + bytes(20))
        assert main(["sanitize", "--in", str(junk), "--out", str(tmp_path / "a.csv")]) == 2
        assert main(["sanitize", "--in", str(tmp_path / "none.csib"), "--out", str(tmp_path / "a.csv")]) == 3

    def test_even_window_is_rejected(self, tmp_path, tiny_dataset):
        code = main(["sanitize", "--in", str(sample_dir(tiny_dataset, 0) / CSI_FILE),
                     "--out", str(tmp_path / "a.csv"), "--window", "4"])
        assert code == 2


class TestTrain:
    def test_smoke(self, capsys, trained):
        for name in (CHECKPOINT_FILE, LOSS_LOG_FILE, REPORT_FILE, "run.cfg"):
            assert (trained / name).is_file()
        assert len(pd.read_csv(trained / LOSS_LOG_FILE)) == 2
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"mse", "ssim", "fsim", "pcs"}

    def test_rerun_resumes(self, trained, tiny_dataset, tiny_config_file):
        before = (trained / CHECKPOINT_FILE).read_bytes()
        assert main(["train", "--data", str(tiny_dataset), "--out", str(trained),
                     "--config", str(tiny_config_file)]) == 0
        assert (trained / CHECKPOINT_FILE).read_bytes() == before

    def test_missing_data(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "nothing"), "--out", str(tmp_path / "o")]) == 3

    def test_empty_data(self, tmp_path, tiny_config_file):
        (tmp_path / "empty").mkdir()
        assert main(["train", "--data", str(tmp_path / "empty"), "--out", str(tmp_path / "o"),
                     "--config", str(tiny_config_file)]) == 4


class TestSynthesize:
    def test_from_csi_alone(self, tmp_path, trained, tiny_dataset):
        for frame in tiny_dataset.rglob("clip_*.pgm"):
            frame.unlink()
        out = tmp_path / "synth"
        code = main(["synthesize", "--model", str(trained / CHECKPOINT_FILE),
                     "--csi", str(tiny_dataset), "--out", str(out)])
        assert code == 0
        clips = load_clips(out)
        assert len(clips) == 4
        assert all(c.n_frames == 8 and c.frames.shape[1:] == (1, 16, 16) for c in clips)

    def test_single_file(self, tmp_path, trained, tiny_dataset):
        out = tmp_path / "one"
        code = main(["synthesize", "--model", str(trained / CHECKPOINT_FILE),
                     "--csi", str(sample_dir(tiny_dataset, 2) / CSI_FILE), "--out", str(out)])
        assert code == 0
        assert read_clip(out).n_frames == 8

    def test_missing_csi_argument(self, tmp_path, trained):
        assert main(["synthesize", "--model", str(trained / CHECKPOINT_FILE), "--out", str(tmp_path)]) == 1

    def test_incompatible_csi(self, tmp_path, trained, tiny_config_file):
        wide = tmp_path / "wide.cfg"
        wide.write_text(tiny_text(scene__n_sub="5"))
        data = tmp_path / "wide"
        main(["generate", "--out", str(data), "--samples", "1", "--config", str(wide)])
        code = main(["synthesize", "--model", str(trained / CHECKPOINT_FILE),
                     "--csi", str(data), "--out", str(tmp_path / "s")])
        assert code == 4


class TestEvaluate:
    def test_identical_clips(self, tmp_path, tiny_dataset, capsys):
        report_path = tmp_path / "report.json"
        code = main(["evaluate", "--pred", str(tiny_dataset), "--truth", str(tiny_dataset),
                     "--thresholds", "1,25", "--report", str(report_path)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["mse"] == 0.0
        assert report["pcs"] == {"1": 100.0, "25": 100.0}
        assert json.loads(report_path.read_text()) == report

    def test_frame_count_mismatch(self, tmp_path, tiny_dataset):
        truth = read_clip(sample_dir(tiny_dataset, 0))
        write_clip(tmp_path / "pred", VideoClip(truth.frames[:4], truth.kind))
        code = main(["evaluate", "--pred", str(tmp_path / "pred"),
                     "--truth", str(sample_dir(tiny_dataset, 0))])
        assert code == 4

    def test_missing_directory(self, tmp_path, tiny_dataset):
        assert main(["evaluate", "--pred", str(tmp_path / "none"), "--truth", str(tiny_dataset)]) == 3


class TestGradcheck:
    def test_passes(self, capsys):
        assert main(["gradcheck", "--seeds", "1"]) == 0
        assert "gradient checks passed" in capsys.readouterr().out

    def test_corrupted_gradients_fail(self):
        assert main(["gradcheck", "--seeds", "1", "--corrupt"]) == 5


def test_sweep_writes_one_row_per_size(tmp_path, tiny_dataset, tiny_config_file):
    out = tmp_path / "sweep"
    code = main(["sweep", "--data", str(tiny_dataset), "--out", str(out),
                 "--config", str(tiny_config_file), "--sizes", "3,5"])
    assert code == 0
    frame = pd.read_csv(out / "sweep.csv")
    assert list(frame.columns) == ["hidden", "mse", "ssim", "fsim"]
    assert list(frame["hidden"]) == [3, 5]
    assert (out / "hidden_3" / CHECKPOINT_FILE).is_file()
