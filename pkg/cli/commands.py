"""Subcommand bodies. Each takes the parsed arguments and returns an exit code;
errors propagate as exceptions and main.py maps them to codes."""
import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from csi_io import export_amplitude_csv, load_csib
from errors import VerificationError
from metrics import evaluate_clips
from network import CrossModalNet
from sanitizer import HampelConfig, amplitude_matrix
from synthetic import generate_dataset, load_clips, load_csi_only, load_dataset, sample_dir, write_clip, write_dataset
from tensor_engine import PRIMITIVES, load_checkpoint, run_checks, split_meta
from training import LOSS_CHECKS, hampel_from_meta, synthesize_batched, train

from .run_config import RunConfig

logger = logging.getLogger("MainPipeline")

SWEEP_FILE = "sweep.csv"


def load_config(path: Optional[str]) -> RunConfig:
    return RunConfig.from_file(path) if path else RunConfig()


def _existing_dir(path: str) -> Path:
    directory = Path(path)
    if not directory.is_dir():
        raise FileNotFoundError(f"directory not found: {directory}")
    return directory


def cmd_generate(args: argparse.Namespace) -> int:
    overrides = {"clip.kind": args.kind, "scene.seed": None if args.seed is None else str(args.seed)}
    config = load_config(args.config).with_overrides(overrides)
    pairs = generate_dataset(args.samples, config["clip.frames"], config["clip.packets"],
                             config.scene_config(), config.kind, config["clip.height"],
                             config["clip.width"], config.workers)
    write_dataset(args.out, pairs, config.dump())
    print(f"{len(pairs)} samples written to {args.out}")
    return 0


def cmd_sanitize(args: argparse.Namespace) -> int:
    cfg = HampelConfig(window=args.window, n_sigmas=args.nsigma)
    matrix = amplitude_matrix(load_csib(args.input), cfg)
    Path(args.out).write_text(export_amplitude_csv(matrix), encoding="utf-8")
    logger.info(f"Wrote {matrix.n_pkt}x{matrix.n_sub} sanitised amplitudes to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    pairs = load_dataset(_existing_dir(args.data))
    result = train(pairs, config.train_settings(), args.out, config.dump())
    print(result.report.to_json())
    return 0


def cmd_synthesize(args: argparse.Namespace) -> int:
    """Student-only inference; reads the checkpoint and CSI, never any frame file."""
    blocks = load_checkpoint(args.model)
    meta, _ = split_meta(blocks)
    net = CrossModalNet.from_blocks(blocks)
    hampel = hampel_from_meta(meta)

    source = Path(args.csi)
    if source.is_dir():
        sequences = load_csi_only(source)
    else:
        sequences = [load_csib(source)]
    matrices = [amplitude_matrix(seq, hampel) for seq in sequences]
    clips = synthesize_batched(net, matrices, batch_size=4)

    out = Path(args.out)
    if source.is_dir():
        for index, clip in enumerate(clips):
            write_clip(sample_dir(out, index), clip)
    else:
        write_clip(out, clips[0])
    print(f"Synthesised {len(clips)} clips of {clips[0].n_frames} frames into {out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    pred = load_clips(_existing_dir(args.pred))
    truth = load_clips(_existing_dir(args.truth))
    report = evaluate_clips(pred, truth, args.thresholds)
    if args.report:
        report.save(args.report)
    print(report.to_json())
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    results = run_checks(PRIMITIVES + LOSS_CHECKS, seeds=range(args.seeds), corrupt=args.corrupt)
    for r in results:
        print(f"{r.name:<20} {r.error:.3e} {'PASS' if r.passed else 'FAIL'}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise VerificationError(f"gradient check failed for {', '.join(failed)}")
    print(f"All {len(results)} gradient checks passed")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    """One model per hidden size on the same split; held-out scores collected in sweep.csv."""
    config = load_config(args.config)
    pairs = load_dataset(_existing_dir(args.data))
    out = Path(args.out)
    rows: List[dict] = []
    for hidden in args.sizes:
        logger.info(f"Sweep: training with hidden size {hidden}")
        sized = config.with_overrides({"model.hidden": str(hidden)})
        result = train(pairs, sized.train_settings(), out / f"hidden_{hidden}", sized.dump())
        rows.append({"hidden": hidden, "mse": result.report.mse,
                     "ssim": result.report.ssim, "fsim": result.report.fsim})
    out.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=["hidden", "mse", "ssim", "fsim"])
    frame.to_csv(out / SWEEP_FILE, index=False, float_format="%.6f", lineterminator="\n")
    print(frame.to_string(index=False))
    return 0


def parse_sizes(text: str) -> Sequence[int]:
    return [int(part) for part in text.split(",")]


def parse_thresholds(text: str) -> Sequence[float]:
    return [float(part) for part in text.split(",")]
