"""Cross-modal training loop: discriminator, teacher and student updates per batch."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from errors import EmptyDataset, ShapeMismatch, VerificationError
from metrics import DEFAULT_THRESHOLDS, MetricReport, evaluate_clips
from network import CrossModalNet, LayerPlan, clips_to_tensor, matrices_to_tensor
from sanitizer import AmplitudeMatrix, HampelConfig, amplitude_matrix
from synthetic import Pair, VideoClip
from tensor_engine import Module, Tensor, load_checkpoint, save_checkpoint, split_meta

from .adam import Adam, OptimConfig
from .loss_history import LossHistory
from .losses import LossWeights, student_losses, teacher_losses

logger = logging.getLogger("Trainer")

CHECKPOINT_FILE = "model.w8ts"
LOSS_LOG_FILE = "loss_log.csv"
RUN_CONFIG_FILE = "run.cfg"
REPORT_FILE = "test_report.json"

# discriminator outputs are kept this far inside (0, 1) before taking logs
PROB_FLOOR = 1e-7


@dataclass(frozen=True)
class TrainSettings:
    plan: LayerPlan = field(default_factory=LayerPlan)
    optim: OptimConfig = field(default_factory=OptimConfig)
    weights: LossWeights = field(default_factory=LossWeights)
    hampel: HampelConfig = field(default_factory=HampelConfig)
    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    workers: int = 1


class Optimizers(NamedTuple):
    discriminator: Adam
    teacher: Adam
    student: Adam

    def blocks(self) -> Dict[str, np.ndarray]:
        out = {}
        for opt in self:
            out.update(opt.blocks())
        return out

    def load_blocks(self, blocks: Dict[str, np.ndarray]) -> None:
        for opt in self:
            opt.load_blocks(blocks)


class TrainResult(NamedTuple):
    net: CrossModalNet
    history: LossHistory
    report: MetricReport


def init_params(model: Module, cfg: OptimConfig) -> Module:
    """Zero-mean Gaussian weights, zero biases, unit batch-norm scales; one seeded stream."""
    rng = np.random.default_rng(cfg.seed)
    for name, p in model.named_parameters():
        leaf = name.rsplit(".", 1)[-1]
        if leaf in ("bias", "beta"):
            p.data = np.zeros_like(p.data)
        elif leaf == "gamma":
            p.data = np.ones_like(p.data)
        else:
            p.data = rng.normal(0.0, cfg.init_std, size=p.shape)
    return model


def split_indices(n: int, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded train/test split; both halves are non-empty once there are two samples."""
    if n < 1:
        raise EmptyDataset("cannot split an empty dataset")
    order = np.random.default_rng(seed).permutation(n)
    if n == 1:
        return order, order
    n_train = min(max(1, int(n * fraction)), n - 1)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def build_optimizers(net: CrossModalNet, cfg: OptimConfig) -> Optimizers:
    teacher = list(net.encoder.named_parameters("encoder.")) + list(net.decoder.named_parameters("decoder."))
    return Optimizers(
        discriminator=Adam("discriminator", list(net.discriminator.named_parameters("discriminator.")), cfg),
        teacher=Adam("teacher", teacher, cfg),
        student=Adam("student", list(net.student.named_parameters("student.")), cfg),
    )


def _probabilities(c: Tensor) -> Tensor:
    return c.clip(PROB_FLOOR, 1.0 - PROB_FLOOR)


def train_step(net: CrossModalNet, optimizers: Optimizers, F: Tensor, A: Tensor,
               weights: LossWeights = LossWeights()) -> Dict[str, float]:
    """One batch: discriminator, then teacher, then student with the decoder frozen."""
    Z = net.encode_video(F)
    Y = net.decode_video(Z)

    c_real = _probabilities(net.discriminate(F))
    c_fake = _probabilities(net.discriminate(Y.detach()))
    adv_c = teacher_losses(F, Y.detach(), c_real, c_fake, weights).l_adv_c
    adv_c.backward()
    optimizers.discriminator.step()
    optimizers.discriminator.zero_grad()

    with net.discriminator.frozen():
        c_fake = _probabilities(net.discriminate(Y))
        teacher = teacher_losses(F, Y, c_real.detach(), c_fake, weights)
        teacher.l_teacher.backward()
    optimizers.teacher.step()
    optimizers.teacher.zero_grad()

    with net.decoder.frozen():
        V = net.lift_to_visual(net.encode_signal(A))
        S = net.decode_video(V)
        student = student_losses(Z, V, Y, S, weights)
        student.l_student.backward()
    leaked = [name for name, p in optimizers.teacher.params if p.grad is not None]
    if leaked:
        raise VerificationError(f"student loss reached teacher parameters: {', '.join(leaked)}")
    optimizers.student.step()
    optimizers.student.zero_grad()

    losses = {
        "l_adv_c": adv_c.item(),
        "l_adv_g": teacher.l_adv_g.item(),
        "mse_y": teacher.mse_y.item(),
        "mse_v": student.mse_v.item(),
        "mse_s": student.mse_s.item(),
    }
    logger.debug("Step losses: " + ", ".join(f"{k}={v:.5f}" for k, v in losses.items()))
    return losses


def _checkpoint_blocks(net: CrossModalNet, optimizers: Optimizers, epochs_done: int,
                       hampel: HampelConfig) -> Dict[str, np.ndarray]:
    blocks = net.blocks()
    blocks["meta/epoch"] = np.array(float(epochs_done))
    blocks["meta/hampel_window"] = np.array(float(hampel.window))
    blocks["meta/hampel_n_sigmas"] = np.array(float(hampel.n_sigmas))
    blocks.update(optimizers.blocks())
    return blocks


def hampel_from_meta(meta: Dict[str, float]) -> HampelConfig:
    """Sanitiser settings stored in a checkpoint, or the defaults when absent."""
    if "hampel_window" not in meta:
        return HampelConfig()
    return HampelConfig(window=int(meta["hampel_window"]), n_sigmas=float(meta["hampel_n_sigmas"]))


def synthesize_batched(net: CrossModalNet, matrices: Sequence[AmplitudeMatrix],
                       batch_size: int) -> List[VideoClip]:
    net.eval()
    clips = []
    for start in range(0, len(matrices), batch_size):
        clips.extend(net.synthesize(list(matrices[start:start + batch_size])))
    return clips


def _resume(out_dir: Path, net: CrossModalNet, optimizers: Optimizers) -> Tuple[int, Optional[LossHistory]]:
    path = out_dir / CHECKPOINT_FILE
    if not path.exists():
        return 0, None
    meta, tensors = split_meta(load_checkpoint(path))
    net.load_state_dict({k: v for k, v in tensors.items() if not k.startswith("optim/")})
    optimizers.load_blocks(tensors)
    epochs_done = int(meta.get("epoch", 0))
    log_path = out_dir / LOSS_LOG_FILE
    history = LossHistory.load_from_file(log_path) if log_path.exists() else LossHistory()
    logger.info(f"Resuming from {path} after {epochs_done} epochs")
    return epochs_done, history


def train(pairs: Sequence[Pair], settings: TrainSettings, out_dir: Union[str, Path],
          config_text: Optional[str] = None, resume: bool = True) -> TrainResult:
    """Train teacher and student on the seeded split, checkpointing every epoch.

    Epoch e shuffles with ``default_rng([seed, e])``, so an interrupted run resumed
    from its checkpoint ends in the same state as an uninterrupted one.
    """
    if not pairs:
        raise EmptyDataset("training needs at least one sample")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config_text is not None:
        (out_dir / RUN_CONFIG_FILE).write_text(config_text, encoding="utf-8")

    plan, cfg = settings.plan, settings.optim
    clips = [clip for clip, _ in pairs]
    matrices = [amplitude_matrix(seq, settings.hampel, settings.workers) for _, seq in pairs]
    expected = (plan.n_pkt, plan.n_sub)
    for m in matrices:
        if (m.n_pkt, m.n_sub) != expected:
            raise ShapeMismatch(f"amplitude matrix {(m.n_pkt, m.n_sub)} does not fit the model's {expected}")

    train_idx, test_idx = split_indices(len(pairs), cfg.train_fraction, cfg.seed)
    if len(pairs) == 1:
        logger.info("Single sample: evaluating on the training split")
    logger.info(f"Training on {len(train_idx)} samples, holding out {len(test_idx)}")

    net = init_params(CrossModalNet(plan), cfg)
    optimizers = build_optimizers(net, cfg)
    start, history = (0, None)
    if resume:
        start, history = _resume(out_dir, net, optimizers)
    history = history or LossHistory()

    for epoch in range(start, cfg.epochs):
        net.train()
        order = train_idx[np.random.default_rng([cfg.seed, epoch]).permutation(len(train_idx))]
        for begin in range(0, len(order), cfg.batch_size):
            batch = order[begin:begin + cfg.batch_size]
            F = clips_to_tensor([clips[i] for i in batch])
            A = matrices_to_tensor([matrices[i] for i in batch])
            history.add_record(epoch, train_step(net, optimizers, F, A, settings.weights))
        means = history.close_epoch(epoch)
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: "
                    + ", ".join(f"{k}={v:.5f}" for k, v in means.items()))
        save_checkpoint(out_dir / CHECKPOINT_FILE, _checkpoint_blocks(net, optimizers, epoch + 1, settings.hampel))
        history.save_to_file(out_dir / LOSS_LOG_FILE)

    if not (out_dir / CHECKPOINT_FILE).exists():
        save_checkpoint(out_dir / CHECKPOINT_FILE, _checkpoint_blocks(net, optimizers, start, settings.hampel))

    predicted = synthesize_batched(net, [matrices[i] for i in test_idx], cfg.batch_size)
    report = evaluate_clips(predicted, [clips[i] for i in test_idx], settings.thresholds, settings.workers)
    report.save(out_dir / REPORT_FILE)
    return TrainResult(net, history, report)
