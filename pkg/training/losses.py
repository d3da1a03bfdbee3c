"""Adversarial and reconstruction objectives for the teacher and the student."""
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from errors import DomainError, InvalidConfigValue, ShapeMismatch
from tensor_engine import GradCheck, Tensor, projected


@dataclass(frozen=True)
class LossWeights:
    w_adv: float = 0.5
    w_y: float = 1.0
    w_v: float = 0.5
    w_s: float = 1.0

    def __post_init__(self):
        if min(self.w_adv, self.w_y, self.w_v, self.w_s) < 0:
            raise InvalidConfigValue("loss weights must be nonnegative")
        if not self.w_adv < self.w_y:
            raise InvalidConfigValue(f"w_adv ({self.w_adv}) must be below w_y ({self.w_y})")
        if not self.w_v < self.w_s:
            raise InvalidConfigValue(f"w_v ({self.w_v}) must be below w_s ({self.w_s})")


class TeacherLosses(NamedTuple):
    l_adv_c: Tensor
    l_adv_g: Tensor
    mse_y: Tensor
    l_teacher: Tensor


class StudentLosses(NamedTuple):
    mse_v: Tensor
    mse_s: Tensor
    l_student: Tensor


def mse(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    return ((a - b) ** 2).mean()


def _check_probability(c: Tensor, name: str) -> None:
    if not np.all((c.data > 0.0) & (c.data < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1), got range "
                          f"[{c.data.min():.3g}, {c.data.max():.3g}]")


def teacher_losses(F: Tensor, Y: Tensor, c_real: Tensor, c_fake: Tensor,
                   weights: LossWeights = LossWeights()) -> TeacherLosses:
    """Discriminator cross-entropy, non-saturating generator loss and frame MSE.

    Batch terms are averaged over clips.
    """
    _check_probability(c_real, "c_real")
    _check_probability(c_fake, "c_fake")
    l_adv_c = -(c_real.log() + (1.0 - c_fake).log()).mean()
    l_adv_g = -(c_fake.log()).mean()
    mse_y = mse(F, Y)
    return TeacherLosses(l_adv_c, l_adv_g, mse_y, weights.w_adv * l_adv_g + weights.w_y * mse_y)


def student_losses(Z: Tensor, V: Tensor, Y: Tensor, S: Tensor,
                   weights: LossWeights = LossWeights()) -> StudentLosses:
    """Latent and frame MSE against the teacher's outputs, which are detached here."""
    mse_v = mse(Z.detach(), V)
    mse_s = mse(Y.detach(), S)
    return StudentLosses(mse_v, mse_s, weights.w_v * mse_v + weights.w_s * mse_s)


def total_loss(l_teacher: Tensor, l_student: Tensor) -> Tensor:
    return l_teacher + l_student


def _probabilities(rng, n=3):
    return rng.uniform(0.1, 0.9, size=n)


LOSS_CHECKS: List[GradCheck] = [
    GradCheck("l_adv_c", lambda r: [_probabilities(r), _probabilities(r)],
              lambda ts: teacher_losses(Tensor(np.zeros(2)), Tensor(np.zeros(2)), ts[0], ts[1]).l_adv_c),
    GradCheck("l_adv_g", lambda r: [_probabilities(r)],
              lambda ts: teacher_losses(Tensor(np.zeros(2)), Tensor(np.zeros(2)), Tensor([0.5]), ts[0]).l_adv_g),
    GradCheck("l_teacher", lambda r: [r.normal(size=(2, 1, 2, 3, 3)), r.normal(size=(2, 1, 2, 3, 3)),
                                      _probabilities(r, 2)],
              lambda ts: teacher_losses(ts[0], ts[1], Tensor([0.5, 0.5]), ts[2]).l_teacher),
    GradCheck("l_student", lambda r: [r.normal(size=(2, 3, 1, 2, 2)), r.normal(size=(2, 1, 2, 3, 3))],
              lambda ts: student_losses(Tensor(np.ones((2, 3, 1, 2, 2))), ts[0],
                                        Tensor(np.zeros((2, 1, 2, 3, 3))), ts[1]).l_student),
    GradCheck("total_loss", lambda r: [r.normal(size=(2, 4)), r.normal(size=(2, 4))],
              lambda ts: total_loss(projected(ts[0] * ts[1]), projected(ts[0].tanh()))),
]
