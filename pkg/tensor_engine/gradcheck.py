"""Finite-difference verification of analytic gradients."""
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from .conv import Conv3dParams, conv3d, conv3d_transposed, crop3d, pad3d
from .layers import batch_norm
from .lstm import LstmParams, lstm_step
from .tensor import Tensor

logger = logging.getLogger("TensorEngine")

EPS = 1e-4
TOLERANCE = 1e-3

# A check draws its inputs from an rng and maps input tensors to a scalar loss.
Inputs = Callable[[np.random.Generator], List[np.ndarray]]
Loss = Callable[[List[Tensor]], Tensor]


@dataclass(frozen=True)
class GradCheck:
    name: str
    inputs: Inputs
    loss: Loss


@dataclass
class GradResult:
    name: str
    error: float
    passed: bool


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    return float(np.linalg.norm(analytic - numeric)
                 / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12))


def check_gradient(loss: Loss, arrays: Sequence[np.ndarray], eps: float = EPS,
                   corrupt: bool = False) -> float:
    """Relative error between backprop and central differences over every input element.

    corrupt scales the analytic gradient, a negative control for the harness itself.
    """
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    loss(tensors).backward()
    analytic = np.concatenate([
        (t.grad if t.grad is not None else np.zeros_like(t.data)).ravel() for t in tensors])
    if corrupt:
        analytic = analytic * 1.1

    numeric = []
    for index, base in enumerate(arrays):
        grad = np.zeros(base.size)
        for j in range(base.size):
            values = []
            for sign in (1.0, -1.0):
                shifted = [a.copy() for a in arrays]
                shifted[index].reshape(-1)[j] += sign * eps
                values.append(loss([Tensor(a) for a in shifted]).item())
            grad[j] = (values[0] - values[1]) / (2 * eps)
        numeric.append(grad)
    return relative_error(analytic, np.concatenate(numeric))


def _projection(shape, seed: int = 1234) -> np.ndarray:
    """Fixed random weights so a summed output has a nontrivial gradient."""
    return np.random.default_rng([seed, *shape]).normal(size=shape)


def projected(t: Tensor) -> Tensor:
    return (t * _projection(t.shape)).sum()


def _away_from_zero(x: np.ndarray, margin: float = 0.1) -> np.ndarray:
    return x + np.where(x >= 0, margin, -margin)


def _conv_inputs(rng):
    return [rng.normal(size=(2, 2, 4, 5, 4)), rng.normal(size=(3, 2, 2, 3, 2)), rng.normal(size=3)]


def _conv_t_inputs(rng):
    return [rng.normal(size=(2, 3, 2, 3, 2)), rng.normal(size=(3, 2, 2, 3, 2)), rng.normal(size=2)]


def _bn_loss(ts):
    x, gamma, beta = ts
    return projected(batch_norm(x, gamma, beta, training=True))


def _lstm_inputs(rng, k=3, d=2):
    return [rng.normal(size=(2, k)), rng.normal(size=(2, d)), rng.normal(size=(2, d)),
            rng.normal(size=(k, 4 * d)), rng.normal(size=(d, 4 * d)),
            rng.normal(size=3 * d), rng.normal(size=4 * d)]


def _lstm_loss(ts):
    a, h, c, pi, u, psi, bias = ts
    h_new, c_new = lstm_step(a, h, c, LstmParams(pi, u, psi, bias))
    return projected(h_new) + projected(c_new)


PRIMITIVES: List[GradCheck] = [
    GradCheck("add", lambda r: [r.normal(size=(3, 4)), r.normal(size=4)],
              lambda ts: projected(ts[0] + ts[1])),
    GradCheck("mul", lambda r: [r.normal(size=(3, 4)), r.normal(size=(3, 4))],
              lambda ts: projected(ts[0] * ts[1])),
    GradCheck("div", lambda r: [r.normal(size=(3, 4)), r.uniform(0.5, 2.0, size=(3, 4))],
              lambda ts: projected(ts[0] / ts[1])),
    GradCheck("matmul", lambda r: [r.normal(size=(3, 4)), r.normal(size=(4, 5))],
              lambda ts: projected(ts[0] @ ts[1])),
    GradCheck("mean", lambda r: [r.normal(size=(2, 3, 4))],
              lambda ts: projected(ts[0].mean(axis=(0, 2)))),
    GradCheck("log", lambda r: [r.uniform(0.5, 2.0, size=(3, 4))],
              lambda ts: projected(ts[0].log())),
    GradCheck("relu", lambda r: [_away_from_zero(r.normal(size=(3, 4)))],
              lambda ts: projected(ts[0].relu())),
    GradCheck("leaky_relu", lambda r: [_away_from_zero(r.normal(size=(3, 4)))],
              lambda ts: projected(ts[0].leaky_relu(0.2))),
    GradCheck("sigmoid", lambda r: [r.normal(size=(3, 4))],
              lambda ts: projected(ts[0].sigmoid())),
    GradCheck("tanh", lambda r: [r.normal(size=(3, 4))],
              lambda ts: projected(ts[0].tanh())),
    GradCheck("pad3d_crop3d", lambda r: [r.normal(size=(1, 2, 3, 4, 3))],
              lambda ts: projected(crop3d(pad3d(ts[0], 2), 1))),
    GradCheck("conv3d", _conv_inputs,
              lambda ts: projected(conv3d(ts[0], Conv3dParams(ts[1], ts[2], (2, 1, 2))))),
    GradCheck("conv3d_transposed", _conv_t_inputs,
              lambda ts: projected(conv3d_transposed(ts[0], Conv3dParams(ts[1], ts[2], (2, 1, 2))))),
    GradCheck("batch_norm", lambda r: [r.normal(size=(3, 2, 2, 3, 2)), r.normal(size=2), r.normal(size=2)],
              _bn_loss),
    GradCheck("lstm_step", _lstm_inputs, _lstm_loss),
]


def run_checks(checks: Sequence[GradCheck], seeds: Sequence[int] = (0,),
               corrupt: bool = False) -> List[GradResult]:
    """Worst error per check over all seeds."""
    results = []
    for check in checks:
        worst = 0.0
        for seed in seeds:
            arrays = check.inputs(np.random.default_rng([seed, len(check.name)]))
            worst = max(worst, check_gradient(check.loss, arrays, corrupt=corrupt))
        passed = worst < TOLERANCE
        results.append(GradResult(check.name, worst, passed))
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, f"gradcheck {check.name}: max relative error {worst:.2e} {'ok' if passed else 'FAILED'}")
    return results

