from dataclasses import dataclass
from typing import Tuple

from errors import ShapeMismatch

from .tensor import Tensor


@dataclass
class LstmParams:
    """Gate blocks are stacked in the order input, forget, output, candidate.

    pi: (K, 4D) input weights, u: (D, 4D) recurrent weights,
    psi: (3D,) diagonal peepholes for i, f, o, bias: (4D,).
    """
    pi: Tensor
    u: Tensor
    psi: Tensor
    bias: Tensor

    @property
    def hidden(self) -> int:
        return self.u.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.pi.shape[0]

    def __post_init__(self):
        d = self.u.shape[0]
        if (self.pi.ndim != 2 or self.pi.shape[1] != 4 * d or self.u.shape != (d, 4 * d)
                or self.psi.shape != (3 * d,) or self.bias.shape != (4 * d,)):
            raise ShapeMismatch(
                f"inconsistent LSTM shapes pi={self.pi.shape} u={self.u.shape} "
                f"psi={self.psi.shape} bias={self.bias.shape}")


def lstm_step(a: Tensor, h_prev: Tensor, c_prev: Tensor, p: LstmParams) -> Tuple[Tensor, Tensor]:
    """One peephole LSTM step on (K,) or (N, K) input.

    All three gates peek at the previous cell state, the output gate included.
    """
    d = p.hidden
    if a.shape[-1] != p.n_inputs:
        raise ShapeMismatch(f"input width {a.shape[-1]} does not match LSTM input size {p.n_inputs}")
    if h_prev.shape[-1] != d or c_prev.shape[-1] != d:
        raise ShapeMismatch(f"state widths {h_prev.shape}, {c_prev.shape} do not match hidden size {d}")

    z = a @ p.pi + h_prev @ p.u + p.bias
    i = (z[..., 0:d] + p.psi[0:d] * c_prev).sigmoid()
    f = (z[..., d:2 * d] + p.psi[d:2 * d] * c_prev).sigmoid()
    o = (z[..., 2 * d:3 * d] + p.psi[2 * d:3 * d] * c_prev).sigmoid()
    candidate = z[..., 3 * d:4 * d].tanh()

    c = f * c_prev + i * candidate
    h = o * c.tanh()
    return h, c
