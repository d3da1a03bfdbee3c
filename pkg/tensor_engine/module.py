"""Parameter containers for the network.

A Module exposes its Parameters, child Modules and buffers by attribute name in
definition order. Attributes whose names start with an underscore are not
walked, which lets one module hold a reference to a component owned elsewhere.
"""
from contextlib import contextmanager
from typing import Dict, Iterator, List, Tuple

import numpy as np

from errors import ShapeMismatch

from .conv import Conv3dParams, as_triple, conv3d, conv3d_transposed
from .layers import batch_norm
from .lstm import LstmParams, lstm_step
from .tensor import Tensor


class Parameter(Tensor):
    def __init__(self, data):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True)


class Module:
    def __init__(self):
        self.training = True
        self._frozen = False
        self._buffers: Dict[str, np.ndarray] = {}

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        self._buffers[name] = np.array(value, dtype=np.float64)

    def buffer(self, name: str) -> np.ndarray:
        return self._buffers[name]

    def children(self) -> Iterator[Tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{i}", item

    def modules(self) -> Iterator["Module"]:
        yield self
        for _, child in self.children():
            yield from child.modules()

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            if isinstance(value, Parameter):
                yield prefix + name, value
        for name, child in self.children():
            yield from child.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name, value in self._buffers.items():
            yield prefix + name, value
        for name, child in self.children():
            yield from child.named_buffers(f"{prefix}{name}.")

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update((name, b.copy()) for name, b in self.named_buffers())
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        targets = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        missing = [name for name in list(targets) + list(buffers) if name not in state]
        if missing:
            raise ShapeMismatch(f"state is missing {', '.join(missing)}")
        for name, p in targets.items():
            if state[name].shape != p.shape:
                raise ShapeMismatch(f"{name}: stored shape {state[name].shape} != model shape {p.shape}")
            p.data = np.array(state[name], dtype=np.float64)
        for name, b in buffers.items():
            if state[name].shape != b.shape:
                raise ShapeMismatch(f"{name}: stored shape {state[name].shape} != model shape {b.shape}")
            b[...] = state[name]

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    @contextmanager
    def frozen(self):
        """Parameters take no gradient and batch-norm running statistics stay put."""
        params = self.parameters()
        modules = list(self.modules())
        for p in params:
            p.requires_grad = False
        for module in modules:
            module._frozen = True
        try:
            yield self
        finally:
            for p in params:
                p.requires_grad = True
            for module in modules:
                module._frozen = False

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


class Conv3d(Module):
    def __init__(self, in_maps: int, out_maps: int, kernel, stride=1):
        super().__init__()
        k = as_triple(kernel)
        self.kernel = Parameter(np.zeros((out_maps, in_maps) + k))
        self.bias = Parameter(np.zeros(out_maps))
        self._stride = as_triple(stride)

    @property
    def params(self) -> Conv3dParams:
        return Conv3dParams(self.kernel, self.bias, self._stride)

    def forward(self, x: Tensor) -> Tensor:
        return conv3d(x, self.params)


class ConvTranspose3d(Module):
    def __init__(self, in_maps: int, out_maps: int, kernel, stride=1):
        super().__init__()
        k = as_triple(kernel)
        self.kernel = Parameter(np.zeros((in_maps, out_maps) + k))
        self.bias = Parameter(np.zeros(out_maps))
        self._stride = as_triple(stride)

    @property
    def params(self) -> Conv3dParams:
        return Conv3dParams(self.kernel, self.bias, self._stride)

    def forward(self, x: Tensor) -> Tensor:
        return conv3d_transposed(x, self.params)


class BatchNorm3d(Module):
    def __init__(self, maps: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.gamma = Parameter(np.ones(maps))
        self.beta = Parameter(np.zeros(maps))
        self.register_buffer("running_mean", np.zeros(maps))
        self.register_buffer("running_var", np.ones(maps))
        self._momentum = momentum
        self._eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return batch_norm(x, self.gamma, self.beta, self.training,
                          self.buffer("running_mean"), self.buffer("running_var"),
                          self._momentum, self._eps, update_stats=not self._frozen)


class LSTM(Module):
    """Single peephole LSTM layer unrolled over the rows of a (N, P, K) input."""

    def __init__(self, n_inputs: int, hidden: int):
        super().__init__()
        self.pi = Parameter(np.zeros((n_inputs, 4 * hidden)))
        self.u = Parameter(np.zeros((hidden, 4 * hidden)))
        self.psi = Parameter(np.zeros(3 * hidden))
        self.bias = Parameter(np.zeros(4 * hidden))

    @property
    def params(self) -> LstmParams:
        return LstmParams(self.pi, self.u, self.psi, self.bias)

    @property
    def hidden(self) -> int:
        return self.u.shape[0]

    def forward(self, a: Tensor) -> Tensor:
        if a.ndim != 3 or a.shape[2] != self.pi.shape[0]:
            raise ShapeMismatch(f"LSTM expects (N, P, {self.pi.shape[0]}) input, got {a.shape}")
        p = self.params
        h = Tensor(np.zeros((a.shape[0], self.hidden)))
        c = Tensor(np.zeros((a.shape[0], self.hidden)))
        for step in range(a.shape[1]):
            h, c = lstm_step(a[:, step, :], h, c, p)
        return h
