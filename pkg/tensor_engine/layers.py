from typing import Optional

import numpy as np

from errors import InvalidConfigValue

from .tensor import Tensor

ACTIVATIONS = ("relu", "leaky_relu", "sigmoid", "tanh")


def _channel(v: np.ndarray, ndim: int) -> np.ndarray:
    return v.reshape((1, -1) + (1,) * (ndim - 2))


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor, training: bool,
               running_mean: Optional[np.ndarray] = None, running_var: Optional[np.ndarray] = None,
               momentum: float = 0.1, eps: float = 1e-5, update_stats: bool = True) -> Tensor:
    """Per-channel normalisation of (N, C, ...) input over every axis except C.

    In training mode batch statistics are used and, when update_stats is set,
    folded into the running buffers in place (unbiased variance). Eval mode uses
    the running buffers.
    """
    axes = (0,) + tuple(range(2, x.ndim))
    g = _channel(gamma.data, x.ndim)

    if training:
        count = x.data.size // x.shape[1]
        mean = x.data.mean(axis=axes, keepdims=True)
        var = x.data.var(axis=axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mean) * inv_std
        if update_stats and running_mean is not None and running_var is not None:
            unbiased = var.reshape(-1) * count / max(count - 1, 1)
            running_mean *= 1.0 - momentum
            running_mean += momentum * mean.reshape(-1)
            running_var *= 1.0 - momentum
            running_var += momentum * unbiased
    else:
        inv_std = 1.0 / np.sqrt(_channel(running_var, x.ndim) + eps)
        xhat = (x.data - _channel(running_mean, x.ndim)) * inv_std

    out = Tensor.result(g * xhat + _channel(beta.data, x.ndim), (x, gamma, beta), "batch_norm")

    def _backward():
        grad = out.grad
        gamma.accumulate((grad * xhat).sum(axis=axes))
        beta.accumulate(grad.sum(axis=axes))
        if not x.requires_grad:
            return
        dxhat = grad * g
        if training:
            m = x.data.size // x.shape[1]
            dx = inv_std / m * (m * dxhat
                                - dxhat.sum(axis=axes, keepdims=True)
                                - xhat * (dxhat * xhat).sum(axis=axes, keepdims=True))
        else:
            dx = dxhat * inv_std
        x.accumulate(dx)
    out._backward = _backward
    return out


def activation(kind: str, x: Tensor, slope: float = 0.2) -> Tensor:
    if kind == "relu":
        return x.relu()
    if kind == "leaky_relu":
        return x.leaky_relu(slope)
    if kind == "sigmoid":
        return x.sigmoid()
    if kind == "tanh":
        return x.tanh()
    raise InvalidConfigValue(f"unknown activation {kind!r}, expected one of {ACTIVATIONS}")
