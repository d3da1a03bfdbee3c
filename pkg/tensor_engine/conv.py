"""Strided 3-D convolution over (N, C, T, H, W) volumes and its adjoint.

Neither op pads; use pad3d / crop3d around them.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from errors import ShapeMismatch

from .tensor import Tensor

Triple = Tuple[int, int, int]
SPATIAL = (2, 3, 4)


def as_triple(value: Union[int, Triple]) -> Triple:
    if isinstance(value, int):
        return (value, value, value)
    value = tuple(int(v) for v in value)
    if len(value) != 3:
        raise ShapeMismatch(f"expected 3 values for (t, h, w), got {value}")
    return value


@dataclass
class Conv3dParams:
    """kernel is (out, in, kT, kH, kW) for conv3d and (in, out, kT, kH, kW) for conv3d_transposed."""
    kernel: Tensor
    bias: Tensor
    stride: Triple = (1, 1, 1)

    def __post_init__(self):
        self.stride = as_triple(self.stride)
        if self.kernel.ndim != 5 or min(self.kernel.shape) < 1:
            raise ShapeMismatch(f"kernel must be 5-D with positive sizes, got {self.kernel.shape}")
        if min(self.stride) < 1:
            raise ShapeMismatch(f"strides must be >= 1, got {self.stride}")


def _windows(x: np.ndarray, kernel: Triple, stride: Triple) -> np.ndarray:
    """(N, C, T', H', W', kT, kH, kW) view of every strided kernel placement."""
    view = sliding_window_view(x, kernel, axis=SPATIAL)
    st, sh, sw = stride
    return view[:, :, ::st, ::sh, ::sw]


def _correlate(x: np.ndarray, w: np.ndarray, stride: Triple) -> np.ndarray:
    """Contract x channels with w axis 1; output channels come from w axis 0."""
    win = _windows(x, w.shape[2:], stride)
    out = np.tensordot(win, w, axes=([1, 5, 6, 7], [1, 2, 3, 4]))
    return np.moveaxis(out, -1, 1)


def _scatter(g: np.ndarray, w: np.ndarray, stride: Triple, out_spatial: Triple) -> np.ndarray:
    """Adjoint of _correlate: spread g (N, J, ...) through w (J, C, k) into (N, C, *out_spatial)."""
    n = g.shape[0]
    kt, kh, kw = w.shape[2:]
    st, sh, sw = stride
    zt, zh, zw = g.shape[2:]
    out = np.zeros((n, w.shape[1]) + tuple(out_spatial))
    for a in range(kt):
        for b in range(kh):
            for c in range(kw):
                contrib = np.tensordot(g, w[:, :, a, b, c], axes=([1], [0]))
                out[:, :, a:a + st * zt:st, b:b + sh * zh:sh, c:c + sw * zw:sw] += np.moveaxis(contrib, -1, 1)
    return out


def _kernel_grad(x: np.ndarray, g: np.ndarray, kernel: Triple, stride: Triple) -> np.ndarray:
    """sum over n, positions of g[n, j, pos] * window(x)[n, c, pos, offset] -> (J, C, k)."""
    win = _windows(x, kernel, stride)
    return np.tensordot(g, win, axes=([0, 2, 3, 4], [0, 2, 3, 4]))


def _squeeze_batch(t: Tensor) -> Tensor:
    return t.reshape(t.shape[1:])


def conv3d(x: Tensor, p: Conv3dParams) -> Tensor:
    """Valid strided correlation, output size floor((in - k) / stride) + 1 per axis.

    x is (N, C, T, H, W) or a single (C, T, H, W) volume.
    """
    if x.ndim == 4:
        return _squeeze_batch(conv3d(x.reshape((1,) + x.shape), p))
    if x.ndim != 5:
        raise ShapeMismatch(f"expected (N, C, T, H, W) or (C, T, H, W) input, got {x.shape}")
    kernel, bias = p.kernel, p.bias
    if x.shape[1] != kernel.shape[1]:
        raise ShapeMismatch(f"input has {x.shape[1]} channels, kernel expects {kernel.shape[1]}")
    if bias.shape != (kernel.shape[0],):
        raise ShapeMismatch(f"bias shape {bias.shape} does not match {kernel.shape[0]} output maps")
    k = kernel.shape[2:]
    if any(size < ks for size, ks in zip(x.shape[2:], k)):
        raise ShapeMismatch(f"kernel {k} does not fit input {x.shape[2:]}")
    stride = p.stride

    data = _correlate(x.data, kernel.data, stride) + bias.data[None, :, None, None, None]
    out = Tensor.result(data, (x, kernel, bias), "conv3d")

    def _backward():
        g = out.grad
        if x.requires_grad:
            x.accumulate(_scatter(g, kernel.data, stride, x.shape[2:]))
        if kernel.requires_grad:
            kernel.accumulate(_kernel_grad(x.data, g, k, stride))
        bias.accumulate(g.sum(axis=(0, 2, 3, 4)))
    out._backward = _backward
    return out


def conv3d_transposed(x: Tensor, p: Conv3dParams) -> Tensor:
    """Adjoint of conv3d with the same kernel; output size (in - 1) * stride + k per axis."""
    if x.ndim == 4:
        return _squeeze_batch(conv3d_transposed(x.reshape((1,) + x.shape), p))
    if x.ndim != 5:
        raise ShapeMismatch(f"expected (N, C, T, H, W) or (C, T, H, W) input, got {x.shape}")
    kernel, bias = p.kernel, p.bias
    if x.shape[1] != kernel.shape[0]:
        raise ShapeMismatch(f"input has {x.shape[1]} channels, kernel expects {kernel.shape[0]}")
    if bias.shape != (kernel.shape[1],):
        raise ShapeMismatch(f"bias shape {bias.shape} does not match {kernel.shape[1]} output maps")
    k = kernel.shape[2:]
    stride = p.stride
    out_spatial = tuple((n - 1) * s + ks for n, s, ks in zip(x.shape[2:], stride, k))

    data = _scatter(x.data, kernel.data, stride, out_spatial) + bias.data[None, :, None, None, None]
    out = Tensor.result(data, (x, kernel, bias), "conv3d_transposed")

    def _backward():
        g = out.grad
        if x.requires_grad:
            x.accumulate(_correlate(g, kernel.data, stride))
        if kernel.requires_grad:
            kernel.accumulate(_kernel_grad(g, x.data, k, stride))
        bias.accumulate(g.sum(axis=(0, 2, 3, 4)))
    out._backward = _backward
    return out


def pad3d(x: Tensor, pad: int) -> Tensor:
    """Zero-pad the three trailing axes by `pad` on both sides."""
    if pad == 0:
        return x
    widths = [(0, 0)] * (x.ndim - 3) + [(pad, pad)] * 3
    out = Tensor.result(np.pad(x.data, widths), (x,), "pad3d")
    inner = (Ellipsis, slice(pad, -pad), slice(pad, -pad), slice(pad, -pad))

    def _backward():
        x.accumulate(out.grad[inner])
    out._backward = _backward
    return out


def crop3d(x: Tensor, crop: int) -> Tensor:
    """Drop `crop` samples from both ends of the three trailing axes."""
    if crop == 0:
        return x
    if any(size <= 2 * crop for size in x.shape[-3:]):
        raise ShapeMismatch(f"cannot crop {crop} from each side of {x.shape[-3:]}")
    return x[(Ellipsis, slice(crop, -crop), slice(crop, -crop), slice(crop, -crop))]
