"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every op returns a new Tensor that remembers its parents and a closure that
pushes its gradient back to them. Ops whose inputs need no gradient build no graph.
"""
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from errors import NotScalar, ShapeMismatch

ArrayLike = Union["Tensor", np.ndarray, float, int]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _is_basic(index) -> bool:
    """True for slice/int/Ellipsis indexing, which never selects an element twice."""
    parts = index if isinstance(index, tuple) else (index,)
    return all(isinstance(i, (slice, int, type(Ellipsis), type(None))) for i in parts)


class Tensor:
    def __init__(self, data, requires_grad: bool = False,
                 _prev: Iterable["Tensor"] = (), _op: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._prev = tuple(_prev)
        self._op = _op
        self._backward: Callable[[], None] = lambda: None

    # -- bookkeeping ---------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise NotScalar(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}, op={self._op!r})"

    def accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if grad.shape != self.data.shape:
            grad = _unbroadcast(grad, self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    @staticmethod
    def _lift(other: ArrayLike) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    @staticmethod
    def result(data: np.ndarray, parents: Tuple["Tensor", ...], op: str) -> "Tensor":
        """Output node; it joins the graph only if some parent needs a gradient."""
        if any(p.requires_grad for p in parents):
            return Tensor(data, True, parents, op)
        return Tensor(data, False, (), op)

    # -- arithmetic ----------------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        other = self._lift(other)
        out = self.result(self.data + other.data, (self, other), "add")

        def _backward():
            self.accumulate(out.grad)
            other.accumulate(out.grad)
        out._backward = _backward
        return out

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        out = self.result(-self.data, (self,), "neg")

        def _backward():
            self.accumulate(-out.grad)
        out._backward = _backward
        return out

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return self + (-self._lift(other))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return self._lift(other) + (-self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        other = self._lift(other)
        out = self.result(self.data * other.data, (self, other), "mul")

        def _backward():
            self.accumulate(out.grad * other.data)
            other.accumulate(out.grad * self.data)
        out._backward = _backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        other = self._lift(other)
        out = self.result(self.data / other.data, (self, other), "div")

        def _backward():
            self.accumulate(out.grad / other.data)
            other.accumulate(-out.grad * self.data / other.data ** 2)
        out._backward = _backward
        return out

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return self._lift(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        out = self.result(self.data ** exponent, (self,), "pow")

        def _backward():
            self.accumulate(out.grad * exponent * self.data ** (exponent - 1))
        out._backward = _backward
        return out

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        other = self._lift(other)
        if self.shape[-1] != other.shape[0] or other.ndim != 2:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        out = self.result(self.data @ other.data, (self, other), "matmul")

        def _backward():
            g = out.grad if out.grad.ndim > 1 else out.grad[None, :]
            a = self.data if self.data.ndim > 1 else self.data[None, :]
            self.accumulate((g @ other.data.T).reshape(self.shape))
            other.accumulate(a.T @ g)
        out._backward = _backward
        return out

    # -- reductions and reshaping --------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = self.result(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum")

        def _backward():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.accumulate(np.broadcast_to(g, self.shape))
        out._backward = _backward
        return out

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else np.prod([self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = self.result(self.data.reshape(shape), (self,), "reshape")

        def _backward():
            self.accumulate(out.grad.reshape(self.shape))
        out._backward = _backward
        return out

    def __getitem__(self, index) -> "Tensor":
        out = self.result(self.data[index], (self,), "getitem")

        def _backward():
            grad = np.zeros_like(self.data)
            if _is_basic(index):
                grad[index] += out.grad
            else:
                np.add.at(grad, index, out.grad)
            self.accumulate(grad)
        out._backward = _backward
        return out

    # -- elementwise functions -----------------------------------------------------

    def log(self) -> "Tensor":
        out = self.result(np.log(self.data), (self,), "log")

        def _backward():
            self.accumulate(out.grad / self.data)
        out._backward = _backward
        return out

    def exp(self) -> "Tensor":
        out = self.result(np.exp(self.data), (self,), "exp")

        def _backward():
            self.accumulate(out.grad * out.data)
        out._backward = _backward
        return out

    def sigmoid(self) -> "Tensor":
        x = self.data
        # split by sign so exp never overflows
        e = np.exp(-np.abs(x))
        s = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
        out = self.result(s, (self,), "sigmoid")

        def _backward():
            self.accumulate(out.grad * s * (1.0 - s))
        out._backward = _backward
        return out

    def tanh(self) -> "Tensor":
        t = np.tanh(self.data)
        out = self.result(t, (self,), "tanh")

        def _backward():
            self.accumulate(out.grad * (1.0 - t ** 2))
        out._backward = _backward
        return out

    def clip(self, low: float, high: float) -> "Tensor":
        inside = (self.data >= low) & (self.data <= high)
        out = self.result(np.clip(self.data, low, high), (self,), "clip")

        def _backward():
            self.accumulate(out.grad * inside)
        out._backward = _backward
        return out

    def relu(self) -> "Tensor":
        return self.leaky_relu(0.0)

    def leaky_relu(self, slope: float = 0.2) -> "Tensor":
        positive = self.data > 0
        out = self.result(np.where(positive, self.data, slope * self.data), (self,), "leaky_relu")

        def _backward():
            self.accumulate(out.grad * np.where(positive, 1.0, slope))
        out._backward = _backward
        return out

    # -- differentiation -----------------------------------------------------------

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into every leaf that requires a gradient."""
        if grad is None:
            if self.data.size != 1:
                raise NotScalar(f"backward needs a scalar loss, got shape {self.shape}")
            grad = np.ones_like(self.data)
        if not self.requires_grad:
            return

        # iterative post-order; unrolled LSTM graphs are far deeper than the recursion limit
        topo, visited = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            stack.extend((p, False) for p in node._prev if id(p) not in visited)

        self.grad = np.asarray(grad, dtype=np.float64).reshape(self.shape).copy()
        for node in reversed(topo):
            if node.grad is not None and node._prev:
                node._backward()
