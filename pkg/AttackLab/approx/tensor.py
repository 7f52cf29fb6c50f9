"""Reverse-mode differentiation over float64 numpy arrays.

Every op builds its output eagerly and, when an input needs gradients,
records a closure that pushes the output gradient back to its inputs.
``backward`` walks the recorded graph in reverse topological order.
"""
from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from ..errors import NonFinite, NotScalar, ShapeMismatch


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ('data', 'grad', 'requires_grad', '_parents', '_backward', 'name')

    def __init__(self, data, requires_grad: bool = False, name: str | None = None,
                 _parents: tuple['Tensor', ...] = ()):
        self.data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise NonFinite(f'non-finite value in {name or "tensor"}')
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self):
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad})'

    def detach(self) -> 'Tensor':
        return Tensor(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise NotScalar(f'item() on shape {self.shape}')
        return float(self.data.reshape(()))

    # graph construction

    def _make(self, data, parents: tuple['Tensor', ...], backward) -> 'Tensor':
        needs = any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=needs, _parents=parents if needs else ())
        if needs:
            out._backward = backward
        return out

    @staticmethod
    def _lift(value) -> 'Tensor':
        return value if isinstance(value, Tensor) else Tensor(value)

    def _accumulate(self, grad: np.ndarray):
        if not self.requires_grad:
            return
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    # elementwise

    def __add__(self, other) -> 'Tensor':
        other = self._lift(other)
        try:
            data = self.data + other.data
        except ValueError as err:
            raise ShapeMismatch(str(err)) from err

        def backward(out_grad):
            self._accumulate(_unbroadcast(out_grad, self.shape))
            other._accumulate(_unbroadcast(out_grad, other.shape))
        return self._make(data, (self, other), backward)

    __radd__ = __add__

    def __neg__(self) -> 'Tensor':
        return self * -1.0

    def __sub__(self, other) -> 'Tensor':
        return self + (-self._lift(other))

    def __rsub__(self, other) -> 'Tensor':
        return self._lift(other) + (-self)

    def __mul__(self, other) -> 'Tensor':
        other = self._lift(other)
        try:
            data = self.data * other.data
        except ValueError as err:
            raise ShapeMismatch(str(err)) from err

        def backward(out_grad):
            self._accumulate(_unbroadcast(out_grad * other.data, self.shape))
            other._accumulate(_unbroadcast(out_grad * self.data, other.shape))
        return self._make(data, (self, other), backward)

    __rmul__ = __mul__

    def square(self) -> 'Tensor':
        def backward(out_grad):
            self._accumulate(2.0 * self.data * out_grad)
        return self._make(self.data ** 2, (self,), backward)

    def relu(self) -> 'Tensor':
        positive = self.data > 0

        def backward(out_grad):
            self._accumulate(out_grad * positive)
        return self._make(np.where(positive, self.data, 0.0), (self,), backward)

    def abs(self) -> 'Tensor':
        sign = np.sign(self.data)

        def backward(out_grad):
            self._accumulate(out_grad * sign)
        return self._make(np.abs(self.data), (self,), backward)

    # linear algebra

    def __matmul__(self, other) -> 'Tensor':
        other = self._lift(other)
        if self.data.ndim < 2 or other.data.ndim < 2 or self.shape[-1] != other.shape[-2]:
            raise ShapeMismatch(f'cannot multiply {self.shape} by {other.shape}')
        try:
            data = np.matmul(self.data, other.data)
        except ValueError as err:
            raise ShapeMismatch(str(err)) from err

        def backward(out_grad):
            self._accumulate(_unbroadcast(np.matmul(out_grad, np.swapaxes(other.data, -1, -2)), self.shape))
            other._accumulate(_unbroadcast(np.matmul(np.swapaxes(self.data, -1, -2), out_grad), other.shape))
        return self._make(data, (self, other), backward)

    # reductions and reshaping

    def sum(self, axis: int | None = None, keepdims: bool = False) -> 'Tensor':
        def backward(out_grad):
            grad = out_grad
            if axis is not None and not keepdims:
                grad = np.expand_dims(grad, axis)
            self._accumulate(np.broadcast_to(grad, self.shape).copy())
        return self._make(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward)

    def mean(self) -> 'Tensor':
        return self.sum() * (1.0 / self.data.size)

    def reshape(self, *shape) -> 'Tensor':
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        try:
            data = self.data.reshape(shape)
        except ValueError as err:
            raise ShapeMismatch(str(err)) from err

        def backward(out_grad):
            self._accumulate(out_grad.reshape(self.shape))
        return self._make(data, (self,), backward)

    def gather(self, index: np.ndarray) -> 'Tensor':
        """Pick ``data[..., index[...]]`` along the last axis."""
        index = np.asarray(index, dtype=np.int64)
        if index.shape != self.shape[:-1]:
            raise ShapeMismatch(f'index {index.shape} does not match {self.shape[:-1]}')
        picked = np.take_along_axis(self.data, index[..., None], axis=-1)[..., 0]

        def backward(out_grad):
            grad = np.zeros_like(self.data)
            np.put_along_axis(grad, index[..., None], out_grad[..., None], axis=-1)
            self._accumulate(grad)
        return self._make(picked, (self,), backward)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as err:
        raise ShapeMismatch(str(err)) from err
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(out_grad):
        for tensor, piece in zip(tensors, np.split(out_grad, sizes, axis=axis)):
            tensor._accumulate(piece)
    return tensors[0]._make(data, tuple(tensors), backward)


def _topological(root: Tensor) -> list[Tensor]:
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, params: Mapping[str, Tensor] | Iterable[Tensor] = ()) -> dict[str, np.ndarray]:
    """Back-propagate a scalar loss.

    Returns one gradient per named parameter; parameters the loss does not
    depend on get zeros.
    """
    if loss.data.size != 1:
        raise NotScalar(f'loss has shape {loss.shape}')
    named = dict(params) if isinstance(params, Mapping) else {str(i): p for i, p in enumerate(params)}
    for param in named.values():
        param.grad = None
    order = _topological(loss)
    # leaves reused across losses would otherwise keep their old gradient
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    grads = {}
    for name, param in named.items():
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        if not np.all(np.isfinite(grad)):
            raise NonFinite(f'non-finite gradient for {name}')
        grads[name] = grad
    return grads
