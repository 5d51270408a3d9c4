"""Reverse-mode differentiable tensor.

A Tensor wraps a float64 ndarray. Ops record their parents and a backward
closure only while gradient recording is enabled for the current thread and
at least one input requires grad. Leaf tensors (created by the user or a
Parameter) accumulate into ``.grad``; intermediate gradients are kept in a
per-call table so that calling ``backward`` twice exactly doubles leaf
gradients.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from common.errors import ArgumentError, DimensionError, NumericalError

ArrayLike = Union[np.ndarray, float, int, Sequence]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_grad_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_grad_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread."""
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


def _check_finite(values: np.ndarray, op: str) -> None:
    if not np.isfinite(values).all():
        raise NumericalError(f"{op} produced non-finite values")


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """Dense float64 array with optional gradient accumulation."""

    def __init__(self, values: ArrayLike, requires_grad: bool = False):
        data = np.array(values, dtype=np.float64)
        self.values: np.ndarray = data
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = np.zeros_like(data) if requires_grad else None
        self._parents: Tuple[Tensor, ...] = ()
        self._backward_fn: Optional[BackwardFn] = None

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def _from_op(
        cls,
        values: np.ndarray,
        parents: Tuple["Tensor", ...],
        backward_fn: BackwardFn,
        op: str,
    ) -> "Tensor":
        _check_finite(values, op)
        out = cls.__new__(cls)
        out.values = values
        out.grad = None
        out._parents = ()
        out._backward_fn = None
        track = is_grad_enabled() and any(p.requires_grad for p in parents)
        out.requires_grad = track
        if track:
            out._parents = parents
            out._backward_fn = backward_fn
        return out

    @staticmethod
    def lift(value: Union["Tensor", ArrayLike]) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    def numpy(self) -> np.ndarray:
        return self.values

    def item(self) -> float:
        if self.values.size != 1:
            raise DimensionError(f"item() needs a single value, got shape {self.shape}")
        return float(self.values.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.values.copy())

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # ------------------------------------------------------------------
    # Reverse pass
    # ------------------------------------------------------------------

    def backward(self) -> None:
        """Populate ``.grad`` of every reachable leaf that requires grad."""
        if self.values.size != 1:
            raise ArgumentError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise ArgumentError("backward() on a tensor that is not part of a tracked graph")

        order = _topological_order(self)
        pending = {id(self): np.ones_like(self.values)}
        for node in reversed(order):
            upstream = pending.pop(id(node), None)
            if upstream is None:
                continue
            if node._backward_fn is None:
                if node.grad is None:
                    node.grad = np.zeros_like(node.values)
                node.grad += upstream
                continue
            for parent, grad in zip(node._parents, node._backward_fn(upstream)):
                if grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = pending[key] + grad if key in pending else grad

    # ------------------------------------------------------------------
    # Elementwise arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = Tensor.lift(other)
        a_shape, b_shape = self.shape, other.shape

        def backward(g: np.ndarray):
            return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

        return Tensor._from_op(self.values + other.values, (self, other), backward, "add")

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor._from_op(-self.values, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        return self + (-Tensor.lift(other))

    def __rsub__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        return Tensor.lift(other) + (-self)

    def __mul__(self, other: Union["Tensor", ArrayLike]) -> "Tensor":
        other = Tensor.lift(other)
        a, b = self.values, other.values

        def backward(g: np.ndarray):
            return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)

        return Tensor._from_op(a * b, (self, other), backward, "mul")

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "Tensor":
        if isinstance(scalar, Tensor):
            raise ArgumentError("division is only defined by a constant scalar")
        return self * (1.0 / float(scalar))

    def abs(self) -> "Tensor":
        sign = np.sign(self.values)
        return Tensor._from_op(np.abs(self.values), (self,), lambda g: (g * sign,), "abs")

    # ------------------------------------------------------------------
    # Reductions
    # ------------------------------------------------------------------

    def sum(self) -> "Tensor":
        shape = self.shape
        return Tensor._from_op(
            np.asarray(self.values.sum()),
            (self,),
            lambda g: (np.broadcast_to(g, shape).copy(),),
            "sum",
        )

    def mean(self) -> "Tensor":
        return self.sum() * (1.0 / max(self.size, 1))

    def max(self, axis: int) -> "Tensor":
        """Max along ``axis``; gradient routes to the first maximal index."""
        axis = axis % self.ndim
        idx = np.expand_dims(np.argmax(self.values, axis=axis), axis)
        out = np.take_along_axis(self.values, idx, axis=axis).squeeze(axis)
        shape = self.shape

        def backward(g: np.ndarray):
            full = np.zeros(shape)
            np.put_along_axis(full, idx, np.expand_dims(g, axis), axis=axis)
            return (full,)

        return Tensor._from_op(out, (self,), backward, "max")

    # ------------------------------------------------------------------
    # Structural ops
    # ------------------------------------------------------------------

    def reshape(self, *shape: int) -> "Tensor":
        original = self.shape
        return Tensor._from_op(
            self.values.reshape(*shape),
            (self,),
            lambda g: (g.reshape(original),),
            "reshape",
        )

    def __getitem__(self, index) -> "Tensor":
        shape = self.shape

        def backward(g: np.ndarray):
            full = np.zeros(shape)
            np.add.at(full, index, g)
            return (full,)

        return Tensor._from_op(np.array(self.values[index]), (self,), backward, "getitem")

    def take_rows(self, indices: np.ndarray) -> "Tensor":
        """Gather rows along axis 0; output shape is ``indices.shape + shape[1:]``."""
        indices = np.asarray(indices, dtype=np.intp)
        if indices.size and (indices.min() < 0 or indices.max() >= self.shape[0]):
            raise DimensionError(f"row index out of range for {self.shape[0]} rows")
        shape = self.shape

        def backward(g: np.ndarray):
            full = np.zeros(shape)
            np.add.at(full, indices, g)
            return (full,)

        return Tensor._from_op(self.values[indices], (self,), backward, "take_rows")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate along ``axis``."""
    if not tensors:
        raise ArgumentError("concat needs at least one tensor")
    tensors = tuple(Tensor.lift(t) for t in tensors)
    ndim = tensors[0].ndim
    axis = axis % ndim
    for t in tensors:
        if t.ndim != ndim or any(
            t.shape[d] != tensors[0].shape[d] for d in range(ndim) if d != axis
        ):
            raise DimensionError(
                f"concat shape mismatch: {[t.shape for t in tensors]} along axis {axis}"
            )
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum(sizes)[:-1]

    def backward(g: np.ndarray):
        return tuple(np.split(g, offsets, axis=axis))

    values = np.concatenate([t.values for t in tensors], axis=axis)
    return Tensor._from_op(values, tensors, backward, "concat")


def _topological_order(root: Tensor) -> list:
    order: list = []
    visited: set = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


class Parameter(Tensor):
    """A learned tensor; gradient tracking is always on."""

    def __init__(self, values: ArrayLike, name: str = ""):
        super().__init__(values, requires_grad=True)
        self.name = name

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape})"
