"""
前向运算：矩阵乘、加法、ReLU、对数、指数、按行softmax、求和、均值、逐元素乘、截断

每个运算都在计算图上记录反向闭包；广播只支持标量、偏置行 (1, k) 与列 (n, 1) 这类模式。
"""

from typing import Any, Optional, Sequence

import numpy as np

from ..core.errors import DomainError, ShapeError
from .tensor import Function, Tensor


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """把广播后的梯度规约回原始形状"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op: str, left: np.ndarray, right: np.ndarray) -> None:
    if left.ndim > 2 or right.ndim > 2:
        raise ShapeError(op, left.shape, right.shape)
    try:
        np.broadcast_shapes(left.shape, right.shape)
    except ValueError:
        raise ShapeError(op, left.shape, right.shape) from None


class Add(Function):
    def forward(self, x, y):
        _check_broadcast("add", x, y)
        self.save_for_backward(x.shape, y.shape)
        return x + y

    def backward(self, grad_output):
        shape_x, shape_y = self.saved
        return _unbroadcast(grad_output, shape_x), _unbroadcast(grad_output, shape_y)


class Neg(Function):
    def forward(self, x):
        return -x

    def backward(self, grad_output):
        return (-grad_output,)


class Mul(Function):
    def forward(self, x, y):
        _check_broadcast("elementwise_mul", x, y)
        self.save_for_backward(x, y)
        return x * y

    def backward(self, grad_output):
        x, y = self.saved
        return _unbroadcast(grad_output * y, x.shape), _unbroadcast(grad_output * x, y.shape)


class Div(Function):
    def forward(self, x, y):
        _check_broadcast("divide", x, y)
        if np.any(y == 0.0):
            raise DomainError("divide: zero denominator; clamp the denominator first")
        self.save_for_backward(x, y)
        return x / y

    def backward(self, grad_output):
        x, y = self.saved
        grad_x = grad_output / y
        grad_y = -grad_output * x / (y * y)
        return _unbroadcast(grad_x, x.shape), _unbroadcast(grad_y, y.shape)


class MatMul(Function):
    def forward(self, x, w):
        if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
            raise ShapeError("matmul", x.shape, w.shape)
        self.save_for_backward(x, w)
        return x @ w

    def backward(self, grad_output):
        x, w = self.saved
        return grad_output @ w.T, x.T @ grad_output


class ReLU(Function):
    def forward(self, x):
        mask = x > 0
        self.save_for_backward(mask)
        return np.where(mask, x, 0.0)

    def backward(self, grad_output):
        (mask,) = self.saved
        return (grad_output * mask,)


class Log(Function):
    def forward(self, x):
        if np.any(x <= 0.0):
            raise DomainError(
                "log: non-positive input; clamp probabilities before taking the log",
                details={"min": float(np.min(x))},
            )
        self.save_for_backward(x)
        return np.log(x)

    def backward(self, grad_output):
        (x,) = self.saved
        return (grad_output / x,)


class Exp(Function):
    def forward(self, x):
        out = np.exp(x)
        self.save_for_backward(out)
        return out

    def backward(self, grad_output):
        (out,) = self.saved
        return (grad_output * out,)


class SoftmaxRows(Function):
    def forward(self, x):
        if x.ndim not in (1, 2):
            raise ShapeError("softmax_rows", x.shape, ("rows", "columns"))
        shifted = x - np.max(x, axis=-1, keepdims=True)
        exps = np.exp(shifted)
        out = exps / np.sum(exps, axis=-1, keepdims=True)
        self.save_for_backward(out)
        return out

    def backward(self, grad_output):
        (out,) = self.saved
        inner = np.sum(grad_output * out, axis=-1, keepdims=True)
        return (out * (grad_output - inner),)


class Sum(Function):
    def forward(self, x):
        axis = self.kwargs.get("axis")
        keepdims = self.kwargs.get("keepdims", False)
        self.save_for_backward(x.shape)
        return np.sum(x, axis=axis, keepdims=keepdims)

    def backward(self, grad_output):
        (shape,) = self.saved
        axis = self.kwargs.get("axis")
        if axis is not None and not self.kwargs.get("keepdims", False):
            grad_output = np.expand_dims(grad_output, axis)
        return (np.broadcast_to(grad_output, shape).copy(),)


class Mean(Function):
    def forward(self, x):
        axis = self.kwargs.get("axis")
        keepdims = self.kwargs.get("keepdims", False)
        count = x.size if axis is None else x.shape[axis]
        if count == 0:
            raise ShapeError("mean", x.shape, ("non-empty",))
        self.save_for_backward(x.shape, count)
        return np.mean(x, axis=axis, keepdims=keepdims)

    def backward(self, grad_output):
        shape, count = self.saved
        axis = self.kwargs.get("axis")
        if axis is not None and not self.kwargs.get("keepdims", False):
            grad_output = np.expand_dims(grad_output, axis)
        return (np.broadcast_to(grad_output / count, shape).copy(),)


class Clamp(Function):
    def forward(self, x):
        low = self.kwargs["low"]
        high = self.kwargs["high"]
        if low > high:
            raise DomainError(f"clamp: low bound {low} exceeds high bound {high}")
        self.save_for_backward((x >= low) & (x <= high))
        return np.clip(x, low, high)

    def backward(self, grad_output):
        (inside,) = self.saved
        return (grad_output * inside,)


class Take(Function):
    def forward(self, x):
        index = self.kwargs["index"]
        self.save_for_backward(x.shape)
        try:
            return np.array(x[index], dtype=np.float64)
        except IndexError as exc:
            raise ShapeError("take", x.shape, (str(index),)) from exc

    def backward(self, grad_output):
        (shape,) = self.saved
        grad = np.zeros(shape)
        np.add.at(grad, self.kwargs["index"], grad_output)
        return (grad,)


def add(x: Any, y: Any) -> Tensor:
    return Add.apply(x, y)


def neg(x: Any) -> Tensor:
    return Neg.apply(x)


def elementwise_mul(x: Any, y: Any) -> Tensor:
    return Mul.apply(x, y)


def divide(x: Any, y: Any) -> Tensor:
    return Div.apply(x, y)


def matmul(x: Any, w: Any) -> Tensor:
    return MatMul.apply(x, w)


def relu(x: Any) -> Tensor:
    return ReLU.apply(x)


def log(x: Any) -> Tensor:
    return Log.apply(x)


def exp(x: Any) -> Tensor:
    return Exp.apply(x)


def softmax_rows(x: Any) -> Tensor:
    return SoftmaxRows.apply(x)


def sum(x: Any, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x: Any, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    return Mean.apply(x, axis=axis, keepdims=keepdims)


def clamp(x: Any, low: float, high: float) -> Tensor:
    return Clamp.apply(x, low=low, high=high)


def take(x: Any, index: Any) -> Tensor:
    return Take.apply(x, index=index)


def safe_log(x: Any, eps: float) -> Tensor:
    """log(clamp(x, eps, 1-eps))，用于概率的对数"""
    return log(clamp(x, eps, 1.0 - eps))


__all__: Sequence[str] = [
    "add", "neg", "elementwise_mul", "divide", "matmul", "relu", "log", "exp",
    "softmax_rows", "sum", "mean", "clamp", "take", "safe_log",
]
