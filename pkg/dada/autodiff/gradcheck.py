from typing import Callable, NamedTuple, Union

import numpy as np

from ..core.config import settings
from ..core.errors import DomainError
from .tensor import Tensor, no_grad

ScalarFn = Callable[[Tensor], Union[Tensor, float]]


class GradCheckResult(NamedTuple):
    """梯度校验结果"""
    passed: bool
    max_abs_error: float
    max_rel_error: float


def _evaluate(f: ScalarFn, data: np.ndarray) -> float:
    with no_grad():
        value = f(Tensor(data))
    return value.item() if isinstance(value, Tensor) else float(value)


def finite_diff_grad(f: ScalarFn, x: Tensor, h: float = None) -> Tensor:
    """
    中心差分梯度 (f(x+h·e_i) - f(x-h·e_i)) / (2h)

    Args:
        f: 以张量为输入的确定性标量函数
        x: 求导位置
        h: 步长，默认取 settings.GRADCHECK_STEP

    Returns:
        Tensor: 与 x 同形状的数值梯度
    """
    step = settings.GRADCHECK_STEP if h is None else h
    if step <= 0:
        raise DomainError(f"finite_diff_grad: step size must be positive, got {step}")

    base = np.array(x.data, dtype=np.float64)
    grad = np.zeros_like(base)
    flat_base = base.reshape(-1)
    flat_grad = grad.reshape(-1)
    for i in range(flat_base.size):
        original = flat_base[i]
        flat_base[i] = original + step
        upper = _evaluate(f, base)
        flat_base[i] = original - step
        lower = _evaluate(f, base)
        flat_base[i] = original
        flat_grad[i] = (upper - lower) / (2.0 * step)
    return Tensor(grad)


def analytic_grad(f: ScalarFn, x: Tensor) -> np.ndarray:
    """通过反向传播得到 f 在 x 处的梯度"""
    leaf = Tensor(x.data, requires_grad=True)
    f(leaf).backward()
    return leaf.grad


def check_gradients(f: ScalarFn, x: Tensor, rtol: float = 1e-4, atol: float = 1e-7, h: float = None) -> GradCheckResult:
    """
    比较解析梯度与中心差分梯度

    满足 |a - n| <= atol + rtol * max(|a|, |n|) 即视为通过。
    """
    analytic = analytic_grad(f, x)
    numeric = finite_diff_grad(f, x, h=h).data
    abs_error = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    passed = bool(np.all(abs_error <= atol + rtol * scale))
    rel_error = np.where(scale > 0, abs_error / np.where(scale > 0, scale, 1.0), 0.0)
    return GradCheckResult(passed, float(np.max(abs_error, initial=0.0)), float(np.max(rel_error, initial=0.0)))
