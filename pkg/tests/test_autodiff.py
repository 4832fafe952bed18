import numpy as np
import pytest

from dada.autodiff import (
    Tensor, check_gradients, clamp, finite_diff_grad, log, mean, no_grad, relu, safe_log, softmax_rows,
)
from dada.core.errors import BackwardError, DomainError, ShapeError


def test_softmax_equal_logits_is_uniform():
    out = softmax_rows(Tensor([[0.0, 0.0, 0.0]]))
    assert np.allclose(out.data, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-15)


def test_softmax_of_log_probabilities():
    out = softmax_rows(Tensor([[np.log(2.0), 0.0, 0.0]]))
    assert np.allclose(out.data, [[0.5, 0.25, 0.25]], atol=1e-15)


def test_softmax_rows_sum_to_one(rng):
    out = softmax_rows(Tensor(rng.normal(scale=3.0, size=(50, 6))))
    assert np.all(np.abs(out.data.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all((out.data > 0) & (out.data < 1))


def test_softmax_wide_logits_stay_in_unit_interval(rng):
    # float64 下 logit 跨度超过约 36 时最大概率会舍入为 1
    out = softmax_rows(Tensor(rng.normal(scale=20.0, size=(50, 6))))
    assert np.all(np.abs(out.data.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all((out.data >= 0) & (out.data <= 1))


def test_relu():
    assert relu(Tensor([-1.0, 0.0, 2.0])).data.tolist() == [0.0, 0.0, 2.0]


def test_backward_of_sum_is_ones():
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    x.sum().backward()
    assert x.grad.tolist() == [1.0, 1.0, 1.0]


def test_backward_of_square():
    x = Tensor([1.0, 2.0], requires_grad=True)
    (x * x).sum().backward()
    assert x.grad.tolist() == [2.0, 4.0]


def test_backward_through_softmax_matches_finite_differences(rng):
    x = Tensor(rng.normal(size=(3, 4)))

    def f(t):
        return mean(softmax_rows(t)[0] * Tensor([1.0, -2.0, 0.5, 3.0]))

    result = check_gradients(f, x, rtol=1e-5)
    assert result.passed, result


def test_backward_rejects_non_scalar_root():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(BackwardError):
        (x * 2.0).backward()


def test_backward_rejects_detached_graph():
    with pytest.raises(BackwardError):
        Tensor([1.0]).sum().backward()


def test_backward_rejects_second_call():
    x = Tensor([1.0, 2.0], requires_grad=True)
    root = (x * x).sum()
    root.backward()
    with pytest.raises(BackwardError):
        root.backward()


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError) as excinfo:
        Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))
    assert "(2, 3)" in excinfo.value.message


def test_log_of_non_positive_is_domain_error():
    with pytest.raises(DomainError):
        log(Tensor([0.5, 0.0]))


def test_safe_log_clamps_boundary():
    out = safe_log(Tensor([0.0, 1.0]), 1e-12)
    assert np.all(np.isfinite(out.data))


def test_clamp_blocks_gradient_outside_range():
    x = Tensor([-1.0, 0.5, 2.0], requires_grad=True)
    clamp(x, 0.0, 1.0).sum().backward()
    assert x.grad.tolist() == [0.0, 1.0, 0.0]


def test_finite_diff_linear():
    grad = finite_diff_grad(lambda t: t.sum(), Tensor([5.0]), h=1e-5)
    assert grad.data[0] == pytest.approx(1.0, abs=1e-8)


def test_finite_diff_square():
    grad = finite_diff_grad(lambda t: (t * t).sum(), Tensor([3.0]), h=1e-5)
    assert grad.data[0] == pytest.approx(6.0, abs=1e-6)


def test_finite_diff_rejects_non_positive_step():
    with pytest.raises(DomainError):
        finite_diff_grad(lambda t: t.sum(), Tensor([1.0]), h=0.0)


def test_no_grad_records_nothing():
    x = Tensor([1.0], requires_grad=True)
    with no_grad():
        y = x * 2.0
    assert y.is_leaf and not y.requires_grad


def test_repeated_graph_gives_identical_gradients(rng):
    data = rng.normal(size=(4, 3))
    grads = []
    for _ in range(2):
        x = Tensor(data, requires_grad=True)
        mean(safe_log(softmax_rows(x), 1e-12)).backward()
        grads.append(x.grad)
    assert np.array_equal(grads[0], grads[1])
