from .tensor import Tensor, Function, no_grad, is_grad_enabled
from .functions import (
    add, neg, elementwise_mul, divide, matmul, relu, log, exp,
    softmax_rows, sum, mean, clamp, take, safe_log,
)
from .gradcheck import finite_diff_grad, analytic_grad, check_gradients, GradCheckResult
