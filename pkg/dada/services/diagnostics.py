"""
数值诊断

梯度与有限差分对比、源域梯度符号性质、单步更新方向、调度公式精确性、概率构造恒等式，
以及交替训练中条件失败率的起伏。每项检查返回 CheckResult。
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from ..autodiff import Tensor, check_gradients, no_grad
from ..core.logging import logger
from ..models.network import (
    domain_pred_vector, get_degenerate_events, predict_category, probabilities_from_logits,
)
from ..schemas.metrics import MetricsRecord, Phase
from . import losses
from .trainer import lambda_schedule, lr_schedule


@dataclass
class CheckResult:
    """单项检查结果"""
    name: str
    passed: bool
    detail: str
    metrics: Dict[str, float] = field(default_factory=dict)
    elapsed: float = 0.0


LogitLoss = Callable[[Tensor, int, np.ndarray, np.random.Generator], Callable[[Tensor], Tensor]]


def _split(logits: Tensor, K: int):
    """前半行作为源域，后半行作为目标域"""
    half = logits.shape[0] // 2
    return probabilities_from_logits(logits[:half], K), probabilities_from_logits(logits[half:], K)


def _gradcheck_losses() -> Dict[str, LogitLoss]:
    """以 logits 为自变量的各损失，形如 make(logits_template, K, labels, rng) -> f"""

    def source_dada(_, K, y, rng):
        return lambda o: losses.loss_source_dada(probabilities_from_logits(o, K), y)

    def source_dada_p(_, K, y, rng):
        c = rng.uniform(0.0, 1.0, size=K)
        return lambda o: losses.loss_source_dada_p(probabilities_from_logits(o, K), y, c)

    def cross_entropy(_, K, y, rng):
        return lambda o: losses.cross_entropy_bar(probabilities_from_logits(o, K), y)

    def cross_entropy_full(_, K, y, rng):
        return lambda o: losses.cross_entropy_full(probabilities_from_logits(o, K), y)

    def target_F(_, K, y, rng):
        return lambda o: losses.loss_target_F_dada(probabilities_from_logits(o, K))

    def target_G(_, K, y, rng):
        return lambda o: losses.loss_target_G_dada(probabilities_from_logits(o, K))

    def entropy(_, K, y, rng):
        return lambda o: losses.loss_entropy(probabilities_from_logits(o, K))

    def symmetric_dc(_, K, y, rng):
        return lambda o: losses.loss_symmetric_dc(probabilities_from_logits(o, K))

    def openset(_, K, y, rng):
        return lambda o: losses.loss_target_F_openset(probabilities_from_logits(o, K), 0.1)

    def dann_ca(part: str) -> LogitLoss:
        def make(logits, K, y, rng):
            half = logits.shape[0] // 2

            def f(o):
                p_s, p_t = _split(o, K)
                return getattr(losses.loss_dann_ca(p_s, y[:half], p_t, 0.7), part)
            return f
        return make

    return {
        "loss_source_dada": source_dada,
        "loss_source_dada_p": source_dada_p,
        "cross_entropy_bar": cross_entropy,
        "cross_entropy_full": cross_entropy_full,
        "loss_target_F_dada": target_F,
        "loss_target_G_dada": target_G,
        "loss_entropy": entropy,
        "loss_symmetric_dc": symmetric_dc,
        "loss_target_F_openset": openset,
        "loss_dann_ca.L_F": dann_ca("L_F"),
        "loss_dann_ca.L_G": dann_ca("L_G"),
    }


def gradient_check(draws: int = 100, seed: int = 0, batch: int = 4, rtol: float = 1e-4, atol: float = 1e-7) -> CheckResult:
    """
    每个损失在 draws 组随机 logits（K 取 3..6）上比较反向梯度与中心差分

    Returns:
        CheckResult: 全部通过才算通过，metrics 中给出各损失的最大相对误差
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst: Dict[str, float] = {}
    failures: List[str] = []
    for name, make in _gradcheck_losses().items():
        worst[name] = 0.0
        for draw in range(draws):
            K = int(rng.integers(3, 7))
            logits = Tensor(rng.normal(0.0, 1.5, size=(batch, K + 1)))
            y = rng.integers(1, K + 1, size=batch)
            result = check_gradients(make(logits, K, y, rng), logits, rtol=rtol, atol=atol)
            worst[name] = max(worst[name], result.max_rel_error)
            if not result.passed:
                failures.append(f"{name}#{draw}")
    passed = not failures
    detail = f"{len(worst)} losses x {draws} draws" if passed else f"failed: {', '.join(failures[:5])}"
    return CheckResult("gradient_check", passed, detail, worst, time.perf_counter() - started)


def sign_property(n_points: int = 10000, seed: int = 0, tolerance: float = 1e-9) -> CheckResult:
    """
    在单纯形内随机取点：∇_{p_y} 从不为正；|p_y - 0.5| > tolerance 时 sign(∇_{p_{K+1}}) = sign(p_y - 0.5)
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    points = rng.dirichlet(np.ones(3), size=n_points)
    p_y, p_K1 = points[:, 0], points[:, 1]
    grad_py, grad_pk1 = losses.source_prob_gradients(p_y, p_K1)
    first_ok = grad_py <= 0
    away = np.abs(p_y - 0.5) > tolerance
    second_ok = np.sign(grad_pk1[away]) == np.sign(p_y[away] - 0.5)
    passed = bool(np.all(first_ok) and np.all(second_ok))
    metrics = {
        "max_grad_py": float(np.max(grad_py)),
        "first_sign_violations": float(np.sum(~first_ok)),
        "second_sign_violations": float(np.sum(~second_ok)),
    }
    return CheckResult("sign_property", passed, f"{n_points} simplex points", metrics, time.perf_counter() - started)


def _condition_logits(rng: np.random.Generator, K: int, y: int) -> np.ndarray:
    """抽取满足 p_y > 0.5 的 logits"""
    logits = rng.normal(0.0, 1.0, size=K + 1)
    others = np.delete(logits, y - 1)
    margin = rng.uniform(0.1, 3.0)
    logits[y - 1] = np.log(np.sum(np.exp(others))) + margin
    return logits


def _probabilities(logits: np.ndarray, K: int) -> np.ndarray:
    with no_grad():
        return probabilities_from_logits(Tensor(logits[None, :]), K).p.data[0]


def step_dynamics(trials: int = 100, seed: int = 0, initial_step: float = 1e-2, max_halvings: int = 50) -> CheckResult:
    """
    源域判别对抗损失对 logits 的单步更新方向

    在 p_y > 0.5 的区域内，足够小的下降步使 p_y 增大且 p_{K+1} 减小，上升步相反；
    步长从 initial_step 起逐次减半直到方向全部成立。
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    successes = 0
    halvings_used = []
    for _ in range(trials):
        K = int(rng.integers(2, 6))
        y = int(rng.integers(1, K + 1))
        logits = _condition_logits(rng, K, y)
        leaf = Tensor(logits[None, :], requires_grad=True)
        losses.loss_source_dada(probabilities_from_logits(leaf, K), np.array([y])).backward()
        grad = leaf.grad[0]
        before = _probabilities(logits, K)

        step = initial_step
        for halving in range(max_halvings + 1):
            descent = _probabilities(logits - step * grad, K)
            ascent = _probabilities(logits + step * grad, K)
            if (descent[y - 1] > before[y - 1] and descent[K] < before[K]
                    and ascent[y - 1] < before[y - 1] and ascent[K] > before[K]):
                successes += 1
                halvings_used.append(halving)
                break
            step /= 2.0
    passed = successes == trials
    metrics = {"successes": float(successes), "max_halvings": float(max(halvings_used, default=0))}
    return CheckResult("step_dynamics", passed, f"{successes}/{trials} trials monotone", metrics, time.perf_counter() - started)


def schedule_exactness(points: int = 1000, eta0: float = 1e-4, alpha: float = 10.0, beta: float = 0.75, gamma: float = 10.0) -> CheckResult:
    """学习率与 λ 调度在 points 个采样点上与闭式解的差不超过 1e-12"""
    started = time.perf_counter()
    grid = np.linspace(0.0, 1.0, points)
    lr = np.array([lr_schedule(p, eta0, alpha, beta) for p in grid])
    lam = np.array([lambda_schedule(p, gamma) for p in grid])
    lr_error = float(np.max(np.abs(lr - eta0 * np.power(1.0 + alpha * grid, -beta))))
    # 2/(1+e^{-x}) - 1 = tanh(x/2)
    lam_error = float(np.max(np.abs(lam - np.tanh(gamma * grid / 2.0))))
    endpoints_ok = lr_schedule(0.0, eta0, alpha, beta) == eta0 and lambda_schedule(0.0, gamma) == 0.0
    passed = lr_error <= 1e-12 and lam_error <= 1e-12 and endpoints_ok
    metrics = {
        "lr_max_error": lr_error,
        "lambda_max_error": lam_error,
        "lr_at_1": lr_schedule(1.0, eta0, alpha, beta),
        "lambda_at_1": lambda_schedule(1.0, gamma),
    }
    return CheckResult("schedule_exactness", passed, f"{points} points", metrics, time.perf_counter() - started)


def identity_audit(draws: int = 100, seed: int = 0, batch: int = 8, tolerance: float = 1e-9) -> CheckResult:
    """条件概率向量、领域预测向量与预测规则的恒等式"""
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_bar = worst_hat = 0.0
    argmax_ok = True
    for _ in range(draws):
        K = int(rng.integers(2, 7))
        with no_grad():
            p = probabilities_from_logits(Tensor(rng.normal(0.0, 2.0, size=(batch, K + 1))), K)
            probs, p_bar = p.p.data, p.p_bar.data
            worst_bar = max(worst_bar, float(np.max(np.abs(p_bar[:, :K] * (1.0 - probs[:, K:]) - probs[:, :K]))))
            worst_bar = max(worst_bar, float(np.max(np.abs(p_bar.sum(axis=1) - 1.0))))
            for k in range(1, K + 1):
                hat = domain_pred_vector(p, k).data
                pair = probs[:, k - 1] + probs[:, K]
                expected = np.zeros_like(probs)
                expected[:, k - 1] = probs[:, k - 1] / pair
                expected[:, K] = probs[:, K] / pair
                worst_hat = max(worst_hat, float(np.max(np.abs(hat - expected))))
        argmax_ok &= bool(np.array_equal(predict_category(p), np.argmax(probs[:, :K], axis=1) + 1))
    passed = worst_bar <= tolerance and worst_hat <= tolerance and argmax_ok
    metrics = {"conditional_max_error": worst_bar, "domain_pred_max_error": worst_hat}
    return CheckResult("identity_audit", passed, f"{draws} draws", metrics, time.perf_counter() - started)


def alternation_dynamics(history: Sequence[MetricsRecord], required_fraction: float = 0.8, final_rate: float = 0.1) -> CheckResult:
    """
    交替训练中的条件失败率：每个分类阶段结束时的失败率不高于前一个对抗阶段结束时的失败率
    （至少 required_fraction 的交替满足），且最后一个epoch的失败率低于 final_rate
    """
    started = time.perf_counter()
    rates = [(record.phase, record.value) for record in history if record.name == "cond_fail_rate"]
    phase_ends = []
    for index, (phase, value) in enumerate(rates):
        if index + 1 == len(rates) or rates[index + 1][0] != phase:
            phase_ends.append((phase, value))
    comparisons = [
        current <= previous
        for (previous_phase, previous), (phase, current) in zip(phase_ends, phase_ends[1:])
        if previous_phase == Phase.ADV and phase == Phase.CLS
    ]
    if not comparisons or not rates:
        return CheckResult("alternation_dynamics", False, "no adversarial→classification transitions in history")
    fraction = sum(comparisons) / len(comparisons)
    last = rates[-1][1]
    passed = fraction >= required_fraction and last < final_rate
    metrics = {"fraction": fraction, "transitions": float(len(comparisons)), "final_rate": last}
    return CheckResult("alternation_dynamics", passed, f"{sum(comparisons)}/{len(comparisons)} transitions", metrics, time.perf_counter() - started)


def run_all(seed: int = 0, draws: int = 100, n_points: int = 10000, trials: int = 100, points: int = 1000) -> List[CheckResult]:
    """运行全部与训练无关的检查"""
    checks = [
        lambda: gradient_check(draws=draws, seed=seed),
        lambda: sign_property(n_points=n_points, seed=seed),
        lambda: step_dynamics(trials=trials, seed=seed),
        lambda: schedule_exactness(points=points),
        lambda: identity_audit(draws=draws, seed=seed),
    ]
    results = []
    for check in checks:
        result = check()
        logger.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'} ({result.detail}, {result.elapsed:.2f}s)")
        results.append(result)
    degenerate = get_degenerate_events()
    results.append(CheckResult(
        "degenerate_denominators", True,
        f"{sum(degenerate.values())} clamped denominators",
        {name: float(count) for name, count in degenerate.items()},
    ))
    return results
