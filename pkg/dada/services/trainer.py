"""
训练引擎

预训练 → N_alter 轮（[T_cls 个分类epoch] + T_adv 个对抗epoch）。
对抗步中 F 参数沿 L_F 下降、G 参数沿 L_G 上升：一次前向，两次反向。
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit
from tqdm import tqdm

from ..autodiff import Tensor, no_grad
from ..core.errors import ValidationError
from ..core.logging import logger, progress_enabled
from ..datagen import DatasetPair, Scenario, TrainingView
from ..models.network import DadaNetwork, forward, init_network, predict_category
from ..schemas.config import LambdaMode, ProgressScope, SupervisionSignal, TrainConfig
from ..schemas.metrics import MetricsRecord, Phase, component_metric_name
from .evaluation import TargetMonitor, accuracy
from .losses import CategoryWeights, category_weights, supervision_loss
from .objectives import ObjectiveInputs, TrainingObjective, get_objective
from .optim import SGD

# 每个epoch固定记录的指标（不含目标域指标与损失分量）
BASE_EPOCH_METRICS = ("acc_source", "cond_fail_rate")


def lr_schedule(progress: float, eta0: float = 1e-4, alpha: float = 10.0, beta: float = 0.75) -> float:
    """η_p = η0 / (1 + α·p)^β"""
    if not 0.0 <= progress <= 1.0:
        raise ValidationError(f"progress must lie in [0, 1], got {progress}")
    return eta0 / (1.0 + alpha * progress) ** beta


def lambda_schedule(progress: float, gamma: float = 10.0) -> float:
    """λ_p = 2 / (1 + exp(-γ·p)) - 1"""
    if not 0.0 <= progress <= 1.0:
        raise ValidationError(f"progress must lie in [0, 1], got {progress}")
    return float(2.0 * expit(gamma * progress) - 1.0)


@dataclass
class TrainState:
    """训练状态"""
    net: DadaNetwork
    optimizer: SGD
    rng: np.random.Generator
    steps_per_epoch: int
    progress_total: int
    step: int = 0
    progress_step: int = 0
    epoch: int = 0
    history: List[MetricsRecord] = field(default_factory=list)
    schedule_trace: List[Tuple[int, float, float]] = field(default_factory=list)
    category_weights: Optional[CategoryWeights] = None

    @property
    def progress(self) -> float:
        """归一化迭代进度 p ∈ [0, 1]"""
        if self.progress_total == 0:
            return 0.0
        return min(1.0, self.progress_step / self.progress_total)

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state


def metrics_per_epoch(config: TrainConfig, scenario: Scenario) -> int:
    """每个记录epoch写入的指标条数"""
    objective = get_objective(config.objective)
    target = 5 if scenario == Scenario.OPEN else 2
    return len(BASE_EPOCH_METRICS) + target + len(objective.logged_components)


def steps_per_epoch(n_source: int, batch_size: int) -> int:
    return max(1, math.ceil(n_source / batch_size))


def progress_total_steps(config: TrainConfig, n_source: int) -> int:
    """进度分母：默认只统计对抗步"""
    epochs = config.total_adversarial_epochs()
    if config.progress_scope == ProgressScope.ALL:
        epochs = config.total_epochs()
    return epochs * steps_per_epoch(n_source, config.batch_size)


def current_lambda(state: TrainState, config: TrainConfig) -> float:
    if config.lambda_mode == LambdaMode.FIXED:
        return config.lambda_fixed
    return lambda_schedule(state.progress, config.gamma)


def current_lr(state: TrainState, config: TrainConfig) -> float:
    return lr_schedule(state.progress, config.eta0, config.alpha, config.beta)


def condition_failure_rate(net: DadaNetwork, source_x: np.ndarray, source_y: np.ndarray, threshold: float = 0.5) -> float:
    """源域实例中真实类别概率 p_y ≤ threshold 的比例"""
    with no_grad():
        p = forward(net, source_x)
    labels = np.asarray(source_y, dtype=np.int64)
    p_y = p.p.data[np.arange(len(labels)), labels - 1]
    return float(np.mean(p_y <= threshold))


def iterate_batches(rng: np.random.Generator, n_source: int, n_target: int, batch_size: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    一个epoch的批次索引

    以源域为准划分 ceil(n_s / batch_size) 个批次；目标域按自己的随机排列循环取同样数量的实例。
    """
    source_order = rng.permutation(n_source)
    target_order = rng.permutation(n_target)
    batches = []
    for start in range(0, n_source, batch_size):
        source_index = source_order[start:start + batch_size]
        target_index = np.take(target_order, np.arange(start, start + len(source_index)), mode="wrap")
        batches.append((source_index, target_index))
    return batches


def init_state(config: TrainConfig, view: TrainingView, K: int) -> TrainState:
    """按配置种子初始化网络、优化器与随机数发生器"""
    init_sequence, batch_sequence = np.random.SeedSequence(config.seed).spawn(2)
    net = init_network([view.source_x.shape[1]] + list(config.hidden_dims), K, seed=int(init_sequence.generate_state(1)[0]))
    return TrainState(
        net=net,
        optimizer=SGD(net.parameters(), momentum=config.momentum, weight_decay=config.weight_decay),
        rng=np.random.default_rng(batch_sequence),
        steps_per_epoch=steps_per_epoch(len(view.source_x), config.batch_size),
        progress_total=progress_total_steps(config, len(view.source_x)),
    )


def _gradients(root: Tensor, params: List[Tensor]) -> List[Optional[np.ndarray]]:
    for param in params:
        param.zero_grad()
    root.backward()
    grads = [None if param.grad is None else param.grad.copy() for param in params]
    for param in params:
        param.zero_grad()
    return grads


def _advance(state: TrainState, config: TrainConfig, counts_progress: bool) -> None:
    state.step += 1
    if counts_progress:
        state.progress_step += 1


def supervised_step(
    state: TrainState, x: np.ndarray, y: np.ndarray, lr: float, signal: SupervisionSignal = SupervisionSignal.FULL,
) -> float:
    """G、F 一同在源域监督交叉熵上做一次下降"""
    params = state.net.parameters()
    loss = supervision_loss(forward(state.net, x), y, signal)
    state.optimizer.step(params, _gradients(loss, params), lr)
    return loss.item()


def adversarial_step(
    state: TrainState,
    batch_s: Tuple[np.ndarray, np.ndarray],
    batch_t: Optional[np.ndarray],
    config: TrainConfig,
    objective: Optional[TrainingObjective] = None,
) -> TrainState:
    """
    一次极小极大更新

    Args:
        state: 训练状态
        batch_s: (源域特征, 源域标签)
        batch_t: 目标域特征；为空时只用源域项
        config: 训练配置
        objective: 训练目标，默认按配置获取

    Returns:
        TrainState: 原地更新后的状态
    """
    objective = objective or get_objective(config.objective)
    lam = current_lambda(state, config)
    lr = current_lr(state, config)
    x_s, y_s = batch_s

    p_s = forward(state.net, x_s)
    p_t = forward(state.net, batch_t) if batch_t is not None else None
    weights = state.category_weights
    if objective.uses_category_weights and weights is None:
        weights = CategoryWeights.uniform(state.net.K)
    bundle = objective.assemble(ObjectiveInputs(
        p_s=p_s, y_s=y_s, p_t=p_t, lam=lam,
        placement=config.lambda_placement, weights=weights, q=config.q, supervision=config.supervision,
    ))

    F_params, G_params = state.net.F_parameters(), state.net.G_parameters()
    L_F = bundle.L_F
    supervision = None
    if config.keep_supervision and objective.adversarial and not objective.self_supervised:
        supervision = supervision_loss(p_s, y_s, config.supervision)
        L_F = L_F + supervision

    if objective.adversarial:
        # G 沿 L_G 上升，等价于沿 -L_G 下降
        G_descent = -bundle.L_G
        if supervision is not None and config.supervise_features:
            G_descent = G_descent + supervision
        F_grads = _gradients(L_F, F_params)
        G_grads = _gradients(G_descent, G_params)
    else:
        grads = _gradients(L_F, F_params + G_params)
        F_grads, G_grads = grads[:len(F_params)], grads[len(F_params):]

    state.net.zero_grad()
    state.optimizer.step(F_params, F_grads, lr)
    state.optimizer.step(G_params, G_grads, lr)
    state.schedule_trace.append((state.step, lam, lr))
    _advance(state, config, counts_progress=True)
    return state


def refresh_category_weights(state: TrainState, view: TrainingView, config: TrainConfig) -> CategoryWeights:
    """在全部目标域数据上重新计算类别权重"""
    lam = config.category_lambda if config.category_lambda is not None else current_lambda(state, config)
    with no_grad():
        p_t = forward(state.net, view.target_x)
    state.category_weights = category_weights(p_t.p_bar.data[:, :state.net.K], min(1.0, lam))
    return state.category_weights


def _loss_components(state: TrainState, view: TrainingView, config: TrainConfig, objective: TrainingObjective) -> Dict[str, float]:
    with no_grad():
        p_s = forward(state.net, view.source_x)
        p_t = forward(state.net, view.target_x)
        weights = state.category_weights
        if objective.uses_category_weights and weights is None:
            weights = CategoryWeights.uniform(state.net.K)
        bundle = objective.assemble(ObjectiveInputs(
            p_s=p_s, y_s=view.source_y, p_t=p_t, lam=current_lambda(state, config),
            placement=config.lambda_placement, weights=weights, q=config.q, supervision=config.supervision,
        ))
    values = bundle.values()
    return {name: values[name] for name in objective.logged_components}


def record_epoch(
    state: TrainState,
    phase: Phase,
    view: TrainingView,
    config: TrainConfig,
    objective: TrainingObjective,
    monitor: Optional[TargetMonitor],
) -> List[MetricsRecord]:
    """在整批数据上计算一个epoch的指标并写入历史"""
    with no_grad():
        p_s = forward(state.net, view.source_x)
    values = {
        "acc_source": accuracy(predict_category(p_s), view.source_y),
        "cond_fail_rate": condition_failure_rate(state.net, view.source_x, view.source_y, config.condition_threshold),
    }
    if monitor is not None:
        values.update(monitor(state.net))
    for name, value in _loss_components(state, view, config, objective).items():
        values[component_metric_name(name)] = value

    records = [
        MetricsRecord(step=state.step, epoch=state.epoch, phase=phase, name=name, value=float(value))
        for name, value in values.items()
    ]
    state.history.extend(records)
    logger.debug(
        f"epoch {state.epoch} [{phase.value}] "
        + ", ".join(f"{name}={value:.4f}" for name, value in values.items())
    )
    return records


def _progress_bar(total: int, description: str):
    return tqdm(total=total, desc=description, unit="epoch", disable=not progress_enabled(), leave=False)


def _run_supervised_epoch(state: TrainState, view: TrainingView, config: TrainConfig, phase: Phase) -> None:
    counts_progress = config.progress_scope == ProgressScope.ALL
    for source_index, _ in iterate_batches(state.rng, len(view.source_x), len(view.target_x), config.batch_size):
        if phase == Phase.PRETRAIN:
            lr = config.effective_pretrain_lr
        else:
            lr = current_lr(state, config)
        supervised_step(state, view.source_x[source_index], view.source_y[source_index], lr, config.supervision)
        _advance(state, config, counts_progress)


def _run_adversarial_epoch(state: TrainState, view: TrainingView, config: TrainConfig, objective: TrainingObjective) -> None:
    if objective.uses_category_weights:
        if config.adv_use_target:
            refresh_category_weights(state, view, config)
        else:
            state.category_weights = CategoryWeights.uniform(state.net.K)
    for source_index, target_index in iterate_batches(state.rng, len(view.source_x), len(view.target_x), config.batch_size):
        batch_t = view.target_x[target_index] if config.adv_use_target else None
        adversarial_step(state, (view.source_x[source_index], view.source_y[source_index]), batch_t, config, objective)


def _finish_epoch(
    state: TrainState,
    phase: Phase,
    view: TrainingView,
    config: TrainConfig,
    objective: TrainingObjective,
    monitor: Optional[TargetMonitor],
) -> None:
    state.epoch += 1
    if state.epoch % config.eval_every == 0:
        record_epoch(state, phase, view, config, objective, monitor)


def pretrain_source(
    state: TrainState,
    view: TrainingView,
    config: TrainConfig,
    objective: Optional[TrainingObjective] = None,
    monitor: Optional[TargetMonitor] = None,
) -> TrainState:
    """在有标签的源域上用源域监督交叉熵（见 supervision）预训练 pretrain_epochs 个epoch"""
    objective = objective or get_objective(config.objective)
    with _progress_bar(config.pretrain_epochs, "pretrain") as bar:
        for _ in range(config.pretrain_epochs):
            _run_supervised_epoch(state, view, config, Phase.PRETRAIN)
            _finish_epoch(state, Phase.PRETRAIN, view, config, objective, monitor)
            bar.update(1)
    return state


def train_view(
    config: TrainConfig,
    view: TrainingView,
    monitor: Optional[TargetMonitor] = None,
) -> TrainState:
    """
    在训练视图上运行完整训练流程

    Raises:
        ValidationError: 数据场景与训练目标不匹配
    """
    objective = get_objective(config.objective)
    objective.check_scenario(view.scenario)
    K = objective.output_categories(view.K_source, view.scenario)
    state = init_state(config, view, K)
    logger.info(
        f"开始训练: objective={objective.name}, scenario={view.scenario.value}, K={K}, "
        f"source={len(view.source_x)}, target={len(view.target_x)}, seed={config.seed}"
    )

    pretrain_source(state, view, config, objective, monitor)
    with _progress_bar(config.total_classification_epochs() + config.total_adversarial_epochs(), objective.name) as bar:
        for alternation in range(config.N_alter):
            if config.alternation:
                for _ in range(config.T_cls):
                    _run_supervised_epoch(state, view, config, Phase.CLS)
                    _finish_epoch(state, Phase.CLS, view, config, objective, monitor)
                    bar.update(1)
            for _ in range(config.T_adv):
                _run_adversarial_epoch(state, view, config, objective)
                _finish_epoch(state, Phase.ADV, view, config, objective, monitor)
                bar.update(1)
            logger.debug(f"第 {alternation + 1}/{config.N_alter} 轮交替完成, step={state.step}")
    logger.info(f"训练完成: step={state.step}, epoch={state.epoch}")
    return state


def train(config: TrainConfig, data: DatasetPair) -> Tuple[TrainState, List[MetricsRecord]]:
    """
    训练入口：把数据拆成训练视图（无目标域标签）与评估通道

    Returns:
        Tuple[TrainState, List[MetricsRecord]]: 最终状态与指标历史
    """
    state = train_view(config, data.training_view(), TargetMonitor(data.evaluation_view()))
    return state, state.history
