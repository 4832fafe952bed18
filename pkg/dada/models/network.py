"""
特征提取器 G 与 (K+1) 路一体化类别/领域分类器 F

输出的前 K 个神经元对应任务类别，第 K+1 个神经元是领域（目标域）神经元。
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..autodiff import Tensor, clamp, matmul, relu, softmax_rows
from ..core.config import settings
from ..core.errors import ShapeError, ValidationError
from ..core.logging import logger

Layer = Tuple[Tensor, Tensor]

# 分母退化（低于截断阈值）事件计数，供诊断报告使用
_degenerate_events: Counter = Counter()


def get_degenerate_events() -> Dict[str, int]:
    """获取分母退化事件计数"""
    return dict(_degenerate_events)


def reset_degenerate_events() -> None:
    _degenerate_events.clear()


@dataclass
class DadaNetwork:
    """特征提取器 G（ReLU 多层感知机）加一体化分类器 F（仿射映射到 K+1 个logit）"""
    G_layers: List[Layer]
    F_layer: Layer
    K: int

    @property
    def input_dim(self) -> int:
        if self.G_layers:
            return int(self.G_layers[0][0].shape[0])
        return int(self.F_layer[0].shape[0])

    @property
    def dims(self) -> List[int]:
        return [self.input_dim] + [int(weight.shape[1]) for weight, _ in self.G_layers]

    def G_parameters(self) -> List[Tensor]:
        return [tensor for layer in self.G_layers for tensor in layer]

    def F_parameters(self) -> List[Tensor]:
        return list(self.F_layer)

    def parameters(self) -> List[Tensor]:
        return self.G_parameters() + self.F_parameters()

    def named_parameters(self) -> Dict[str, Tensor]:
        named = {}
        for index, (weight, bias) in enumerate(self.G_layers):
            named[f"G.{index}.weight"] = weight
            named[f"G.{index}.bias"] = bias
        named["F.weight"], named["F.bias"] = self.F_layer
        return named

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()

    def features(self, batch: Tensor) -> Tensor:
        hidden = batch
        for weight, bias in self.G_layers:
            hidden = relu(matmul(hidden, weight) + bias)
        return hidden


@dataclass
class ProbOutput:
    """
    一批实例的概率输出

    p: (n, K+1) 概率向量；p_bar: 条件概率向量，前 K 项为 p_k / (1 - p_{K+1})，最后一项为 0；
    logits: 原始输出 o(x)。
    """
    p: Tensor
    p_bar: Tensor
    logits: Tensor
    K: int

    def __len__(self) -> int:
        return int(self.p.shape[0])

    @property
    def p_domain(self) -> Tensor:
        """领域神经元概率 p_{K+1}，形状 (n, 1)"""
        return self.p[:, self.K:self.K + 1]

    @property
    def p_categories(self) -> Tensor:
        """类别概率 p_1..p_K，形状 (n, K)"""
        return self.p[:, :self.K]

    @property
    def p_bar_categories(self) -> Tensor:
        """条件类别概率 p̄_1..p̄_K，形状 (n, K)"""
        return self.p_bar[:, :self.K]


def probabilities_from_logits(logits: Tensor, K: int) -> ProbOutput:
    """由 logit 构造 p 与 p̄"""
    if logits.data.ndim != 2 or logits.shape[1] != K + 1:
        raise ShapeError("probabilities_from_logits", logits.shape, ("n", K + 1))
    eps = settings.CLAMP_EPS
    p = softmax_rows(logits)
    category_mask = np.append(np.ones(K), 0.0)
    remaining = clamp(1.0 - p[:, K:K + 1], eps, 1.0)
    p_bar = p * category_mask / remaining
    return ProbOutput(p=p, p_bar=p_bar, logits=logits, K=K)


def forward(net: DadaNetwork, batch: Union[np.ndarray, Tensor]) -> ProbOutput:
    """
    前向计算

    Args:
        net: 网络
        batch: (n, d) 特征矩阵

    Returns:
        ProbOutput: 可微的概率输出

    Raises:
        ShapeError: 特征维度与第一层不匹配
    """
    inputs = batch if isinstance(batch, Tensor) else Tensor(np.asarray(batch, dtype=np.float64))
    if inputs.data.ndim != 2 or inputs.shape[1] != net.input_dim:
        raise ShapeError("forward", inputs.shape, ("n", net.input_dim))
    weight, bias = net.F_layer
    logits = matmul(net.features(inputs), weight) + bias
    return probabilities_from_logits(logits, net.K)


def _flag_degenerate(source: str, denominator: np.ndarray) -> None:
    count = int(np.sum(denominator < settings.CLAMP_EPS))
    if count:
        _degenerate_events[source] += count
        logger.debug(f"{source}: {count} 个分母低于 {settings.CLAMP_EPS}，已截断")


def domain_pred_vector(p: ProbOutput, k: int) -> Tensor:
    """
    第 k 类的领域预测向量 p̂^k

    第 k 项为 p_k / (p_k + p_{K+1})，第 K+1 项为 p_{K+1} / (p_k + p_{K+1})，其余为 0。

    Args:
        p: 概率输出
        k: 类别编号，1..K

    Returns:
        Tensor: (n, K+1) 向量
    """
    if not 1 <= k <= p.K:
        raise ValidationError(f"category index must lie in 1..{p.K}, got {k}")
    pair = p.p[:, k - 1:k] + p.p_domain
    _flag_degenerate("domain_pred_vector", pair.data)
    mask = np.zeros(p.K + 1)
    mask[k - 1] = 1.0
    mask[p.K] = 1.0
    return p.p * mask / clamp(pair, settings.CLAMP_EPS, 2.0)


def domain_pred_shares(p: ProbOutput) -> Tuple[Tensor, Tensor]:
    """
    对全部 k 同时计算两路重归一化

    Returns:
        Tuple[Tensor, Tensor]: (p_k / (p_k + p_{K+1}), p_{K+1} / (p_k + p_{K+1}))，均为 (n, K)
    """
    pair = p.p_categories + p.p_domain
    _flag_degenerate("domain_pred_shares", pair.data)
    denominator = clamp(pair, settings.CLAMP_EPS, 2.0)
    return p.p_categories / denominator, p.p_domain / denominator


def predict_category(p: ProbOutput) -> np.ndarray:
    """按 p̄ 前 K 项取 argmax，并列时取编号最小者；返回 1..K 的类别编号"""
    return np.argmax(p.p_bar.data[:, :p.K], axis=1).astype(np.int64) + 1


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_network(dims: Sequence[int], K: int, seed: int = 0) -> DadaNetwork:
    """
    初始化网络：权重服从 uniform(-a, a)，a = sqrt(6 / (fan_in + fan_out))，偏置为0

    Args:
        dims: [输入维度, 隐藏层宽度...]，最后一个宽度即特征维度
        K: 已知类别数（F 输出 K+1 维）
        seed: 随机种子

    Returns:
        DadaNetwork: 新网络
    """
    widths = [int(width) for width in dims]
    if not widths or any(width < 1 for width in widths):
        raise ValidationError(f"layer sizes must be a non-empty list of positive integers, got {list(dims)}")
    if K < 1:
        raise ValidationError(f"K must be positive, got {K}")

    rng = np.random.default_rng(seed)

    def make_layer(fan_in: int, fan_out: int, prefix: str) -> Layer:
        bound = glorot_bound(fan_in, fan_out)
        weight = Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), requires_grad=True, name=f"{prefix}.weight")
        bias = Tensor(np.zeros((1, fan_out)), requires_grad=True, name=f"{prefix}.bias")
        return weight, bias

    G_layers = [make_layer(fan_in, fan_out, f"G.{index}") for index, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:]))]
    F_layer = make_layer(widths[-1], K + 1, "F")
    return DadaNetwork(G_layers=G_layers, F_layer=F_layer, K=K)
