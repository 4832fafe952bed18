"""
损失函数

所有对数前都把概率截断到 [eps, 1-eps]（eps = settings.CLAMP_EPS）；
批内规约一律取算术平均。标签为 1..K 的整数数组。
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ..autodiff import Tensor, safe_log
from ..core.config import settings
from ..core.errors import DomainError, ValidationError
from ..models.network import ProbOutput, domain_pred_shares
from ..schemas.config import SupervisionSignal


@dataclass
class LossBundle:
    """
    一次前向得到的目标

    L_F 在 F 参数上最小化，L_G 在 G 参数上最大化；L_G 为空表示 G 与 F 一同最小化 L_F。
    """
    L_F: Tensor
    L_G: Optional[Tensor]
    components: Dict[str, Tensor] = field(default_factory=dict)

    def values(self) -> Dict[str, float]:
        """各分量及 L_F、L_G 的数值"""
        values = {name: tensor.item() for name, tensor in self.components.items()}
        values["L_F"] = self.L_F.item()
        if self.L_G is not None:
            values["L_G"] = self.L_G.item()
        return values


@dataclass(frozen=True)
class CategoryWeights:
    """类别权重：c_bar 为目标域 p̄ 的均值，c 为其归一化后与全1向量的凸组合"""
    c_bar: np.ndarray
    c: np.ndarray
    lam: float

    @property
    def normalized(self) -> np.ndarray:
        return self.c_bar / np.max(self.c_bar)

    @classmethod
    def uniform(cls, K: int) -> "CategoryWeights":
        return cls(c_bar=np.full(K, 1.0 / K), c=np.ones(K), lam=0.0)


def _eps() -> float:
    return settings.CLAMP_EPS


def _check_labels(y: np.ndarray, K: int, n: int) -> np.ndarray:
    labels = np.asarray(y)
    if labels.shape != (n,):
        raise ValidationError(f"expected {n} labels, got shape {list(labels.shape)}")
    if labels.size and (labels.min() < 1 or labels.max() > K):
        bad = labels[(labels < 1) | (labels > K)]
        raise ValidationError(f"labels must lie in 1..{K}, got {int(bad[0])}")
    return labels.astype(np.int64)


def _pick(matrix: Tensor, labels: np.ndarray) -> Tensor:
    """逐行取出标签对应的一列，返回 (n,)"""
    return matrix[(np.arange(len(labels)), labels - 1)]


def _source_dada_terms(p: ProbOutput, y: np.ndarray) -> Tensor:
    labels = _check_labels(y, p.K, len(p))
    eps = _eps()
    p_y = _pick(p.p, labels)
    p_domain = p.p[:, p.K]
    return -((1.0 - p_domain) * safe_log(p_y, eps) + p_domain * safe_log(1.0 - p_y, eps))


def loss_source_dada(p: ProbOutput, y: np.ndarray) -> Tensor:
    """源域判别对抗损失：-[(1-p_{K+1})·log p_y + p_{K+1}·log(1-p_y)] 的批均值"""
    return _source_dada_terms(p, y).mean()


def loss_source_dada_p(p: ProbOutput, y: np.ndarray, weights: Union[CategoryWeights, np.ndarray]) -> Tensor:
    """按类别权重 c_y 缩放的源域判别对抗损失"""
    c = weights.c if isinstance(weights, CategoryWeights) else np.asarray(weights, dtype=np.float64)
    if c.shape != (p.K,):
        raise ValidationError(f"category weights must have length {p.K}, got {list(c.shape)}")
    terms = _source_dada_terms(p, y)
    return (terms * c[np.asarray(y, dtype=np.int64) - 1]).mean()


def cross_entropy_bar(p: ProbOutput, y: np.ndarray) -> Tensor:
    """基于 p̄ 的K路交叉熵，不约束领域神经元"""
    labels = _check_labels(y, p.K, len(p))
    return -safe_log(_pick(p.p_bar, labels), _eps()).mean()


def cross_entropy_full(p: ProbOutput, y: np.ndarray) -> Tensor:
    """
    整个 K+1 路 softmax 上的交叉熵 -log p_y

    -log p_y = -log p̄_y - log(1 - p_{K+1})，比 p̄ 交叉熵多出把源域 p_{K+1} 压低的一项。
    """
    labels = _check_labels(y, p.K, len(p))
    return -safe_log(_pick(p.p, labels), _eps()).mean()


def supervision_loss(p: ProbOutput, y: np.ndarray, signal: SupervisionSignal = SupervisionSignal.FULL) -> Tensor:
    """按配置选择源域监督交叉熵"""
    if SupervisionSignal(signal) == SupervisionSignal.BAR:
        return cross_entropy_bar(p, y)
    return cross_entropy_full(p, y)


def loss_target_F_dada(p: ProbOutput) -> Tensor:
    """目标域判别对抗损失（F侧）：-Σ_k p̄_k·log p̂^k_{K+1} 的批均值"""
    _, domain_share = domain_pred_shares(p)
    return -(p.p_bar_categories * safe_log(domain_share, _eps())).sum(axis=1).mean()


def loss_target_G_dada(p: ProbOutput) -> Tensor:
    """目标域判别对抗损失（G侧）：Σ_k p̄_k·log(1-p̂^k_{K+1}) 的批均值"""
    # 1 - p̂^k_{K+1} 直接取 p_k / (p_k + p_{K+1})，避免相减带来的精度损失
    category_share, _ = domain_pred_shares(p)
    return (p.p_bar_categories * safe_log(category_share, _eps())).sum(axis=1).mean()


def loss_entropy(p: ProbOutput) -> Tensor:
    """p̄ 的熵的批均值，0·log0 记为0"""
    p_bar = p.p_bar_categories
    return -(p_bar * safe_log(p_bar, _eps())).sum(axis=1).mean()


def loss_target_dann_F(p: ProbOutput) -> Tensor:
    """-mean log p_{K+1}(x^t)"""
    return -safe_log(p.p[:, p.K], _eps()).mean()


def loss_target_dann_G(p: ProbOutput) -> Tensor:
    """mean log(1 - p_{K+1}(x^t))"""
    return safe_log(1.0 - p.p[:, p.K], _eps()).mean()


def loss_dann_ca(p_s: ProbOutput, y_s: np.ndarray, p_t: Optional[ProbOutput], lam: float) -> LossBundle:
    """
    分类感知的对抗目标（一体化分类器基线）

    L_F = -mean log p_y(x^s) - mean log p_{K+1}(x^t)
    L_G = mean log p̄_y(x^s) + λ·mean log(1 - p_{K+1}(x^t))

    p_t 为空时只保留源域项。
    """
    labels = _check_labels(y_s, p_s.K, len(p_s))
    eps = _eps()
    source_F = -safe_log(_pick(p_s.p, labels), eps).mean()
    source_G = safe_log(_pick(p_s.p_bar, labels), eps).mean()
    components = {"L_s_F": source_F, "L_s_G": source_G}
    L_F, L_G = source_F, source_G
    if p_t is not None:
        target_F = loss_target_dann_F(p_t)
        target_G = loss_target_dann_G(p_t)
        components.update({"L_t_F": target_F, "L_t_G": target_G})
        L_F = L_F + target_F
        L_G = L_G + lam * target_G
    return LossBundle(L_F=L_F, L_G=L_G, components=components)


def loss_symmetric_dc(p_t: ProbOutput) -> Tensor:
    """对称领域混淆损失：Σ_k p̄_k[½log p_{K+1} + ½log(1-p_{K+1})] 的批均值，在 p_{K+1}=0.5 处取最大"""
    eps = _eps()
    p_domain = p_t.p_domain
    bracket = 0.5 * safe_log(p_domain, eps) + 0.5 * safe_log(1.0 - p_domain, eps)
    return (p_t.p_bar_categories * bracket).sum(axis=1).mean()


def category_weights(p_t_bar: np.ndarray, lam: float) -> CategoryWeights:
    """
    类别权重向量

    Args:
        p_t_bar: (n, K) 目标域条件概率 p̄（前 K 项）
        lam: 组合系数，[0, 1]

    Returns:
        CategoryWeights: c = λ·c_bar/max(c_bar) + (1-λ)·1

    Raises:
        ValidationError: 批为空或 λ 越界
    """
    matrix = np.asarray(p_t_bar, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ValidationError("category_weights needs a non-empty (n, K) batch of conditional probabilities")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"category weight coefficient must lie in [0, 1], got {lam}")
    c_bar = matrix.mean(axis=0)
    peak = np.max(c_bar)
    if peak <= 0:
        raise ValidationError("category_weights: averaged conditional probabilities are all zero")
    c = lam * (c_bar / peak) + (1.0 - lam) * np.ones_like(c_bar)
    return CategoryWeights(c_bar=c_bar, c=c, lam=float(lam))


def loss_target_F_openset(p_t: ProbOutput, q: float) -> Tensor:
    """
    开放集目标域损失（F侧）：-[q·log p_K + (1-q)·log p_{K+1}] 的批均值

    第 K 个输出为未知类。

    Raises:
        ValidationError: q 不在 (0, 0.5) 内
    """
    if not 0.0 < q < 0.5:
        raise ValidationError(f"leakage probability q must lie in (0, 0.5), got {q}")
    eps = _eps()
    K = p_t.K
    return -(q * safe_log(p_t.p[:, K - 1], eps) + (1.0 - q) * safe_log(p_t.p[:, K], eps)).mean()


def _check_open_simplex(p_y: np.ndarray, p_K1: np.ndarray) -> None:
    inside = (p_y > 0) & (p_y < 1) & (p_K1 > 0) & (p_K1 < 1) & (p_y + p_K1 <= 1.0)
    if not np.all(inside):
        raise DomainError("p_y and p_K1 must lie in (0, 1) with p_y + p_K1 <= 1")


def source_prob_gradients(p_y: np.ndarray, p_K1: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    源域判别对抗损失对 p_y、p_{K+1} 的解析梯度（向量化）

    ∇_{p_y} = [p_y·p_{K+1} - (1-p_y)(1-p_{K+1})] / [p_y(1-p_y)]
    ∇_{p_{K+1}} = log(p_y / (1-p_y))
    """
    p_y = np.asarray(p_y, dtype=np.float64)
    p_K1 = np.asarray(p_K1, dtype=np.float64)
    _check_open_simplex(p_y, p_K1)
    # 分子 p_y·p_{K+1} - (1-p_y)(1-p_{K+1}) 化简为 p_y + p_{K+1} - 1，符号与单纯形约束一致
    grad_py = (p_y + p_K1 - 1.0) / (p_y * (1.0 - p_y))
    grad_pk1 = np.log(p_y) - np.log1p(-p_y)
    return grad_py, grad_pk1


def grad_signs_source(p_y: float, p_K1: float) -> Tuple[int, int]:
    """返回 (sign ∇_{p_y}, sign ∇_{p_{K+1}})，取值 -1/0/1"""
    grad_py, grad_pk1 = source_prob_gradients(np.array([p_y]), np.array([p_K1]))
    return int(np.sign(grad_py[0])), int(np.sign(grad_pk1[0]))
