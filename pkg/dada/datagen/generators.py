"""
合成领域偏移数据集生成器

所有生成器都是其参数（含 seed）的纯函数：同一组参数总是得到逐位相同的数据。
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from sklearn.datasets import make_blobs, make_moons

from ..core.errors import DataError
from ..core.logging import logger
from .dataset import DatasetPair, Scenario

# 双月分布的质心：外月均值 (0, 2/π)，内月均值 (1, 1/2 - 2/π)
MOONS_CENTROID = np.array([0.5, 0.25])


def _spawn_seeds(seed: int, count: int) -> List[int]:
    """从一个种子派生出互不相关的子种子"""
    state = np.random.SeedSequence(int(seed)).generate_state(count)
    return [int(value) for value in state]


def _rotate(points: np.ndarray, degrees: float, center: np.ndarray) -> np.ndarray:
    theta = math.radians(degrees)
    rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return (points - center) @ rotation.T + center


def grid_centers(K: int, step: float = 3.0) -> np.ndarray:
    """K 个簇中心按行优先排在 ceil(sqrt(K)) 列的网格上"""
    columns = int(math.ceil(math.sqrt(K)))
    return np.array([[step * (k % columns), step * (k // columns)] for k in range(K)], dtype=np.float64)


def make_two_moons(n_per_domain: int, rotation_deg: float = 30.0, noise_sd: float = 0.1, seed: int = 0) -> DatasetPair:
    """
    生成双月数据对：目标域为同分布样本绕质心旋转 rotation_deg 度

    Args:
        n_per_domain: 每个领域的实例数
        rotation_deg: 旋转角度，[0, 360)
        noise_sd: 高斯噪声标准差
        seed: 随机种子

    Returns:
        DatasetPair: K=2 的闭集数据对
    """
    if n_per_domain < 2:
        raise DataError(f"n_per_domain must be at least 2, got {n_per_domain}")
    if not 0 <= rotation_deg < 360:
        raise DataError(f"rotation_deg must lie in [0, 360), got {rotation_deg}")
    if noise_sd < 0:
        raise DataError(f"noise_sd must be non-negative, got {noise_sd}")

    source_seed, target_seed = _spawn_seeds(seed, 2)
    source_x, source_y = make_moons(n_samples=n_per_domain, noise=noise_sd, random_state=source_seed)
    target_x, target_y = make_moons(n_samples=n_per_domain, noise=noise_sd, random_state=target_seed)
    target_x = _rotate(target_x, rotation_deg, MOONS_CENTROID)

    logger.debug(f"生成双月数据: n={n_per_domain}, rotation={rotation_deg}, noise={noise_sd}, seed={seed}")
    return DatasetPair(
        source_x=source_x.astype(np.float64),
        source_y=source_y.astype(np.int64) + 1,
        target_x=target_x.astype(np.float64),
        target_y=target_y.astype(np.int64) + 1,
        K_source=2,
        K_target=2,
        scenario=Scenario.CLOSED,
    ).validate()


def _check_shift(shift: Sequence[float]) -> np.ndarray:
    vector = np.asarray(shift, dtype=np.float64)
    if vector.shape != (2,):
        raise DataError(f"shift must be a 2-vector, got {list(vector.shape)}")
    return vector


def make_gaussian_grid(
    K: int,
    n_per_class: int = 100,
    shift: Sequence[float] = (0.0, 0.0),
    spread: float = 0.3,
    seed: int = 0,
    grid_step: float = 3.0,
) -> DatasetPair:
    """
    生成网格状高斯簇数据对：目标域为同一组簇整体平移 shift

    Args:
        K: 类别数（≥2）
        n_per_class: 每类实例数
        shift: 目标域平移向量
        spread: 簇的标准差
        seed: 随机种子
        grid_step: 网格间距

    Returns:
        DatasetPair: 闭集数据对，每类恰好 n_per_class 个实例
    """
    if K < 2:
        raise DataError(f"K must be at least 2, got {K}")
    if n_per_class < 1:
        raise DataError(f"n_per_class must be positive, got {n_per_class}")
    offset = _check_shift(shift)
    centers = grid_centers(K, grid_step)

    source_seed, target_seed = _spawn_seeds(seed, 2)
    source_x, source_y = make_blobs(
        n_samples=[n_per_class] * K, centers=centers, cluster_std=spread, random_state=source_seed
    )
    target_x, target_y = make_blobs(
        n_samples=[n_per_class] * K, centers=centers + offset, cluster_std=spread, random_state=target_seed
    )

    return DatasetPair(
        source_x=source_x.astype(np.float64),
        source_y=source_y.astype(np.int64) + 1,
        target_x=target_x.astype(np.float64),
        target_y=target_y.astype(np.int64) + 1,
        K_source=K,
        K_target=K,
        scenario=Scenario.CLOSED,
    ).validate()


def _split_count(total: int, parts: int) -> List[int]:
    base, remainder = divmod(total, parts)
    return [base + (1 if i < remainder else 0) for i in range(parts)]


def make_open_set_grid(
    K_known: int = 3,
    n_per_class: int = 100,
    known_to_unknown: float = 1.0,
    n_unknown_clusters: int = 1,
    shift: Sequence[float] = (0.0, 0.0),
    spread: float = 0.3,
    seed: int = 0,
    grid_step: float = 3.0,
) -> DatasetPair:
    """
    生成开放集网格数据：源域只含已知类，目标域额外包含植入的未知簇

    目标域中已知实例与未知实例的数量比为 known_to_unknown : 1。
    """
    if K_known < 1:
        raise DataError(f"K_known must be positive, got {K_known}")
    if n_per_class < 1 or n_unknown_clusters < 1:
        raise DataError("n_per_class and n_unknown_clusters must be positive")
    if known_to_unknown <= 0:
        raise DataError(f"known_to_unknown must be positive, got {known_to_unknown}")
    offset = _check_shift(shift)

    total_clusters = K_known + n_unknown_clusters
    centers = grid_centers(total_clusters, grid_step)
    n_unknown = max(1, int(round(K_known * n_per_class / known_to_unknown)))
    unknown_counts = _split_count(n_unknown, n_unknown_clusters)

    source_seed, target_seed = _spawn_seeds(seed, 2)
    source_x, source_y = make_blobs(
        n_samples=[n_per_class] * K_known, centers=centers[:K_known], cluster_std=spread, random_state=source_seed
    )
    target_x, target_y = make_blobs(
        n_samples=[n_per_class] * K_known + unknown_counts,
        centers=centers + offset,
        cluster_std=spread,
        random_state=target_seed,
    )
    target_y = np.where(target_y >= K_known, K_known, target_y)

    return DatasetPair(
        source_x=source_x.astype(np.float64),
        source_y=source_y.astype(np.int64) + 1,
        target_x=target_x.astype(np.float64),
        target_y=target_y.astype(np.int64) + 1,
        K_source=K_known,
        K_target=K_known + 1,
        scenario=Scenario.OPEN,
        unknown_label=K_known + 1,
    ).validate()


def class_means(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """按类别求均值，返回 (labels, means)"""
    labels = np.unique(y)
    return labels, np.stack([x[y == label].mean(axis=0) for label in labels])
