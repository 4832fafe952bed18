from typing import Iterable, Optional

import numpy as np

from ..core.errors import DataError
from ..core.logging import logger
from .dataset import MISSING_LABEL, DatasetPair, Scenario


def _as_label_set(labels: Iterable[int], K: int, side: str) -> set:
    selection = {int(label) for label in labels}
    if not selection:
        raise DataError(f"{side} label selection is empty")
    outside = sorted(selection - set(range(1, K + 1)))
    if outside:
        raise DataError(f"{side} labels {outside} are not in the existing label set 1..{K}")
    return selection


def restrict_label_space(
    pair: DatasetPair,
    target_labels: Optional[Iterable[int]] = None,
    source_labels: Optional[Iterable[int]] = None,
) -> DatasetPair:
    """
    从闭集数据对构造部分集或开放集数据对

    Args:
        pair: 闭集数据对
        target_labels: 保留的目标域类别（部分集：目标标签空间被源域包含）
        source_labels: 保留的源域类别（开放集：源标签空间被目标域包含）

    Returns:
        DatasetPair: 新的数据对；选择全集时场景保持不变

    Raises:
        DataError: 选择为空、不是子集，或同时/均未给出两种选择
    """
    if (target_labels is None) == (source_labels is None):
        raise DataError("exactly one of target_labels or source_labels must be given")
    if pair.scenario != Scenario.CLOSED:
        raise DataError(f"label space restriction expects a closed pair, got {pair.scenario.value}")
    if np.any(pair.target_y == MISSING_LABEL):
        raise DataError("label space restriction needs labels on every target instance")

    full = set(range(1, pair.K_source + 1))

    if target_labels is not None:
        keep = _as_label_set(target_labels, pair.K_source, "target")
        if keep == full:
            return pair
        mask = np.isin(pair.target_y, sorted(keep))
        logger.debug(f"部分集构造: 保留目标类别 {sorted(keep)}，实例数 {int(mask.sum())}")
        return DatasetPair(
            source_x=pair.source_x,
            source_y=pair.source_y,
            target_x=pair.target_x[mask],
            target_y=pair.target_y[mask],
            K_source=pair.K_source,
            K_target=len(keep),
            scenario=Scenario.PARTIAL,
        ).validate()

    shared = _as_label_set(source_labels, pair.K_source, "source")
    if shared == full:
        return pair

    # 共享类别按原顺序重新编号为 1..m，其余目标类别并入未知类 m+1
    ordered = sorted(shared)
    unknown = len(ordered) + 1
    relabel = np.full(pair.K_source + 1, unknown, dtype=np.int64)
    for new_label, old_label in enumerate(ordered, start=1):
        relabel[old_label] = new_label

    source_mask = np.isin(pair.source_y, ordered)
    logger.debug(f"开放集构造: 共享类别 {ordered}，未知类编号 {unknown}")
    return DatasetPair(
        source_x=pair.source_x[source_mask],
        source_y=relabel[pair.source_y[source_mask]],
        target_x=pair.target_x,
        target_y=relabel[pair.target_y],
        K_source=len(ordered),
        K_target=unknown,
        scenario=Scenario.OPEN,
        unknown_label=unknown,
    ).validate()
