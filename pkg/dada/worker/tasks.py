from typing import Any, Dict, List

from ..core.logging import logger
from ..schemas.config import TrainConfig
from ..schemas.metrics import MetricsRecord
from ..schemas.sweep import DatasetSpec
from ..services.datasets import build_dataset
from ..services.evaluation import category_weight_split
from ..services.trainer import train


def final_metric_values(history: List[MetricsRecord]) -> Dict[str, float]:
    """取每个指标在最后一个记录epoch上的取值"""
    values: Dict[str, float] = {}
    for record in history:
        values[record.name] = record.value
    return values


def run_sweep_cell(
    index: int,
    knob_value: Any,
    seed: int,
    config_data: Dict[str, Any],
    dataset_data: Dict[str, Any],
    metrics: List[str],
) -> Dict[str, Any]:
    """
    执行扫描中的一个 (参数取值, 种子) 单元

    Args:
        index: 参数取值在扫描列表中的位置，用于确定性合并
        knob_value: 参数取值
        seed: 训练与数据共用的种子
        config_data: 已代入参数取值的训练配置
        dataset_data: 已代入参数取值的数据集参数
        metrics: 需要汇总的指标名

    Returns:
        Dict[str, Any]: 单元结果
    """
    logger.info(f"Running sweep cell {index} (value={knob_value!r}, seed={seed})")
    try:
        config = TrainConfig.parse({**config_data, "seed": seed})
        dataset = DatasetSpec.model_validate({**dataset_data, "seed": seed})
        pair = build_dataset(dataset)
        state, history = train(config, pair)
        final = final_metric_values(history)

        result = {"success": True, "index": index, "value": knob_value, "seed": seed, "metrics": {}}
        for name in metrics:
            if name == "outlier_weight_ratio":
                result["metrics"][name] = _outlier_weight_ratio(state, pair)
            else:
                result["metrics"][name] = final.get(name, float("nan"))
        return result

    except Exception as e:
        logger.error(f"Error in sweep cell {index} (seed={seed}): {str(e)}")
        return {
            "success": False,
            "index": index,
            "value": knob_value,
            "seed": seed,
            "error": str(e),
        }


def _outlier_weight_ratio(state, pair) -> float:
    """部分集：离群类别平均权重 / 共享类别平均权重"""
    if state.category_weights is None:
        return float("nan")
    split = category_weight_split(state.category_weights.c, pair.evaluation_view())
    if split is None or not split["shared"]:
        return float("nan")
    return split["outlier"] / split["shared"]
