"""
参数扫描

对一个训练配置或数据集参数取若干值，每个值在相同的种子集合上训练，
汇总指标的均值与标准差。各单元可以分发到多个进程，结果按取值顺序合并。
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pydantic
from joblib import Parallel, delayed

from ..core.config import settings
from ..core.errors import DadaError, ValidationError
from ..core.logging import logger
from ..schemas.config import TrainConfig
from ..schemas.metrics import is_known_metric
from ..schemas.sweep import DatasetSpec, KnobTarget, SweepSpec
from ..worker.tasks import run_sweep_cell

# 除 metrics 日志中的指标外，扫描额外支持的汇总量
EXTRA_SWEEP_METRICS = ("outlier_weight_ratio",)


@dataclass
class SweepRow:
    """扫描表的一行"""
    value: Any
    n_runs: int
    means: Dict[str, float]
    stds: Dict[str, float]


def _cell_inputs(spec: SweepSpec, value: Any) -> tuple:
    config_data = dict(spec.config)
    dataset_data = spec.dataset.model_dump(mode="json")
    if spec.knob.target == KnobTarget.CONFIG:
        config_data[spec.knob.name] = value
    else:
        dataset_data[spec.knob.name] = value
    return config_data, dataset_data


def check_sweep(spec: SweepSpec) -> None:
    """
    在分发之前校验扫描描述

    Raises:
        ValidationError: 种子为空、参数名未知或指标名未知
    """
    if not spec.seeds:
        raise ValidationError("sweep spec lists no seeds")
    spec.check_knob()
    unknown = [name for name in spec.metrics if not is_known_metric(name) and name not in EXTRA_SWEEP_METRICS]
    if unknown:
        raise ValidationError(f"unknown sweep metric(s): {', '.join(unknown)}")
    # 每个取值都要能构成合法的配置与数据集参数
    for value in spec.knob.values:
        config_data, dataset_data = _cell_inputs(spec, value)
        TrainConfig.parse(config_data)
        try:
            DatasetSpec.model_validate(dataset_data)
        except pydantic.ValidationError as exc:
            raise ValidationError(f"invalid dataset value {value!r} for {spec.knob.name}", details=str(exc)) from None


def run_sweep(spec: SweepSpec, n_jobs: Optional[int] = None) -> List[SweepRow]:
    """
    执行扫描

    Args:
        spec: 扫描描述
        n_jobs: 并行进程数，默认取 spec.n_jobs 或 settings.SWEEP_N_JOBS

    Returns:
        List[SweepRow]: 按参数取值顺序排列的汇总行
    """
    check_sweep(spec)
    n_jobs = n_jobs or spec.n_jobs or settings.SWEEP_N_JOBS
    cells = []
    for index, value in enumerate(spec.knob.values):
        config_data, dataset_data = _cell_inputs(spec, value)
        for seed in spec.seeds:
            cells.append((index, value, seed, config_data, dataset_data, list(spec.metrics)))

    logger.info(
        f"扫描 {spec.knob.target.value}.{spec.knob.name}: {len(spec.knob.values)} 个取值 × "
        f"{len(spec.seeds)} 个种子, n_jobs={n_jobs}"
    )
    results = Parallel(n_jobs=n_jobs)(delayed(run_sweep_cell)(*cell) for cell in cells)

    failed = [result for result in results if not result["success"]]
    if failed:
        first = failed[0]
        raise DadaError(
            f"{len(failed)} sweep run(s) failed; first failure at value={first['value']!r} seed={first['seed']}: {first['error']}",
            details=[{"value": result["value"], "seed": result["seed"], "error": result["error"]} for result in failed],
            error_code="sweep_failed",
        )

    rows = []
    for index, value in enumerate(spec.knob.values):
        cell_results = sorted((result for result in results if result["index"] == index), key=lambda result: result["seed"])
        means, stds = {}, {}
        for name in spec.metrics:
            samples = np.array([result["metrics"][name] for result in cell_results], dtype=np.float64)
            means[name] = float(np.mean(samples))
            stds[name] = float(np.std(samples))
        rows.append(SweepRow(value=value, n_runs=len(cell_results), means=means, stds=stds))
        logger.debug(f"{spec.knob.name}={value!r}: " + ", ".join(f"{name}={means[name]:.4f}" for name in spec.metrics))
    return rows
