"""
训练运行与产物

一次运行写出检查点、指标日志、调度轨迹、曲线与运行清单；清单足以重放该运行。
"""

import os
from pathlib import Path
from typing import Tuple, Union

from ..core.config import settings
from ..core.errors import ValidationError
from ..core.logging import logger
from ..datagen import dataset_fingerprint, load_csv
from ..models import save_checkpoint
from ..schemas.config import TrainConfig
from ..schemas.manifest import ArtifactPaths, RunManifest
from ..schemas.metrics import format_metrics_log
from ..utils.helpers import FileUtils
from ..utils.report import render_eval_report
from .evaluation import evaluate_network
from .trainer import train

MANIFEST_FILE = "manifest.json"

PathLike = Union[str, Path]


def execute_run(config: TrainConfig, data_path: PathLike, out_dir: PathLike) -> RunManifest:
    """
    训练并写出全部产物

    Args:
        config: 训练配置
        data_path: 数据集目录或CSV文件
        out_dir: 运行目录

    Returns:
        RunManifest: 已写入 out_dir/manifest.json 的运行清单
    """
    pair = load_csv(data_path)
    fingerprint = dataset_fingerprint(pair)
    out = FileUtils.ensure_dir(out_dir)
    artifacts = ArtifactPaths()

    state, history = train(config, pair)

    save_checkpoint(state.net, out / artifacts.checkpoint)
    metrics_log = out / artifacts.metrics_log
    with open(metrics_log, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_metrics_log(history))
    FileUtils.write_schedule(out / artifacts.schedule_trace, state.schedule_trace)
    FileUtils.write_metric_curves(out / artifacts.curves_dir, history)

    view = pair.evaluation_view()
    final_metrics = {}
    if view.labeled_target_mask.any():
        report = evaluate_network(state.net, view, split="target")
        (out / artifacts.report).write_text(render_eval_report(report), encoding="utf-8")
        final_metrics = report.metric_values()
    else:
        logger.warning("目标域没有保留标签，跳过最终评估")
        artifacts.report = None

    manifest = RunManifest(
        config=config.snapshot(),
        dataset_fingerprint=fingerprint,
        data_path=os.path.abspath(data_path),
        seed=config.seed,
        artifacts=artifacts,
        tool_version=settings.TOOL_VERSION,
        final_metrics=final_metrics,
        metrics_log_sha256=FileUtils.file_sha256(metrics_log),
    )
    manifest.write(out / MANIFEST_FILE)
    logger.info(f"运行完成: {out} {final_metrics}")
    return manifest


def replay_run(manifest_path: PathLike, out_dir: PathLike) -> Tuple[RunManifest, bool]:
    """
    按清单重新执行一次运行

    Returns:
        Tuple[RunManifest, bool]: 新的运行清单，以及指标日志是否与原运行逐字节一致

    Raises:
        ValidationError: 数据集内容与清单中的指纹不一致
    """
    original = RunManifest.read(manifest_path)
    config = TrainConfig.parse(original.config)
    fingerprint = dataset_fingerprint(load_csv(original.data_path))
    if fingerprint != original.dataset_fingerprint:
        raise ValidationError(
            f"dataset at {original.data_path} no longer matches the manifest fingerprint",
            details={"expected": original.dataset_fingerprint, "actual": fingerprint},
        )
    if original.tool_version != settings.TOOL_VERSION:
        logger.warning(f"清单由版本 {original.tool_version} 生成，当前版本 {settings.TOOL_VERSION}")

    replayed = execute_run(config, original.data_path, out_dir)
    identical = replayed.metrics_log_sha256 == original.metrics_log_sha256
    if not identical:
        logger.warning("重放的指标日志与原运行不一致")
    return replayed, identical
