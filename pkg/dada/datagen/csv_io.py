"""
数据集CSV读写

格式：表头 `x1,...,xd,label,domain`；label 为整数，目标域未标注行留空；
domain 取 s 或 t；UTF-8 编码，LF 换行。浮点数以 repr 形式写出，读写无损。
"""

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import DataError
from ..core.logging import logger
from .dataset import MISSING_LABEL, DatasetPair, Domain, Scenario

SOURCE_FILE = "source.csv"
TARGET_FILE = "target.csv"
SIDECAR_FILE = "dataset.json"

PathLike = Union[str, Path]


def _header(n_features: int) -> List[str]:
    return [f"x{j}" for j in range(1, n_features + 1)] + ["label", "domain"]


def _write_rows(handle, x: np.ndarray, y: np.ndarray, domain: Domain) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(_header(x.shape[1]))
    for features, label in zip(x, y):
        label_text = "" if label == MISSING_LABEL else str(int(label))
        writer.writerow([repr(float(value)) for value in features] + [label_text, domain.value])


def _sidecar(pair: DatasetPair) -> Dict[str, object]:
    return {
        "scenario": pair.scenario.value,
        "K_source": pair.K_source,
        "K_target": pair.K_target,
        "unknown_label": pair.unknown_label,
        "n_features": pair.n_features,
    }


def save_csv(pair: DatasetPair, path: PathLike) -> Path:
    """
    把数据对写入目录：source.csv、target.csv 与 dataset.json 元数据

    Args:
        pair: 数据对
        path: 输出目录

    Returns:
        Path: 输出目录
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / SOURCE_FILE, "w", encoding="utf-8", newline="") as handle:
        _write_rows(handle, pair.source_x, pair.source_y, Domain.SOURCE)
    with open(directory / TARGET_FILE, "w", encoding="utf-8", newline="") as handle:
        _write_rows(handle, pair.target_x, pair.target_y, Domain.TARGET)
    with open(directory / SIDECAR_FILE, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(_sidecar(pair), handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info(f"数据集已保存: {directory} (source={len(pair.source_x)}, target={len(pair.target_x)})")
    return directory


def _parse_file(file_path: Path) -> List[Tuple[List[float], int, Domain]]:
    rows: List[Tuple[List[float], int, Domain]] = []
    with open(file_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataError(f"no instances in {file_path.name}")
        n_features = len(header) - 2
        if n_features < 1 or header != _header(n_features):
            raise DataError(f"malformed header {header!r}, expected x1,...,xd,label,domain", line=1)

        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_features + 2:
                raise DataError(f"expected {n_features + 2} fields, got {len(row)}", line=line_number)
            features = []
            for column, text in enumerate(row[:n_features], start=1):
                try:
                    features.append(float(text))
                except ValueError:
                    raise DataError(f"non-numeric feature {text!r} in column x{column}", line=line_number) from None
            label_text = row[n_features].strip()
            try:
                label = MISSING_LABEL if label_text == "" else int(label_text)
            except ValueError:
                raise DataError(f"non-integer label {label_text!r}", line=line_number) from None
            if label_text != "" and label < 1:
                raise DataError(f"label must be a positive integer, got {label}", line=line_number)
            try:
                domain = Domain(row[n_features + 1].strip())
            except ValueError:
                raise DataError(f"domain must be 's' or 't', got {row[n_features + 1]!r}", line=line_number) from None
            if domain == Domain.SOURCE and label == MISSING_LABEL:
                raise DataError("source rows must carry a label", line=line_number)
            rows.append((features, label, domain))

    if not rows:
        raise DataError(f"no instances in {file_path.name}")
    return rows


def _infer_scenario(source_labels: set, target_labels: set) -> Tuple[Scenario, int, int, Optional[int]]:
    K_source = max(source_labels)
    if target_labels <= source_labels:
        if target_labels == source_labels or not target_labels:
            return Scenario.CLOSED, K_source, K_source, None
        return Scenario.PARTIAL, K_source, len(target_labels), None
    return Scenario.OPEN, K_source, K_source + 1, K_source + 1


def load_csv(path: PathLike) -> DatasetPair:
    """
    读取 save_csv 写出的目录，或同时包含两个领域的单个CSV文件

    Raises:
        DataError: 文件为空、行格式错误（附行号）或场景不变量不成立
    """
    location = Path(path)
    if location.is_dir():
        files = [location / SOURCE_FILE, location / TARGET_FILE]
        sidecar_path = location / SIDECAR_FILE
    else:
        files = [location]
        sidecar_path = location.with_suffix(".json")
    for file_path in files:
        if not file_path.exists():
            raise DataError(f"dataset file not found: {file_path}")

    rows = [row for file_path in files for row in _parse_file(file_path)]
    widths = {len(features) for features, _, _ in rows}
    if len(widths) != 1:
        raise DataError(f"inconsistent feature dimensions across files: {sorted(widths)}")

    source = [(features, label) for features, label, domain in rows if domain == Domain.SOURCE]
    target = [(features, label) for features, label, domain in rows if domain == Domain.TARGET]
    if not source or not target:
        raise DataError("no instances for one of the domains")

    source_x = np.array([features for features, _ in source], dtype=np.float64)
    source_y = np.array([label for _, label in source], dtype=np.int64)
    target_x = np.array([features for features, _ in target], dtype=np.float64)
    target_y = np.array([label for _, label in target], dtype=np.int64)

    if sidecar_path.exists():
        with open(sidecar_path, "r", encoding="utf-8") as handle:
            meta = json.load(handle)
        scenario = Scenario(meta["scenario"])
        K_source, K_target = int(meta["K_source"]), int(meta["K_target"])
        unknown_label = meta.get("unknown_label")
    else:
        scenario, K_source, K_target, unknown_label = _infer_scenario(
            {int(y) for y in source_y}, {int(y) for y in target_y if y != MISSING_LABEL}
        )
        logger.warning(f"未找到元数据文件 {sidecar_path.name}，根据标签推断场景为 {scenario.value}")

    return DatasetPair(
        source_x=source_x,
        source_y=source_y,
        target_x=target_x,
        target_y=target_y,
        K_source=K_source,
        K_target=K_target,
        scenario=scenario,
        unknown_label=unknown_label,
    ).validate()


def dataset_fingerprint(pair: DatasetPair) -> str:
    """按规范CSV字节计算数据对的sha256指纹"""
    buffer = io.StringIO()
    _write_rows(buffer, pair.source_x, pair.source_y, Domain.SOURCE)
    _write_rows(buffer, pair.target_x, pair.target_y, Domain.TARGET)
    buffer.write(json.dumps(_sidecar(pair), sort_keys=True))
    return hashlib.sha256(buffer.getvalue().encode("utf-8")).hexdigest()
