import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..schemas.metrics import EvalReport


def numpy_handler(obj):
    """处理numpy标量与数组的函数"""
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")


def success_payload(data=None, message=None) -> dict:
    """
    统一的成功结果格式

    Args:
        data: 返回的数据内容
        message: 成功描述信息

    Returns:
        dict: 可直接写成 JSON 的结果
    """
    return {"success": True, "message": message, "results": data}


def error_payload(message, error_code: str = "internal_error", details=None) -> dict:
    """统一的错误结果格式"""
    return {"success": False, "message": message, "error_code": error_code, "details": details}


def to_json_line(record: Any) -> str:
    return json.dumps(record, default=numpy_handler, sort_keys=True)


def write_jsonl(path: Union[str, Path], records: Iterable[Any]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("".join(to_json_line(record) + "\n" for record in records), encoding="utf-8")
    return target


def format_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.4f}"
    return str(value)


def render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """按列对齐的文本表格"""
    cells = [[format_value(value) for value in row] for row in rows]
    widths = [max([len(header)] + [len(row[column]) for row in cells]) for column, header in enumerate(headers)]
    lines = ["  ".join(header.ljust(width) for header, width in zip(headers, widths))]
    lines.append("  ".join("-" * width for width in widths))
    lines.extend("  ".join(cell.rjust(width) for cell, width in zip(row, widths)) for row in cells)
    return "\n".join(lines) + "\n"


def render_eval_report(report: EvalReport) -> str:
    """评估报告的文本形式：总体指标、各类别准确率与混淆矩阵"""
    summary = [
        ("split", report.split),
        ("instances", report.n_instances),
        ("overall", report.overall),
        ("mean_per_class", report.mean_per_class),
        ("avg_true_prob", report.avg_true_prob),
    ]
    if report.os is not None:
        summary += [
            ("os", report.os),
            ("os_star", report.os_star),
            ("unk_recall", report.unk_recall),
            ("unknown_present", report.unknown_present),
        ]
    text = render_table(["metric", "value"], summary)
    text += "\n" + render_table(["class", "accuracy"], list(zip(report.labels, report.per_class_acc)))
    matrix_labels = range(1, len(report.confusion) + 1)
    text += "\n" + render_table(
        ["true\\pred"] + [str(label) for label in matrix_labels],
        [[label] + row for label, row in zip(matrix_labels, report.confusion)],
    )
    return text


def eval_report_records(report: EvalReport) -> List[dict]:
    """评估报告的逐行记录：一行汇总，每个类别一行"""
    summary = report.model_dump(exclude={"labels", "per_class_acc", "confusion"})
    records = [{"kind": "summary", **summary}]
    accuracy_by_label = dict(zip(report.labels, report.per_class_acc))
    for label, row in enumerate(report.confusion, start=1):
        records.append({
            "kind": "class", "split": report.split, "label": label,
            "accuracy": accuracy_by_label.get(label), "confusion": row,
        })
    return records


def render_checks(results: Sequence[Any]) -> str:
    """诊断结果汇总表"""
    rows = [(result.name, "PASS" if result.passed else "FAIL", f"{result.elapsed:.2f}s", result.detail) for result in results]
    text = render_table(["check", "status", "time", "detail"], rows)
    passed = sum(1 for result in results if result.passed)
    return text + f"\n{passed}/{len(results)} checks passed\n"


def check_records(results: Sequence[Any]) -> List[dict]:
    return [
        {
            "check": result.name,
            "passed": result.passed,
            "detail": result.detail,
            "elapsed": result.elapsed,
            "metrics": result.metrics,
        }
        for result in results
    ]


def render_sweep(knob: str, rows: Sequence[Any], metrics: Sequence[str]) -> str:
    """扫描表：每个取值一行，每个指标给出均值与标准差"""
    headers = [knob, "runs"]
    for name in metrics:
        headers += [f"{name}_mean", f"{name}_std"]
    body = []
    for row in rows:
        line = [_knob_text(row.value), row.n_runs]
        for name in metrics:
            line += [row.means[name], row.stds[name]]
        body.append(line)
    return render_table(headers, body)


def sweep_records(knob: str, rows: Sequence[Any]) -> List[dict]:
    return [
        {knob: row.value, "runs": row.n_runs, "mean": row.means, "std": row.stds}
        for row in rows
    ]


def _knob_text(value: Any) -> Optional[str]:
    if isinstance(value, (list, tuple)):
        return ",".join(str(item) for item in value)
    return format_value(value)
