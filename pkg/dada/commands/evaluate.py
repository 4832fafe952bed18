from pathlib import Path

import click

from ..core.errors import ValidationError
from ..datagen import load_csv
from ..models import load_checkpoint
from ..services.evaluation import evaluate_network
from ..utils.helpers import FileUtils
from ..utils.report import eval_report_records, render_eval_report, write_jsonl

SPLITS = ("target", "source")


@click.command("eval")
@click.argument("checkpoint", type=click.Path(path_type=Path))
@click.argument("data_path", type=click.Path(path_type=Path))
@click.option("-o", "--out", "out", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="报告目录，默认与检查点同目录")
@click.option("--split", type=click.Choice(SPLITS + ("both",)), default="target", show_default=True, help="评估的数据划分")
def evaluate(checkpoint: Path, data_path: Path, out: Path, split: str):
    """在数据集上评估检查点，写出 report.txt 与 report.jsonl"""
    net = load_checkpoint(FileUtils.require_file(checkpoint, "checkpoint"))
    pair = load_csv(data_path)
    if net.input_dim != pair.n_features:
        raise ValidationError(
            f"checkpoint expects {net.input_dim} features but the dataset has {pair.n_features}"
        )

    view = pair.evaluation_view()
    reports = [evaluate_network(net, view, split=name) for name in (SPLITS if split == "both" else (split,))]

    out = FileUtils.ensure_dir(out if out is not None else checkpoint.parent)
    text = "\n".join(render_eval_report(report) for report in reports)
    (out / "report.txt").write_text(text, encoding="utf-8")
    write_jsonl(out / "report.jsonl", [record for report in reports for record in eval_report_records(report)])
    click.echo(text, nl=False)
