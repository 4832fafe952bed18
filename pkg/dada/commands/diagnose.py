from pathlib import Path
from typing import Optional

import click

from ..core.errors import CheckFailedError
from ..schemas.metrics import parse_metrics_log
from ..services.diagnostics import alternation_dynamics, run_all
from ..utils.helpers import FileUtils
from ..utils.report import check_records, render_checks, write_jsonl


@click.command("diagnose")
@click.option("--seed", type=int, default=0, show_default=True, help="随机种子")
@click.option("--draws", type=int, default=100, show_default=True, help="有限差分与恒等式检查的随机抽样次数")
@click.option("--points", "n_points", type=int, default=10000, show_default=True, help="梯度符号检查的单纯形采样点数")
@click.option("--trials", type=int, default=100, show_default=True, help="步进方向检查的试验次数")
@click.option("--metrics", "metrics_log", type=click.Path(path_type=Path), default=None,
              help="交替训练运行的 metrics.log，额外检查条件失败率动态")
@click.option("-o", "--out", "out", type=click.Path(file_okay=False, path_type=Path), default=None, help="报告目录")
def diagnose(seed: int, draws: int, n_points: int, trials: int, metrics_log: Optional[Path], out: Optional[Path]):
    """运行梯度与调度诊断，全部通过时退出码为0，否则为2"""
    if min(draws, n_points, trials) < 1:
        raise click.UsageError("--draws, --points and --trials must be positive")
    results = run_all(seed=seed, draws=draws, n_points=n_points, trials=trials)
    if metrics_log is not None:
        history = parse_metrics_log(FileUtils.require_file(metrics_log, "metrics log").read_text(encoding="utf-8"))
        results.append(alternation_dynamics(history))

    text = render_checks(results)
    if out is not None:
        directory = FileUtils.ensure_dir(out)
        (directory / "diagnostics.txt").write_text(text, encoding="utf-8")
        write_jsonl(directory / "diagnostics.jsonl", check_records(results))
    click.echo(text, nl=False)

    failed = [result.name for result in results if not result.passed]
    if failed:
        raise CheckFailedError(f"diagnostic check(s) failed: {', '.join(failed)}", details=failed)
