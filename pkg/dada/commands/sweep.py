from pathlib import Path
from typing import Optional

import click

from ..schemas.sweep import SweepSpec
from ..services.sweep import run_sweep
from ..utils.helpers import FileUtils
from ..utils.report import render_sweep, sweep_records, write_jsonl


@click.command("sweep")
@click.argument("spec_path", type=click.Path(path_type=Path))
@click.option("-o", "--out", "out", type=click.Path(file_okay=False, path_type=Path), default=None, help="扫描表目录")
@click.option("--jobs", "n_jobs", type=int, default=None, help="并行进程数")
def sweep(spec_path: Path, out: Optional[Path], n_jobs: Optional[int]):
    """
    按扫描描述（JSON）在多个种子上训练，输出每个参数取值的指标均值与标准差
    """
    spec = SweepSpec.read(spec_path)
    if not spec.seeds:
        raise click.UsageError(f"sweep spec {spec_path} lists no seeds")

    rows = run_sweep(spec, n_jobs=n_jobs)
    text = render_sweep(spec.knob.name, rows, spec.metrics)
    if out is not None:
        directory = FileUtils.ensure_dir(out)
        (directory / "sweep.txt").write_text(text, encoding="utf-8")
        write_jsonl(directory / "sweep.jsonl", sweep_records(spec.knob.name, rows))
    click.echo(text, nl=False)
