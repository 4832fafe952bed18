from pathlib import Path
from typing import Optional

import click

from ..core.errors import DadaError
from ..core.logging import logger
from ..schemas.config import TrainConfig
from ..services.runs import execute_run, replay_run


@click.command("train")
@click.argument("config_path", required=False, type=click.Path(path_type=Path))
@click.argument("data_path", required=False, type=click.Path(path_type=Path))
@click.option("-o", "--out", "out", required=True, type=click.Path(file_okay=False, path_type=Path), help="运行目录")
@click.option("--replay", "replay", type=click.Path(path_type=Path), help="按运行清单重新执行并比对指标日志")
@click.option("--seed", type=int, default=None, help="覆盖配置文件中的随机种子")
def train(config_path: Optional[Path], data_path: Optional[Path], out: Path, replay: Optional[Path], seed: Optional[int]):
    """
    训练模型并写出检查点、指标日志与运行清单

    \b
    dada train configs/two_moons_dada.cfg data/moons -o runs/moons
    dada train --replay runs/moons/manifest.json -o runs/moons_replay
    """
    if replay is not None:
        if config_path is not None or data_path is not None:
            raise click.UsageError("--replay takes its config and data from the manifest; drop CONFIG and DATA")
        manifest, identical = replay_run(replay, out)
        click.echo(f"replay {'identical' if identical else 'DIVERGED'}: {manifest.metrics_log_sha256}")
        if not identical:
            raise DadaError("replayed metrics log differs from the original run", error_code="replay_mismatch")
        return

    if config_path is None or data_path is None:
        raise click.UsageError("train needs CONFIG and DATA (or --replay MANIFEST)")
    config = TrainConfig.from_file(config_path)
    if seed is not None:
        config = TrainConfig.parse({**config.snapshot(), "seed": seed})
    logger.info(f"训练配置: {config_path} -> {out}")
    manifest = execute_run(config, data_path, out)
    metrics = " ".join(f"{name}={value:.4f}" for name, value in sorted(manifest.final_metrics.items()))
    click.echo(f"{out} {metrics}".rstrip())
