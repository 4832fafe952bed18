import json
from pathlib import Path
from typing import List, Optional

import click
import pydantic

from ..core.logging import logger
from ..datagen import dataset_fingerprint, save_csv
from ..schemas.sweep import DatasetKind, DatasetSpec
from ..services.datasets import build_dataset

PARAMS_FILE = "params.json"


def parse_label_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    """解析逗号分隔的类别列表，如 "1,2" """
    if value is None:
        return None
    try:
        labels = [int(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'")
    if not labels:
        raise click.BadParameter("label list is empty")
    return labels


def _emit(spec_data: dict, out: Path) -> None:
    try:
        spec = DatasetSpec.model_validate(spec_data)
    except pydantic.ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors())
        raise click.UsageError(f"invalid dataset parameters: {problems}")

    pair = build_dataset(spec)
    save_csv(pair, out)
    fingerprint = dataset_fingerprint(pair)
    with open(out / PARAMS_FILE, "w", encoding="utf-8", newline="\n") as handle:
        json.dump({**spec.model_dump(mode="json"), "fingerprint": fingerprint}, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info(f"生成 {spec.kind.value} 数据集 -> {out}")
    click.echo(f"{out} {pair.scenario.value} {fingerprint}")


output_option = click.option(
    "-o", "--out", "out", type=click.Path(file_okay=False, path_type=Path), default=Path("data"),
    show_default=True, help="输出目录",
)
seed_option = click.option("--seed", type=int, default=0, show_default=True, help="随机种子")


@click.group("gen")
def gen():
    """生成合成数据集"""


@gen.command("two-moons")
@click.option("--n", "n_per_domain", type=int, required=True, help="每个领域的实例数")
@click.option("--rot", "rotation_deg", type=float, default=30.0, show_default=True, help="目标域旋转角度（度）")
@click.option("--noise", "noise_sd", type=float, default=0.1, show_default=True, help="噪声标准差")
@seed_option
@output_option
def two_moons(n_per_domain: int, rotation_deg: float, noise_sd: float, seed: int, out: Path):
    """双月数据集：目标域为源域绕中心旋转"""
    _emit(
        {"kind": DatasetKind.TWO_MOONS, "n_per_domain": n_per_domain, "rotation_deg": rotation_deg,
         "noise_sd": noise_sd, "seed": seed},
        out,
    )


def _shift(shift: tuple) -> list:
    return [float(component) for component in shift]


@gen.command("grid")
@click.option("--k", "K", type=int, default=4, show_default=True, help="类别数")
@click.option("--n-per-class", type=int, default=100, show_default=True, help="每类实例数")
@click.option("--shift", type=(float, float), default=(0.0, 0.0), show_default=True, help="目标域平移")
@click.option("--spread", type=float, default=0.3, show_default=True, help="簇标准差")
@click.option("--step", "grid_step", type=float, default=3.0, show_default=True, help="网格间距")
@click.option("--restrict-target", callback=parse_label_list, help="部分集：保留的目标域类别，如 1,2")
@click.option("--restrict-source", callback=parse_label_list, help="开放集：保留的源域类别，如 1,2,3")
@seed_option
@output_option
def grid(K, n_per_class, shift, spread, grid_step, restrict_target, restrict_source, seed, out):
    """高斯网格数据集，可裁剪为部分集或开放集"""
    if restrict_target is not None and restrict_source is not None:
        raise click.UsageError("--restrict-target and --restrict-source are mutually exclusive")
    _emit(
        {"kind": DatasetKind.GRID, "K": K, "n_per_class": n_per_class, "shift": _shift(shift), "spread": spread,
         "grid_step": grid_step, "restrict_target": restrict_target, "restrict_source": restrict_source, "seed": seed},
        out,
    )


@gen.command("open-grid")
@click.option("--k-known", "K_known", type=int, default=3, show_default=True, help="已知类别数")
@click.option("--n-per-class", type=int, default=100, show_default=True, help="每类实例数")
@click.option("--ratio", "known_to_unknown", type=float, default=1.0, show_default=True, help="目标域已知:未知实例比")
@click.option("--unknown-clusters", "n_unknown_clusters", type=int, default=1, show_default=True, help="未知簇个数")
@click.option("--shift", type=(float, float), default=(0.0, 0.0), show_default=True, help="目标域平移")
@click.option("--spread", type=float, default=0.3, show_default=True, help="簇标准差")
@click.option("--step", "grid_step", type=float, default=3.0, show_default=True, help="网格间距")
@seed_option
@output_option
def open_grid(K_known, n_per_class, known_to_unknown, n_unknown_clusters, shift, spread, grid_step, seed, out):
    """带植入未知簇的开放集网格数据集"""
    _emit(
        {"kind": DatasetKind.OPEN_GRID, "K_known": K_known, "n_per_class": n_per_class,
         "known_to_unknown": known_to_unknown, "n_unknown_clusters": n_unknown_clusters, "shift": _shift(shift),
         "spread": spread, "grid_step": grid_step, "seed": seed},
        out,
    )
