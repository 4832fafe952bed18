from typing import Optional

from ..core.logging import logger
from ..datagen import (
    DatasetPair, make_gaussian_grid, make_open_set_grid, make_two_moons, restrict_label_space,
)
from ..schemas.sweep import DatasetKind, DatasetSpec


def build_dataset(spec: DatasetSpec, seed: Optional[int] = None) -> DatasetPair:
    """
    按参数生成数据对，并按需裁剪标签空间

    Args:
        spec: 数据集参数
        seed: 覆盖 spec.seed

    Returns:
        DatasetPair: 生成的数据对
    """
    seed = spec.seed if seed is None else seed
    if spec.kind == DatasetKind.TWO_MOONS:
        pair = make_two_moons(spec.n_per_domain, spec.rotation_deg, spec.noise_sd, seed)
    elif spec.kind == DatasetKind.GRID:
        pair = make_gaussian_grid(spec.K, spec.n_per_class, spec.shift, spec.spread, seed, spec.grid_step)
    else:
        pair = make_open_set_grid(
            spec.K_known, spec.n_per_class, spec.known_to_unknown, spec.n_unknown_clusters,
            spec.shift, spec.spread, seed, spec.grid_step,
        )

    target_selection, source_selection = spec.target_selection(), spec.source_selection()
    if target_selection is not None:
        pair = restrict_label_space(pair, target_labels=target_selection)
    elif source_selection is not None:
        pair = restrict_label_space(pair, source_labels=source_selection)
    logger.debug(f"数据集 {spec.kind.value}: scenario={pair.scenario.value}, seed={seed}")
    return pair
