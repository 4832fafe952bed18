"""
检查点读写

格式：numpy .npz 归档，每个参数按名称存为一个数组（G.0.weight、G.0.bias、...、F.weight、F.bias），
另含 __format_version__、__K__ 两个标量键。float64 原样保存，读写无损。
"""

from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from ..autodiff import Tensor
from ..core.errors import ArtifactError
from ..core.logging import logger
from .network import DadaNetwork

CHECKPOINT_FORMAT_VERSION = 1

PathLike = Union[str, Path]


def save_checkpoint(net: DadaNetwork, path: PathLike) -> Path:
    """
    保存网络参数

    Args:
        net: 网络
        path: 目标文件路径（.npz）

    Returns:
        Path: 实际写入的路径
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    arrays: Dict[str, np.ndarray] = {name: tensor.data for name, tensor in net.named_parameters().items()}
    arrays["__format_version__"] = np.array(CHECKPOINT_FORMAT_VERSION)
    arrays["__K__"] = np.array(net.K)
    with open(target, "wb") as handle:
        np.savez(handle, **arrays)
    logger.debug(f"检查点已保存: {target}")
    return target


def load_checkpoint(path: PathLike) -> DadaNetwork:
    """
    读取检查点

    Raises:
        ArtifactError: 文件不存在、版本不符或参数缺失
    """
    source = Path(path)
    if not source.exists():
        raise ArtifactError(f"checkpoint not found: {source}")

    try:
        with np.load(source, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (OSError, ValueError) as exc:
        raise ArtifactError(f"unreadable checkpoint {source}: {exc}") from exc

    version: Optional[int] = int(arrays["__format_version__"]) if "__format_version__" in arrays else None
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ArtifactError(
            f"unsupported checkpoint format version {version}, expected {CHECKPOINT_FORMAT_VERSION}",
            details={"path": str(source)},
        )

    def parameter(name: str) -> Tensor:
        if name not in arrays:
            raise ArtifactError(f"checkpoint {source} is missing parameter {name}")
        return Tensor(arrays[name], requires_grad=True, name=name)

    if "__K__" not in arrays:
        raise ArtifactError(f"checkpoint {source} does not record the category count __K__")

    n_hidden = sum(1 for name in arrays if name.startswith("G.") and name.endswith(".weight"))
    G_layers = [(parameter(f"G.{i}.weight"), parameter(f"G.{i}.bias")) for i in range(n_hidden)]
    F_layer = (parameter("F.weight"), parameter("F.bias"))
    return DadaNetwork(G_layers=G_layers, F_layer=F_layer, K=int(arrays["__K__"]))
