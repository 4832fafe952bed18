import hashlib
import os
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ArtifactError
from ..core.logging import logger
from ..schemas.metrics import MetricsRecord

PathLike = Union[str, Path]


class FileUtils:
    """文件处理工具类"""

    @staticmethod
    def ensure_dir(path: PathLike) -> Path:
        """创建目录（已存在时不报错）"""
        directory = Path(path)
        os.makedirs(directory, exist_ok=True)
        return directory

    @staticmethod
    def require_file(path: PathLike, what: str = "file") -> Path:
        """
        检查产物文件存在

        Raises:
            ArtifactError: 文件不存在
        """
        source = Path(path)
        if not source.exists():
            raise ArtifactError(f"{what} not found: {source}", details={"path": str(source)})
        return source

    @staticmethod
    def file_sha256(path: PathLike) -> str:
        digest = hashlib.sha256()
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(8192), b""):
                digest.update(chunk)
        return digest.hexdigest()

    @classmethod
    def write_curve(cls, path: PathLike, points: Iterable[Tuple[float, float]], header: str = "") -> Path:
        """
        写出两列文本曲线（x y），用于绘图

        Args:
            path: 输出文件
            points: (x, y) 序列
            header: 注释行，写在 '#' 之后

        Returns:
            Path: 输出文件路径
        """
        target = Path(path)
        cls.ensure_dir(target.parent)
        data = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
        np.savetxt(target, data, fmt="%.10g", header=header)
        logger.debug(f"写出曲线 {target} ({len(data)} 点)")
        return target

    @classmethod
    def write_metric_curves(cls, directory: PathLike, history: Sequence[MetricsRecord]) -> list:
        """按指标名拆分历史，每个指标写一条 epoch-取值 曲线"""
        curves = {}
        for record in history:
            curves.setdefault(record.name, []).append((record.epoch, record.value))
        return [
            cls.write_curve(Path(directory) / f"{name}.dat", points, header=f"epoch {name}")
            for name, points in curves.items()
        ]

    @classmethod
    def write_schedule(cls, path: PathLike, trace: Sequence[Tuple[int, float, float]]) -> Path:
        """写出每个对抗步的 (step, λ, lr)"""
        target = Path(path)
        cls.ensure_dir(target.parent)
        data = np.asarray(trace, dtype=np.float64).reshape(-1, 3)
        np.savetxt(target, data, fmt=["%d", "%.17g", "%.17g"], header="step lambda lr")
        return target
