import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pydantic
from pydantic import BaseModel, Field

from ..core.config import settings
from ..core.errors import ArtifactError, ValidationError


class ArtifactPaths(BaseModel):
    """运行产物路径（相对于运行目录）"""
    checkpoint: str = Field(default="checkpoint.npz", description="检查点文件")
    metrics_log: str = Field(default="metrics.log", description="指标日志")
    schedule_trace: str = Field(default="schedule.dat", description="调度轨迹 (step, λ, lr)")
    curves_dir: str = Field(default="curves", description="曲线数据目录")
    report: Optional[str] = Field(default="report.txt", description="评估报告")


class RunManifest(BaseModel):
    """训练运行清单：足以重放一次运行"""
    config: Dict[str, Any] = Field(..., description="训练配置快照")
    dataset_fingerprint: str = Field(..., description="数据集内容哈希 (sha256)")
    data_path: str = Field(..., description="数据集路径")
    seed: int = Field(..., description="随机种子")
    artifacts: ArtifactPaths = Field(default_factory=ArtifactPaths, description="产物路径")
    tool_version: str = Field(default=settings.TOOL_VERSION, description="工具版本")
    final_metrics: Dict[str, float] = Field(default_factory=dict, description="最终评估指标")
    metrics_log_sha256: Optional[str] = Field(default=None, description="指标日志哈希")

    def write(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(self.model_dump(mode="json"), handle, indent=2, sort_keys=True)
            handle.write("\n")
        return target

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        """
        读取运行清单

        Raises:
            ArtifactError: 文件不存在
            ValidationError: 内容不是合法的清单
        """
        source = Path(path)
        if not source.is_file():
            raise ArtifactError(f"manifest not found: {source}")
        try:
            return cls.model_validate_json(source.read_text(encoding="utf-8"))
        except pydantic.ValidationError as exc:
            raise ValidationError(f"invalid manifest {source}: {exc.error_count()} problem(s)", details=str(exc)) from None
