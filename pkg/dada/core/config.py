"""
配置文件
如果在 .env 文件中配置了相同的变量名, 则以 .env 文件中的配置为准
"""

import os
from typing import Annotated, List
from pydantic import AliasChoices, Field, computed_field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .. import __version__


class Settings(BaseSettings):
    """应用配置类，使用Pydantic V2语法"""

    # 应用信息
    APP_NAME: str = "dada-toolkit"
    TOOL_VERSION: str = __version__

    # 日志配置（环境变量 DADA_LOG=debug|info）
    LOG_LEVEL: Annotated[str, Field(default="INFO", validation_alias=AliasChoices("DADA_LOG", "LOG_LEVEL"))]

    # 数据目录
    DATA_DIR: str = os.path.abspath(os.path.join(os.path.dirname(__file__), "../../data"))
    RUNS_DIR: str = os.path.abspath(os.path.join(os.path.dirname(__file__), "../../runs"))

    # 数值配置
    CLAMP_EPS: float = 1e-12
    GRADCHECK_STEP: float = 1e-5

    # 默认网络结构（逗号分隔的隐藏层宽度）
    DEFAULT_HIDDEN_DIMS: str = "64,64"

    # 扫描任务并行进程数
    SWEEP_N_JOBS: int = 1

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        populate_by_name=True,
        extra="ignore",
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_log_level(cls, value: str) -> str:
        """将日志级别统一为大写，并校验取值"""
        level = value.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ValueError(f"Invalid log level '{value}'. Valid values are: debug, info, warning, error")
        return level

    @computed_field
    @property
    def HIDDEN_DIMS(self) -> List[int]:
        """获取默认隐藏层宽度列表，将逗号分隔的字符串转换为列表"""
        return [int(width.strip()) for width in self.DEFAULT_HIDDEN_DIMS.split(",") if width.strip()]


# 创建全局设置对象
settings = Settings()
