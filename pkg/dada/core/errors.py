from typing import Any, Optional


class DadaError(Exception):
    """工具包错误基类"""

    error_code: str = "internal_error"
    exit_code: int = 3

    def __init__(self, message: str, details: Optional[Any] = None, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.details = details
        if error_code is not None:
            self.error_code = error_code

    def to_dict(self) -> dict:
        """转换为与报告一致的错误结构"""
        return {
            "success": False,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ShapeError(DadaError):
    """张量形状不匹配"""

    error_code = "shape_mismatch"

    def __init__(self, op: str, left_shape: tuple, right_shape: tuple):
        super().__init__(
            f"{op}: shape mismatch between {tuple(left_shape)} and {tuple(right_shape)}",
            details={"op": op, "left": list(left_shape), "right": list(right_shape)},
        )


class DomainError(DadaError):
    """函数定义域错误（如对非正数取对数）"""

    error_code = "domain_error"


class BackwardError(DadaError):
    """反向传播调用错误"""

    error_code = "backward_error"


class DataError(DadaError):
    """数据集生成或解析错误"""

    error_code = "data_error"
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, details: Optional[Any] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, details=details)
        self.line = line


class ValidationError(DadaError):
    """配置、场景或输入校验失败"""

    error_code = "validation_error"
    exit_code = 2


class ArtifactError(DadaError):
    """所需的文件产物不存在或不可读"""

    error_code = "missing_artifact"
    exit_code = 2


class CheckFailedError(DadaError):
    """诊断检查未通过"""

    error_code = "check_failed"
    exit_code = 2
