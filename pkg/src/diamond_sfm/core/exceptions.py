"""子模最小化自定义异常模块 (Exceptions)

提供项目专用的异常类层次结构，按照出错的环节（参数、oracle、
求解引擎、证书等）进行组织，便于调用方精确捕获与分类处理。

异常类层次结构：
SFMError
├── ConfigError (配置相关异常)
├── ValidationError (参数/维度校验异常)
│   └── LatticeError (格元素与元组异常)
├── OracleError (oracle 求值异常)
├── BudgetExceededError (枚举/迭代预算超限)
├── SetSFMError (集合函数最小化异常)
├── EngineError (线性规划与 oracle 优化引擎异常)
│   └── FaceEmptyError (面为空)
├── MinimizationError (最小化流水线内部一致性异常)
├── CertificateError (证书结构异常)
└── FileSystemError (文件系统操作异常)

Example:
>>> from diamond_sfm.core.exceptions import SFMError, LatticeError
>>> try:
...     raise LatticeError("k 值不一致", "LATTICE_002", expected_k=3, actual_k=4)
... except SFMError as error:
...     print(error)
...     error_dict = error.to_dict()
"""

from typing import Any, Dict


class SFMError(Exception):
    """子模最小化基础异常类 (SFM Error)

    所有自定义异常的基类，提供统一的异常处理接口。
    支持错误代码、详细信息和字典格式转换。

    Attributes:
        message (str): 异常描述信息
        error_code (str | None): 错误代码，格式为"模块_编号"
        details (Dict[str, Any]): 详细的错误信息字典

    Example:
        >>> try:
        ...     raise SFMError("测试异常", "TEST_001", {"key": "value"})
        ... except SFMError as error:
        ...     print(error.to_dict())
        {'error_type': 'SFMError', 'message': '测试异常',
         'error_code': 'TEST_001', 'details': {'key': 'value'}}
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
    ) -> None:
        """初始化基础异常

        Args:
            message: 异常描述信息
            error_code: 错误代码
            details: 详细的错误信息字典
        """

        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = dict(details or {})

    def __str__(self) -> str:
        """返回异常的字符串表示

        Example:
            >>> str(SFMError("预算不足", "BUDGET_001"))
            'SFMError: 预算不足 (错误代码: BUDGET_001)'
        """

        base_str = f"{self.__class__.__name__}: {self.message}"
        if self.error_code:
            base_str += f" (错误代码: {self.error_code})"
        return base_str

    def to_dict(self) -> Dict[str, Any]:
        """将异常信息转换为字典格式，便于 JSON 输出和日志记录

        Returns:
            Dict[str, Any]: 包含异常信息的字典
        """

        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }

    def _attach(self, fields: Dict[str, Any], names: tuple) -> None:
        """把关键字参数中的上下文字段挂到实例属性和 details 上

        未提供（None）的字段只设置属性，不写入 details。
        """

        for name in names:
            value = fields.get(name)
            setattr(self, name, value)
            if value is not None:
                self.details[name] = value


class ConfigError(SFMError):
    """配置相关异常 (Config Error)

    处理配置文件读取、解析、校验过程中出现的错误。

    Attributes:
        config_file (str | None): 相关的配置文件路径
        config_key (str | None): 相关的配置键名称
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("config_file", "config_key"))


class ValidationError(SFMError):
    """参数校验异常 (Validation Error)

    输入的维度、取值范围或格式不满足约定时抛出，对应命令行退出码 2。

    Attributes:
        field_name (str | None): 出错的字段名
        expected (Any): 期望的取值或类型描述
        actual (Any): 实际的取值
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("field_name", "expected", "actual"))


class LatticeError(ValidationError):
    """格元素与元组异常 (Lattice Error)

    混用不同 k 的元素、原子编号越界、元组长度不一致等情况。
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details, **kwargs)
        self._attach(kwargs, ("expected_k", "actual_k"))


class OracleError(SFMError):
    """oracle 求值异常 (Oracle Error)

    包括缺失的函数值、64 位整数溢出以及非子模输入。

    Attributes:
        tuple_text (str | None): 出错元组的文本编码
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("tuple_text",))


class BudgetExceededError(SFMError):
    """预算超限异常 (Budget Exceeded Error)

    枚举规模或迭代次数超过配置上限时抛出。

    Attributes:
        budget (int | None): 配置的上限
        required (int | None): 实际需要的规模
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("budget", "required"))


class SetSFMError(SFMError):
    """集合函数最小化异常 (Set SFM Error)

    最小范数点算法超过迭代上限、极小值枚举爆炸等。
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("backend", "ground_size"))


class EngineError(SFMError):
    """求解引擎异常 (Engine Error)

    Attributes:
        engine (str | None): 引擎名称 (cuttingplane / ellipsoid / simplex)
        iterations (int | None): 失败时已执行的迭代次数
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("engine", "iterations"))


class FaceEmptyError(EngineError):
    """面为空 (Face Empty Error)"""


class MinimizationError(SFMError):
    """最小化流水线内部一致性异常 (Minimization Error)

    例如恢复出的紧元组集合不是链、改进步长不足 1/2 等，
    这些情况意味着输入并非子模或实现存在缺陷。

    Attributes:
        stage (str | None): 出错的流水线阶段
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("stage",))


class CertificateError(SFMError):
    """证书结构异常 (Certificate Error)

    证书文件缺字段、版本未知、字段类型不符等结构性问题。
    语义上的拒绝不是异常，而是 Verdict 结果。

    Attributes:
        problems (list | None): 逐字段列出的问题
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("problems",))


class FileSystemError(SFMError):
    """文件系统操作异常 (File System Error)

    Attributes:
        file_path (str | None): 相关的文件路径
        operation (str | None): 执行的操作类型 (read / write)
    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: Dict[str, Any] | None = None,
        **kwargs,
    ) -> None:
        super().__init__(message, error_code, details)
        self._attach(kwargs, ("file_path", "operation"))
