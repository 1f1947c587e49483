"""验证器模块 (Validators)

集中管理配置文件与求解参数的校验逻辑。

Example:
>>> from diamond_sfm.core.validators import SettingsValidator, GenericValidator
>>> SettingsValidator.validate_settings({"engine": "ellipsoid", "jobs": 2})
>>> GenericValidator.validate_required_fields({"n": 1}, ["n"], "实例")
"""

import re
from fractions import Fraction
from typing import Any, Dict, List

from .exceptions import ConfigError

ENGINES = ("cuttingplane", "ellipsoid")
SFM_BACKENDS = ("auto", "exhaustive", "minnorm")
RECOVERY_MODES = ("restrict", "witness")

_POSITIVE_INT_FIELDS = (
    "enumeration_budget",
    "dense_dimension_budget",
    "exhaustive_limit",
    "minnorm_max_iterations",
    "cut_max_iterations",
    "ellipsoid_max_iterations",
    "separation_max_rounds",
    "all_minimizers_cap",
    "strict_scale_retries",
    "jobs",
)
_NON_NEGATIVE_INT_FIELDS = ("auto_exhaustive_size", "walk_max_iterations")
_CHOICE_FIELDS = {
    "engine": ENGINES,
    "sfm_backend": SFM_BACKENDS,
    "minimizer_recovery": RECOVERY_MODES,
}


class SettingsValidator:
    """求解参数验证器 (Settings Validator)

    Example:
        >>> SettingsValidator.validate_settings({"engine": "cuttingplane"})
        >>> SettingsValidator.validate_settings({"engine": "simplex"})
        Traceback (most recent call last):
        ...
        ConfigError: engine 必须是 cuttingplane, ellipsoid 之一
    """

    @staticmethod
    def validate_settings(settings: Dict[str, Any], known: List[str] | None = None) -> None:
        """验证求解参数字典（可以只包含部分字段）

        Args:
            settings: 参数字典
            known: 允许出现的字段名；None 表示不检查未知字段

        Raises:
            ConfigError: 字段未知、类型错误或取值越界
        """

        if known is not None:
            unknown = sorted(set(settings) - set(known))
            if unknown:
                raise ConfigError(
                    f"未知的求解参数: {', '.join(unknown)}", "CONFIG_002", config_key=unknown[0]
                )

        for name, value in settings.items():
            if name in _POSITIVE_INT_FIELDS:
                SettingsValidator._validate_int(name, value, minimum=1)
            elif name in _NON_NEGATIVE_INT_FIELDS:
                SettingsValidator._validate_int(name, value, minimum=0)
            elif name in _CHOICE_FIELDS:
                choices = _CHOICE_FIELDS[name]
                if value not in choices:
                    raise ConfigError(
                        f"{name} 必须是 {', '.join(choices)} 之一",
                        "CONFIG_003",
                        config_key=name,
                    )
            elif name == "ellipsoid_tolerance":
                SettingsValidator.validate_tolerance(value)

    @staticmethod
    def _validate_int(name: str, value: Any, minimum: int) -> None:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} 必须是整数", "CONFIG_004", config_key=name)
        if value < minimum:
            raise ConfigError(
                f"{name} 不能小于 {minimum}", "CONFIG_005", config_key=name
            )

    @staticmethod
    def validate_tolerance(value: Any) -> Fraction:
        """ellipsoid_tolerance 必须是 (0, 1/2) 内的 "p/q" 字符串

        Raises:
            ConfigError: 格式错误或越界
        """

        if not isinstance(value, str) or not re.fullmatch(r"\s*\d+\s*(/\s*\d+\s*)?", value):
            raise ConfigError(
                "ellipsoid_tolerance 必须写成 p/q 形式", "CONFIG_006", config_key="ellipsoid_tolerance"
            )
        try:
            tolerance = Fraction(value.replace(" ", ""))
        except ZeroDivisionError as error:
            raise ConfigError(
                "ellipsoid_tolerance 的分母不能为 0", "CONFIG_006", config_key="ellipsoid_tolerance"
            ) from error
        if not 0 < tolerance < Fraction(1, 2):
            raise ConfigError(
                "ellipsoid_tolerance 必须在 (0, 1/2) 内",
                "CONFIG_006",
                config_key="ellipsoid_tolerance",
            )
        return tolerance

    @staticmethod
    def is_valid_version_format(version: Any) -> bool:
        """x.y.z 语义化版本号，不允许前导零"""

        if not isinstance(version, str):
            return False
        return re.fullmatch(r"(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)", version) is not None


class GenericValidator:
    """通用验证器 (Generic Validator)

    Example:
        >>> GenericValidator.validate_required_fields({"n": 2}, ["n", "k"], "实例")
        Traceback (most recent call last):
        ...
        ConfigError: 实例缺少必需字段: k
    """

    @staticmethod
    def validate_required_fields(
        data: Dict[str, Any], required_fields: List[str], context: str = ""
    ) -> None:
        """验证必需字段是否存在

        Raises:
            ConfigError: 缺少必需字段
        """

        for field in required_fields:
            if field not in data:
                raise ConfigError(
                    f"{context}缺少必需字段: {field}", "CONFIG_001", config_key=field
                )

    @staticmethod
    def validate_field_type(value: Any, expected_type: type, field_name: str) -> None:
        """验证字段类型

        Raises:
            ConfigError: 类型不匹配
        """

        if not isinstance(value, expected_type):
            raise ConfigError(
                f"{field_name}必须是{expected_type.__name__}类型",
                "CONFIG_004",
                config_key=field_name,
            )
