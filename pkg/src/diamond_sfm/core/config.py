"""配置管理模块 (ConfigManager)

求解器的全部可调参数集中在不可变的 SolverSettings 中；
ConfigManager 把用户覆盖值以 TOML 格式保存在用户配置目录下，
读取用 tomllib，写入用 tomli_w。

Example:
>>> from diamond_sfm.core.config import ConfigManager, SolverSettings
>>> with ConfigManager("diamond_sfm") as cm:
...     cm.update_settings(engine="ellipsoid")
...     settings = cm.load_settings()
>>> settings.engine
'ellipsoid'
>>> SolverSettings().with_overrides(jobs=4).jobs
4
"""

import dataclasses
import tomllib
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict

import tomli_w

from ..utils.logging_utils import get_logger
from ..utils.path_utils import PathHelper
from .exceptions import ConfigError
from .validators import GenericValidator, SettingsValidator

logger = get_logger(__name__)

CONFIG_VERSION = "1.0.0"


@dataclass(frozen=True)
class SolverSettings:
    """求解器参数

    Attributes:
        enumeration_budget: 稠密枚举 (k+2)^n 的上限
        dense_dimension_budget: 稠密顶点枚举允许的最大维数 n·k
        engine: oracle 优化引擎 (cuttingplane / ellipsoid)
        sfm_backend: 集合函数最小化后端 (auto / exhaustive / minnorm)
        exhaustive_limit: 穷举后端允许的最大基集大小
        auto_exhaustive_size: auto 模式下不超过该大小时用穷举
        minnorm_max_iterations: 最小范数点算法的迭代上限
        cut_max_iterations: 割平面引擎的迭代上限
        ellipsoid_max_iterations: 椭球引擎的迭代上限
        ellipsoid_tolerance: 椭球引擎的目标精度 ("p/q")
        walk_max_iterations: 顶点改进步数上限，0 表示按界公式推导
        separation_max_rounds: 由优化求成员判定时的最大轮数
        all_minimizers_cap: 枚举全部极小点时的数量上限
        minimizer_recovery: 最小点恢复方式 (restrict / witness)
        strict_scale_retries: 严格化映射回原函数时放大倍数的重试次数
        jobs: 可并行部分的线程数
    """

    enumeration_budget: int = 20000
    dense_dimension_budget: int = 6
    engine: str = "cuttingplane"
    sfm_backend: str = "auto"
    exhaustive_limit: int = 20
    auto_exhaustive_size: int = 8
    minnorm_max_iterations: int = 5000
    cut_max_iterations: int = 2000
    ellipsoid_max_iterations: int = 20000
    ellipsoid_tolerance: str = "1/8"
    walk_max_iterations: int = 0
    separation_max_rounds: int = 500
    all_minimizers_cap: int = 4096
    minimizer_recovery: str = "restrict"
    strict_scale_retries: int = 4
    jobs: int = 1

    def __post_init__(self) -> None:
        SettingsValidator.validate_settings(self.to_dict())

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverSettings":
        """从（可能不完整的）字典构造，缺省字段取默认值

        Raises:
            ConfigError: 字段未知或取值非法
        """

        SettingsValidator.validate_settings(data, cls.field_names())
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def with_overrides(self, **overrides: Any) -> "SolverSettings":
        """返回覆盖部分字段后的新设置；值为 None 的覆盖被忽略"""

        changes = {k: v for k, v in overrides.items() if v is not None}
        SettingsValidator.validate_settings(changes, self.field_names())
        return dataclasses.replace(self, **changes)

    @property
    def tolerance(self) -> Fraction:
        return Fraction(self.ellipsoid_tolerance)


DEFAULT_SETTINGS = SolverSettings()


def handle_config_operation(operation_name: str) -> Callable:
    """把文件系统与数据错误统一转换为 ConfigError 的装饰器"""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(self, *args, **kwargs):
            try:
                return func(self, *args, **kwargs)
            except ConfigError:
                raise
            except OSError as error:
                logger.error("配置文件操作失败: %s", error)
                raise ConfigError(
                    f"{operation_name}失败: {error}",
                    "CONFIG_007",
                    config_file=str(self.config_path),
                ) from error
            except (TypeError, ValueError, tomllib.TOMLDecodeError) as error:
                logger.error("配置数据处理失败: %s", error)
                raise ConfigError(
                    f"{operation_name}失败: {error}",
                    "CONFIG_008",
                    config_file=str(self.config_path),
                ) from error

        return wrapper

    return decorator


class ConfigManager:
    """配置管理器类 (Config Manager)

    配置文件结构::

        version = "1.0.0"
        app_name = "diamond_sfm"

        [solver]
        engine = "cuttingplane"
        ...

        [metadata]
        created = "..."
        last_modified = "..."

    Example:
    >>> with ConfigManager("diamond_sfm", "settings.toml") as cm:
    ...     settings = cm.load_settings()
    """

    def __init__(
        self,
        app_name: str = "diamond_sfm",
        config_file: str = "settings.toml",
        config_dir: str | Path | None = None,
    ) -> None:
        """初始化配置管理器，首次使用时创建默认配置文件

        Args:
            app_name: 应用名称，决定默认配置目录
            config_file: 配置文件名
            config_dir: 自定义配置目录（测试用），None 使用用户配置目录

        Raises:
            ConfigError: 配置文件创建失败
        """

        self.app_name = app_name
        self.config_file = config_file
        self._config_dir = Path(config_dir) if config_dir is not None else None
        self._config_cache: Dict[str, Any] | None = None
        self._config_mtime: float | None = None
        self._ensure_config_exists()
        logger.debug("配置管理器初始化成功: %s", self.config_path)

    def __repr__(self) -> str:
        return (
            f"ConfigManager(app_name='{self.app_name}', "
            f"config_file='{self.config_file}', config_path='{self.config_path}')"
        )

    def __enter__(self) -> "ConfigManager":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.refresh_cache()

    @property
    def config_dir(self) -> Path:
        if self._config_dir is not None:
            PathHelper.ensure_dir_exists(self._config_dir)
            return self._config_dir
        return PathHelper.get_user_config_dir(self.app_name)

    @property
    def config_path(self) -> Path:
        return self.config_dir / self.config_file

    def refresh_cache(self) -> None:
        self._config_cache = None
        self._config_mtime = None

    @handle_config_operation("配置文件初始化")
    def _ensure_config_exists(self) -> None:
        if not self.config_path.exists():
            now = datetime.now().astimezone().isoformat()
            self._save_config(
                {
                    "version": CONFIG_VERSION,
                    "app_name": self.app_name,
                    "solver": {},
                    "metadata": {"created": now, "last_modified": now},
                }
            )
            logger.info("默认配置文件已创建: %s", self.config_path)

    @staticmethod
    def _validate_config(config: Dict[str, Any]) -> None:
        GenericValidator.validate_required_fields(
            config, ["version", "app_name", "solver", "metadata"], "配置文件"
        )
        if not SettingsValidator.is_valid_version_format(config["version"]):
            raise ConfigError(
                f"无效的版本号格式: {config['version']}", "CONFIG_009", config_key="version"
            )
        GenericValidator.validate_field_type(config["solver"], dict, "solver字段")
        GenericValidator.validate_field_type(config["metadata"], dict, "metadata字段")
        SettingsValidator.validate_settings(config["solver"], SolverSettings.field_names())

    @handle_config_operation("配置文件保存")
    def _save_config(self, config: Dict[str, Any]) -> None:
        config["metadata"]["last_modified"] = datetime.now().astimezone().isoformat()
        self._validate_config(config)
        PathHelper.write_text_atomic(self.config_path, tomli_w.dumps(config))
        self.refresh_cache()
        logger.debug("配置文件已保存: %s", self.config_path)

    @handle_config_operation("配置文件加载")
    def _load_config(self) -> Dict[str, Any]:
        current_mtime = self.config_path.stat().st_mtime
        if self._config_cache is not None and self._config_mtime == current_mtime:
            return self._config_cache

        with open(self.config_path, "rb") as file:
            config = tomllib.load(file)
        self._validate_config(config)

        self._config_cache = config
        self._config_mtime = current_mtime
        return config

    def load_settings(self) -> SolverSettings:
        """读取配置文件中的覆盖值并与默认值合并

        Raises:
            ConfigError: 配置文件损坏或取值非法
        """

        return SolverSettings.from_dict(dict(self._load_config()["solver"]))

    def update_settings(self, **changes: Any) -> SolverSettings:
        """校验并保存部分参数，返回合并后的设置

        Raises:
            ConfigError: 字段未知或取值非法
        """

        SettingsValidator.validate_settings(changes, SolverSettings.field_names())
        config = self._load_config()
        config = {**config, "solver": {**config["solver"], **changes}}
        self._save_config(config)
        logger.info("求解参数已更新: %s", ", ".join(sorted(changes)))
        return self.load_settings()

    def reset_settings(self) -> SolverSettings:
        """清除全部覆盖值"""

        config = self._load_config()
        self._save_config({**config, "solver": {}})
        logger.info("求解参数已重置为默认值")
        return DEFAULT_SETTINGS

    def get_config_info(self) -> Dict[str, Any]:
        config = self._load_config()
        return {
            "version": config["version"],
            "app_name": config["app_name"],
            "overrides": sorted(config["solver"]),
            "created": config["metadata"].get("created"),
            "last_modified": config["metadata"].get("last_modified"),
            "config_file": str(self.config_path),
        }
