"""日志配置管理模块 (Logging Utilities)

为求解器提供统一的日志配置：滚动文件日志、可选的控制台输出（stderr，
stdout 保留给 JSON 报告）、错误日志分离以及运行期级别调整。

Example:
>>> from diamond_sfm.utils.logging_utils import setup_logging, get_logger
>>>
>>> logger = setup_logging(app_name="diamond_sfm", level="INFO")
>>> logger.info("求解器启动")
>>>
>>> module_logger = get_logger(__name__)
>>> module_logger.debug("二分区间 [%s, %s]", -4, 0)
"""

import logging
import logging.handlers
import sys
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List

from .path_utils import PathHelper

DEFAULT_APP_NAME = "diamond_sfm"

DEFAULT_LOG_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - %(message)s "
    + "[%(filename)s:%(lineno)d]"
)

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


@dataclass
class _HandlerPlan:
    """一次 setup_logging 调用需要安装的 handler 描述"""

    log_level: int
    formatter: logging.Formatter
    log_file: Path
    error_log_file: Path
    log_to_file: bool
    log_to_console: bool
    separate_error_log: bool
    max_file_size: int
    backup_count: int


def setup_logging(**kwargs) -> logging.Logger:
    """配置并初始化日志系统

    Args:
        app_name: 应用名称（同时是根 logger 名称），默认 "diamond_sfm"
        level: 日志级别（DEBUG, INFO, WARNING, ERROR, CRITICAL），默认 INFO
        log_to_console: 是否输出到控制台 (stderr)，默认 False
        log_to_file: 是否输出到文件，默认 True
        max_file_size: 单个日志文件最大字节数，默认 10MB
        backup_count: 保留的备份日志文件数量，默认 5
        log_format: 自定义格式字符串，None 使用默认
        log_dir: 自定义日志目录，None 使用用户配置目录下的 logs
        separate_error_log: 是否单独写一份错误日志，默认 True

    Returns:
        logging.Logger: 配置好的 logger

    Raises:
        ValueError: 日志级别无效或没有启用任何输出
        OSError: 无法创建日志目录或文件
    """

    config = {
        "app_name": DEFAULT_APP_NAME,
        "level": "INFO",
        "log_to_console": False,
        "log_to_file": True,
        "max_file_size": 10 * 1024 * 1024,
        "backup_count": 5,
        "log_format": None,
        "log_dir": None,
        "separate_error_log": True,
        **kwargs,
    }

    if not (config["log_to_file"] or config["log_to_console"]):
        raise ValueError("至少需要启用一种日志输出方式（控制台或文件）")

    app_name = config["app_name"]
    log_dir = _get_log_dir_path(app_name, config["log_dir"])
    if config["log_to_file"]:
        PathHelper.ensure_dir_exists(log_dir)

    plan = _HandlerPlan(
        log_level=_validate_log_level(config["level"]),
        formatter=logging.Formatter(config["log_format"] or DEFAULT_LOG_FORMAT),
        log_file=log_dir / f"{app_name}.log",
        error_log_file=log_dir / f"{app_name}_error.log",
        log_to_file=config["log_to_file"],
        log_to_console=config["log_to_console"],
        separate_error_log=config["separate_error_log"],
        max_file_size=config["max_file_size"],
        backup_count=config["backup_count"],
    )

    logger = logging.getLogger(app_name)
    logger.setLevel(plan.log_level)
    _remove_handlers(logger)
    for handler in _build_handlers(plan):
        logger.addHandler(handler)

    logger.debug(
        "日志系统初始化完成 - 应用: %s, 级别: %s, 文件: %s",
        app_name,
        logging.getLevelName(plan.log_level),
        plan.log_file if plan.log_to_file else "-",
    )
    return logger


def _validate_log_level(level: str) -> int:
    """验证并转换日志级别（不区分大小写）

    Raises:
        ValueError: 日志级别无效
    """

    level_upper = str(level).upper()
    if level_upper not in VALID_LOG_LEVELS:
        raise ValueError(f"无效的日志级别: '{level}'，有效值为: {VALID_LOG_LEVELS}")
    return logging.getLevelName(level_upper)


def _get_log_dir_path(app_name: str, log_dir: str | None) -> Path:
    """日志目录：自定义目录，或 <用户配置目录>/logs"""

    if log_dir is None:
        return PathHelper.get_user_config_dir(app_name) / "logs"
    return Path(log_dir)


def _remove_handlers(logger: logging.Logger) -> None:
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()


def _rotating(path: Path, plan: _HandlerPlan, level: int) -> logging.Handler:
    try:
        handler = logging.handlers.RotatingFileHandler(
            filename=str(path),
            maxBytes=plan.max_file_size,
            backupCount=plan.backup_count,
            encoding="utf-8",
        )
    except PermissionError as error:
        raise PermissionError(f"没有权限写入日志文件 {path}: {error}") from error
    except OSError as error:
        raise OSError(f"无法创建日志文件 {path}: {error}") from error
    handler.setFormatter(plan.formatter)
    handler.setLevel(level)
    return handler


def _build_handlers(plan: _HandlerPlan) -> List[logging.Handler]:
    """按计划创建 handler 列表"""

    handlers: List[logging.Handler] = []
    if plan.log_to_file:
        handlers.append(_rotating(plan.log_file, plan, plan.log_level))
        if plan.separate_error_log and plan.log_level <= logging.ERROR:
            handlers.append(_rotating(plan.error_log_file, plan, logging.ERROR))
    if plan.log_to_console:
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(plan.formatter)
        console.setLevel(plan.log_level)
        handlers.append(console)
    return handlers


def get_logger(name: str) -> logging.Logger:
    """获取指定名称的 logger（通常传入 __name__）"""

    return logging.getLogger(name)


def set_log_level(logger_name: str, level: str) -> None:
    """动态调整 logger 及其全部 handler 的级别

    错误日志 handler 保持 ERROR 级别不变。

    Example:
    >>> set_log_level("diamond_sfm", "DEBUG")
    """

    log_level = _validate_log_level(level)
    logger = get_logger(logger_name)
    logger.setLevel(log_level)
    for handler in logger.handlers:
        if handler.level != logging.ERROR or log_level > logging.ERROR:
            handler.setLevel(log_level)


class LogManager:
    """日志管理器 (Log Manager)

    面向对象地管理一次运行的日志：初始化、追加 trace 文件、清理。
    CLI 的 ``--log-file`` 通过它把 DEBUG 级别的迭代记录写入单独的文件。

    Example:
    >>> manager = LogManager("diamond_sfm")
    >>> manager.setup(level="DEBUG", log_to_console=True)
    >>> manager.add_file_handler("trace.log", level="DEBUG")
    >>> manager.cleanup()
    """

    def __init__(self, app_name: str = DEFAULT_APP_NAME) -> None:
        self.app_name = app_name
        self.logger = get_logger(f"{__name__}.LogManager")
        self._handlers: List[logging.Handler] = []
        self._lock = threading.Lock()

    def setup(self, **kwargs: Any) -> logging.Logger:
        """调用 setup_logging 配置本应用的日志"""

        return setup_logging(app_name=self.app_name, **kwargs)

    def add_file_handler(self, log_file: str | Path, **kwargs) -> logging.Handler:
        """添加额外的滚动文件 handler

        Args:
            log_file: 日志文件路径
            level: 日志级别（可选）
            max_size: 最大文件大小（字节），默认 10MB
            backup_count: 备份数量，默认 5
        """

        handler = logging.handlers.RotatingFileHandler(
            filename=str(log_file),
            maxBytes=kwargs.get("max_size", 10 * 1024 * 1024),
            backupCount=kwargs.get("backup_count", 5),
            encoding="utf-8",
        )
        handler.setFormatter(logging.Formatter(DEFAULT_LOG_FORMAT))
        if kwargs.get("level") is not None:
            handler.setLevel(_validate_log_level(kwargs["level"]))

        with self._lock:
            logging.getLogger(self.app_name).addHandler(handler)
            self._handlers.append(handler)
        self.logger.debug("添加文件handler: %s", log_file)
        return handler

    def cleanup(self) -> None:
        """移除并关闭本管理器添加的全部 handler"""

        with self._lock:
            logger = logging.getLogger(self.app_name)
            for handler in self._handlers:
                logger.removeHandler(handler)
                handler.close()
            count = len(self._handlers)
            self._handlers.clear()
        self.logger.debug("已清理 %s 个 handler", count)

    def get_loggers_info(self) -> Dict[str, Dict[str, Any]]:
        """返回本应用下各 logger 的级别与 handler 数量"""

        info: Dict[str, Dict[str, Any]] = {}
        for name in list(logging.getLogger().manager.loggerDict):
            if not name.startswith(self.app_name):
                continue
            logger = logging.getLogger(name)
            info[name] = {
                "level": logging.getLevelName(logger.level),
                "handlers": len(logger.handlers),
                "propagate": logger.propagate,
            }
        return info
