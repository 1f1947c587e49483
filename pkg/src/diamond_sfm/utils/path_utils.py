"""路径处理工具模块 (Path Utilities)

提供跨平台的用户配置目录定位，以及实例、向量、证书等 JSON 文件的
读写辅助（原子写入、扩展名检查）。

Example:
>>> from diamond_sfm.utils.path_utils import PathHelper
>>>
>>> config_dir = PathHelper.get_user_config_dir("diamond_sfm")
>>> print(config_dir)
Windows: C:/Users/username/AppData/Roaming/diamond_sfm
macOS: /Users/username/Library/Application Support/diamond_sfm
Linux: /home/username/.config/diamond_sfm
>>>
>>> PathHelper.write_text_atomic("cert.json", "{}")
"""

import os
import platform
import tempfile
from pathlib import Path

CONFIG_DIR_ENV = "DIAMOND_SFM_HOME"

_ERROR_MSG_PATH_EMPTY = "路径不能为空"
_ERROR_MSG_APP_NAME_EMPTY = "应用名称不能为空且必须是字符串"
_ERROR_MSG_EXTENSIONS_EMPTY = "扩展名列表不能为空"


class PathHelper:
    """路径处理工具类 (Path Helper)

    所有方法均为静态方法，不需要实例化。
    """

    @staticmethod
    def ensure_dir_exists(dir_path: str | Path) -> bool:
        """确保目录存在，必要时递归创建

        Returns:
            bool: 目录是新创建的返回 True，已存在返回 False

        Raises:
            ValueError: 路径为空
            OSError: 无法创建目录
        """

        if not dir_path:
            raise ValueError(_ERROR_MSG_PATH_EMPTY)

        path = Path(dir_path)
        if path.is_dir():
            return False
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as error:
            raise OSError(f"无法创建目录 {path}: {error}") from error
        return True

    @staticmethod
    def get_user_config_dir(app_name: str) -> Path:
        """获取（并创建）用户配置目录

        环境变量 DIAMOND_SFM_HOME 优先；否则按平台约定选择目录，
        目录无法创建时回退到当前目录下的 .<app_name>。

        Raises:
            ValueError: 应用名为空或非字符串
            OSError: 回退目录也无法创建
        """

        if not app_name or not isinstance(app_name, str):
            raise ValueError(_ERROR_MSG_APP_NAME_EMPTY)

        override = os.environ.get(CONFIG_DIR_ENV)
        if override:
            base_dir = Path(override)
        else:
            system = platform.system().lower()
            if system == "windows":
                base_dir = Path(os.environ.get("APPDATA", Path.home()))
            elif system == "darwin":
                base_dir = Path.home() / "Library" / "Application Support"
            else:
                base_dir = Path(
                    os.environ.get("XDG_CONFIG_HOME", Path.home() / ".config")
                )

        config_dir = base_dir / app_name
        try:
            config_dir.mkdir(parents=True, exist_ok=True)
            return config_dir
        except OSError:
            fallback_dir = Path.cwd() / f".{app_name}"
            try:
                fallback_dir.mkdir(exist_ok=True)
                return fallback_dir
            except OSError as error:
                raise OSError(f"无法创建配置目录: {error}") from error

    @staticmethod
    def has_file_extension(file_path: str | Path, extensions: str | list[str]) -> bool:
        """检查文件扩展名（不区分大小写，带不带点均可）

        Example:
        >>> PathHelper.has_file_extension("e2.JSON", "json")
        True
        """

        if not extensions:
            raise ValueError(_ERROR_MSG_EXTENSIONS_EMPTY)
        if isinstance(extensions, str):
            extensions = [extensions]
        suffix = Path(file_path).suffix.lower()
        wanted = {ext.lower() if ext.startswith(".") else f".{ext.lower()}" for ext in extensions}
        return suffix in wanted

    @staticmethod
    def read_text(file_path: str | Path) -> str:
        """以 UTF-8 读取文本文件

        Raises:
            ValueError: 路径为空
            OSError: 文件不存在或无法读取
        """

        if not file_path:
            raise ValueError(_ERROR_MSG_PATH_EMPTY)
        return Path(file_path).read_text(encoding="utf-8")

    @staticmethod
    def write_text_atomic(file_path: str | Path, content: str) -> Path:
        """原子写入文本文件：先写同目录临时文件，再替换目标

        写入失败时目标文件保持原样。

        Returns:
            Path: 目标文件的绝对路径
        """

        if not file_path:
            raise ValueError(_ERROR_MSG_PATH_EMPTY)

        target = Path(file_path).expanduser().resolve()
        PathHelper.ensure_dir_exists(target.parent)
        fd, tmp_name = tempfile.mkstemp(
            dir=str(target.parent), prefix=f".{target.name}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(content)
            os.replace(tmp_name, target)
        except OSError:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        return target
