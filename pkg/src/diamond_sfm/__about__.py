# SPDX-FileCopyrightText: 2025-present wangquanqing <wangquanqing1636@sina.com>
#
# SPDX-License-Identifier: MIT
"""
项目版本和元数据模块

该模块包含项目的版本信息。

Attributes:
    __version__ (str): 项目的版本号，遵循语义化版本规范

Example:
    >>> from diamond_sfm.__about__ import __version__
    >>> print(f"Diamond SFM 版本: {__version__}")
"""

__version__ = "0.3.0"
