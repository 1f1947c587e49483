# SPDX-FileCopyrightText: 2025-present wangquanqing <wangquanqing1636@sina.com>
#
# SPDX-License-Identifier: MIT
"""钻石格乘积上的子模函数最小化 (Diamond SFM)"""

from .core.certify import prove, verify
from .core.config import ConfigManager, SolverSettings
from .core.exceptions import SFMError
from .core.lattice import LatticeTuple
from .core.minimize import minimize, optimize_P
from .core.oracle import CallableFunction, TabulatedFunction, brute_min
from .core.polytope import PVector

# 公共API导出列表
__all__ = [
    "prove",
    "verify",
    "ConfigManager",
    "SolverSettings",
    "SFMError",
    "LatticeTuple",
    "minimize",
    "optimize_P",
    "CallableFunction",
    "TabulatedFunction",
    "brute_min",
    "PVector",
]
