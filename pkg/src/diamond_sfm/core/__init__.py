"""子模最小化核心模块 (Core)"""

from .certify import Certificate, Verdict, deserialize, prove, serialize, verify
from .config import DEFAULT_SETTINGS, ConfigManager, SolverSettings
from .exceptions import (
    BudgetExceededError,
    CertificateError,
    ConfigError,
    EngineError,
    FaceEmptyError,
    FileSystemError,
    LatticeError,
    MinimizationError,
    OracleError,
    SetSFMError,
    SFMError,
    ValidationError,
)
from .greedy import GreedyResult, dual_lower_bound, greedy_base, minmax_dual
from .lattice import DiamondElement, LatticeTuple, enumerate_tuples
from .minimize import (
    MinimizationResult,
    OptimizationResult,
    chain_separate,
    face_optimize,
    improve_vertex,
    improving_direction,
    minimize,
    optimize_P,
    recover_tight_chain,
    separate_zero,
)
from .oracle import (
    CallableFunction,
    OracleFunction,
    TabulatedFunction,
    brute_min,
    is_submodular,
    random_submodular,
)
from .polytope import PVector, TightChain

# 公共API导出列表
__all__ = [
    "Certificate",
    "Verdict",
    "deserialize",
    "prove",
    "serialize",
    "verify",
    "DEFAULT_SETTINGS",
    "ConfigManager",
    "SolverSettings",
    "BudgetExceededError",
    "CertificateError",
    "ConfigError",
    "EngineError",
    "FaceEmptyError",
    "FileSystemError",
    "LatticeError",
    "MinimizationError",
    "OracleError",
    "SetSFMError",
    "SFMError",
    "ValidationError",
    "GreedyResult",
    "dual_lower_bound",
    "greedy_base",
    "minmax_dual",
    "DiamondElement",
    "LatticeTuple",
    "enumerate_tuples",
    "MinimizationResult",
    "OptimizationResult",
    "chain_separate",
    "face_optimize",
    "improve_vertex",
    "improving_direction",
    "minimize",
    "optimize_P",
    "recover_tight_chain",
    "separate_zero",
    "CallableFunction",
    "OracleFunction",
    "TabulatedFunction",
    "brute_min",
    "is_submodular",
    "random_submodular",
    "PVector",
    "TightChain",
]
