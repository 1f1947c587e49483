"""命令行界面模块 (CLI Core)

把求解器的各项功能包装成子命令：精确最小化、暴力最小化、贪心基向量、
P_M(f) 上的线性优化、证书生成与验证、子模性检查和随机实例生成。

标准输出只打印一个 JSON 对象（命令结果加上 report 运行报告），
人类可读的 ✅/❌ 摘要写到标准错误。退出码：0 成功，1 语义失败
（证书被拒绝、函数不是子模的），2 输入格式或结构错误。

Example:
>>> from diamond_sfm.cli_core import SFMCommandLine
>>> cli = SFMCommandLine()
>>> # 命令行用法:
>>> # sfm minimize --instance e2.json
>>> # sfm certify --instance e2.json --out cert.json
>>> # sfm verify --instance e2.json --cert cert.json
>>> # sfm generate --n 2 --k 3 --seed 7 --out f.json
"""

import argparse
import functools
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

from .__about__ import __version__
from .core.certify import deserialize, prove, serialize, verify
from .core.config import ConfigManager, SolverSettings
from .core.exceptions import (
    BudgetExceededError,
    CertificateError,
    ConfigError,
    FileSystemError,
    SFMError,
    ValidationError,
)
from .core.greedy import dual_lower_bound, greedy_base
from .core.minimize import minimize, optimize_P
from .core.oracle import (
    DEFAULT_PAIR_BUDGET,
    TabulatedFunction,
    brute_min,
    is_submodular,
    normalize,
    random_submodular,
)
from .core.polytope import PVector, apply
from .core.rational import format_fraction
from .utils.logging_utils import get_logger
from .utils.path_utils import PathHelper

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

STRUCTURAL_ERRORS = (ValidationError, CertificateError, ConfigError, FileSystemError)


@dataclass
class RunReport:
    """一次命令运行的报告"""

    command: str
    digest: str | None = None
    oracle_calls: int = 0
    wall_time: float = 0.0
    engine: str | None = None
    seed: int | None = None
    results: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "instance_digest": self.digest,
            "oracle_calls": self.oracle_calls,
            "wall_time": round(self.wall_time, 6),
            "engine": self.engine,
            "seed": self.seed,
            **self.results,
        }


def _command(name: str) -> Callable:
    """子命令装饰器：计时、输出 JSON、把异常映射为退出码"""

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(self: "SFMCommandLine", args: argparse.Namespace) -> int:
            report = RunReport(command=name, seed=getattr(args, "seed", None))
            started = time.perf_counter()
            try:
                code, payload, summary = func(self, args, report)
            except STRUCTURAL_ERRORS as error:
                logger.error("%s 失败: %s", name, error)
                print(f"❌ {name} 失败: {error}", file=sys.stderr)
                return EXIT_INVALID
            except (json.JSONDecodeError, UnicodeDecodeError) as error:
                logger.error("%s 输入不是合法的 JSON: %s", name, error)
                print(f"❌ 输入不是合法的 JSON: {error}", file=sys.stderr)
                return EXIT_INVALID
            except SFMError as error:
                logger.error("%s 失败: %s", name, error)
                print(f"❌ {name} 失败: {error}", file=sys.stderr)
                return EXIT_FAILED
            report.wall_time = time.perf_counter() - started
            print(json.dumps({**payload, "report": report.to_json()}, ensure_ascii=False, indent=2))
            print(("✅ " if code == EXIT_OK else "❌ ") + summary, file=sys.stderr)
            return code

        return wrapper

    return decorator


class SFMCommandLine:
    """命令行接口主类 (SFM Command Line)

    求解参数在首次使用时从用户配置文件读取，再按命令行选项覆盖。

    Example:
    >>> cli = SFMCommandLine()
    >>> cli.minimize_instance(args)
    """

    def __init__(
        self, settings: SolverSettings | None = None, config_dir: str | None = None
    ) -> None:
        self._settings = settings
        self._config_dir = config_dir

    def show_version(self, _args: argparse.Namespace) -> int:
        print(f"diamond-sfm 版本: {__version__}")
        print("钻石格乘积上的子模函数最小化")
        print("许可证: MIT")
        return EXIT_OK

    def _ensure_settings(self) -> SolverSettings:
        """延迟读取配置文件；结果缓存在实例上

        Raises:
            ConfigError: 配置文件损坏或取值非法
        """

        if self._settings is None:
            with ConfigManager(config_dir=self._config_dir) as manager:
                self._settings = manager.load_settings()
        return self._settings

    def _settings_for(self, args: argparse.Namespace) -> SolverSettings:
        return self._ensure_settings().with_overrides(
            engine=getattr(args, "engine", None),
            enumeration_budget=getattr(args, "budget", None),
            jobs=getattr(args, "jobs", None),
        )

    @staticmethod
    def _read_json(path: str) -> Any:
        try:
            return json.loads(PathHelper.read_text(path))
        except OSError as error:
            raise FileSystemError(
                f"无法读取文件: {path}", "FS_001", file_path=path, operation="read"
            ) from error

    @staticmethod
    def _write_text(path: str, content: str) -> None:
        try:
            PathHelper.write_text_atomic(path, content)
        except OSError as error:
            raise FileSystemError(
                f"无法写入文件: {path}", "FS_002", file_path=path, operation="write"
            ) from error

    def _load_instance(self, args: argparse.Namespace, report: RunReport) -> TabulatedFunction:
        f = TabulatedFunction.from_json(self._read_json(args.instance))
        report.digest = f.digest()
        return f

    @_command("minimize")
    def minimize_instance(self, args: argparse.Namespace, report: RunReport):
        """精确最小化（不做稠密枚举）"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        result = minimize(f, settings, emit_dual=bool(args.emit_dual), trace=args.trace)
        payload = result.to_json()
        if args.emit_dual:
            self._write_text(args.emit_dual, json.dumps(result.dual.to_json(), ensure_ascii=False, indent=2))
            payload.pop("dual", None)
            payload["dual_file"] = args.emit_dual
        report.engine = settings.engine
        report.oracle_calls = f.call_count
        report.results = {"separations": result.separations}
        return EXIT_OK, payload, f"最小值 {result.value}，最小点 {result.minimizer.text()}"

    @_command("brute")
    def brute_instance(self, args: argparse.Namespace, report: RunReport):
        """暴力枚举最小值"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        value, t = brute_min(f, settings.enumeration_budget, settings.jobs)
        report.oracle_calls = f.call_count
        return EXIT_OK, {"min": value, "argmin": t.text()}, f"最小值 {value}，最小点 {t.text()}"

    @_command("greedy")
    def greedy_instance(self, args: argparse.Namespace, report: RunReport):
        """贪心基向量、对偶下界以及紧链上每个元组的紧性"""

        f = self._load_instance(args, report)
        g = normalize(f)
        greedy = greedy_base(g)
        bound = dual_lower_bound(g) + f(f.bottom())
        tightness = []
        for t in greedy.tight_chain:
            value, limit = apply(greedy.vector, t), g(t)
            tightness.append(
                {"tuple": t.text(), "value": format_fraction(value), "f": limit, "tight": value == limit}
            )
        report.oracle_calls = f.call_count
        payload = {**greedy.to_json(), "lower_bound": bound, "tightness": tightness}
        loose = [item["tuple"] for item in tightness if not item["tight"]]
        if loose:
            logger.warning("贪心向量在 %s 上不紧（函数可能不是子模的）", loose)
            return EXIT_FAILED, payload, f"贪心向量在 {loose} 上不紧"
        return EXIT_OK, payload, f"贪心下界 {bound}，紧链 {len(tightness)} 个元组全部紧"

    @_command("optimize")
    def optimize_instance(self, args: argparse.Namespace, report: RunReport):
        """在 P_M(f) 上最大化线性目标"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        objective = PVector.from_json(self._read_json(args.objective))
        result = optimize_P(objective, f, settings)
        report.engine = settings.engine
        report.oracle_calls = f.call_count
        return EXIT_OK, result.to_json(), f"状态 {result.status}"

    @_command("certify")
    def certify_instance(self, args: argparse.Namespace, report: RunReport):
        """生成最小值证书（稠密规模）"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        cert = prove(f, settings)
        self._write_text(args.out, serialize(cert))
        report.oracle_calls = f.call_count
        payload = {"claimed_min": cert.claimed_min, "witness": cert.witness.text(), "out": args.out}
        return EXIT_OK, payload, f"证书已写入 {args.out}"

    @_command("verify")
    def verify_certificate(self, args: argparse.Namespace, report: RunReport):
        """验证最小值证书"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        try:
            payload = PathHelper.read_text(args.cert)
        except OSError as error:
            raise FileSystemError(
                f"无法读取证书: {args.cert}", "FS_001", file_path=args.cert, operation="read"
            ) from error
        verdict = verify(deserialize(payload), f, settings)
        report.oracle_calls = verdict.oracle_calls
        if verdict.accepted:
            return EXIT_OK, verdict.to_json(), "证书通过验证"
        if verdict.check == 0:
            return EXIT_INVALID, verdict.to_json(), f"证书结构错误: {verdict.message}"
        return (
            EXIT_FAILED,
            verdict.to_json(),
            f"证书被拒绝: 检查 {verdict.check} ({verdict.reason}) {verdict.message}",
        )

    @_command("check")
    def check_instance(self, args: argparse.Namespace, report: RunReport):
        """检查子模性；--budget 为穷举的元组对上限，超出时改为抽样"""

        settings = self._settings_for(args)
        f = self._load_instance(args, report)
        budget = args.budget if args.budget is not None else DEFAULT_PAIR_BUDGET
        try:
            result = is_submodular(f, budget)
        except BudgetExceededError:
            logger.warning("元组对数量超出预算，改为抽样检查")
            result = is_submodular(f, samples=settings.enumeration_budget, seed=args.seed or 0)
        report.oracle_calls = f.call_count
        payload: Dict[str, Any] = {
            "submodular": result.submodular,
            "pairs_checked": result.pairs_checked,
            "exhaustive": result.exhaustive,
        }
        if result.witness is not None:
            payload["witness"] = [t.text() for t in result.witness]
        if result.submodular:
            return EXIT_OK, payload, "函数是子模的"
        return EXIT_FAILED, payload, f"函数不是子模的，反例 {payload['witness']}"

    @_command("generate")
    def generate_instance(self, args: argparse.Namespace, report: RunReport):
        """生成随机子模实例"""

        settings = self._settings_for(args)
        f = random_submodular(args.n, args.k, args.bound, args.seed, budget=settings.enumeration_budget)
        report.digest = f.digest()
        if args.out:
            self._write_text(args.out, json.dumps(f.to_json(), ensure_ascii=False, indent=2))
            return EXIT_OK, {"out": args.out}, f"实例已写入 {args.out}"
        return EXIT_OK, {"instance": f.to_json()}, f"已生成 n={args.n}, k={args.k} 的实例"


__all__: List[str] = ["SFMCommandLine", "RunReport", "EXIT_OK", "EXIT_FAILED", "EXIT_INVALID"]
