"""命令行接口入口模块 (CLI Entry Point)

提供中文友好的命令行参数解析器和程序入口，支持精确最小化、
证书生成与验证、子模性检查和随机实例生成等子命令。

Example:
>>> from diamond_sfm.cli import main
>>> main(["minimize", "--instance", "f.json"])
"""

import argparse
import logging
import sys
from typing import List

from .cli_core import EXIT_OK, SFMCommandLine
from .core.validators import ENGINES
from .utils.logging_utils import LogManager, get_logger, setup_logging


class ChineseHelpFormatter(argparse.RawDescriptionHelpFormatter):
    """中文帮助格式化器 (Chinese Help Formatter)

    将 argparse 默认的英文帮助信息本地化为中文。
    """

    def _format_usage(self, usage, actions, groups, prefix):
        if prefix is None:
            prefix = "\n使用情况: "
        return super()._format_usage(usage, actions, groups, prefix)

    def start_section(self, heading):
        if heading == "options":
            heading = "下列选项可用"
        super().start_section(heading)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"必须是正整数: {text}")
    return value


def create_argument_parser(cli_instance: SFMCommandLine) -> argparse.ArgumentParser:
    """创建命令行参数解析器

    Args:
        cli_instance: SFMCommandLine 实例

    Returns:
        argparse.ArgumentParser: 配置完成的参数解析器

    Example:
    >>> cli = SFMCommandLine()
    >>> parser = create_argument_parser(cli)
    >>> args = parser.parse_args(["brute", "--instance", "f.json"])
    """
    parser = argparse.ArgumentParser(
        prog="sfm",
        usage="sfm [<命令>] [<选项>]",
        description="diamond-sfm - 钻石格乘积上的子模函数最小化工具",
        formatter_class=ChineseHelpFormatter,
        add_help=False,
    )

    parser.add_argument(
        "-h",
        "--help",
        action="help",
        default=argparse.SUPPRESS,
        help="显示选定命令的帮助信息",
    )
    parser.add_argument(
        "-v",
        "--version",
        action="store_true",
        help="显示当前模块版本信息",
    )
    parser.add_argument(
        "--log-file",
        metavar="PATH",
        help="把 DEBUG 级别的求解日志另写入该文件（配合 minimize --trace 记录每一步）",
    )

    subparsers = parser.add_subparsers(title="下列命令有效", dest="command")

    minimize_parser = subparsers.add_parser("minimize", help="精确最小化（多项式次 oracle 调用）")
    _add_instance(minimize_parser)
    _add_engine(minimize_parser)
    _add_budget(minimize_parser)
    minimize_parser.add_argument("--emit-dual", metavar="OUT", help="把最小最大对偶向量写入文件")
    minimize_parser.add_argument("--trace", action="store_true", help="记录每一步改进并输出调试日志")
    minimize_parser.set_defaults(func=cli_instance.minimize_instance)

    brute_parser = subparsers.add_parser("brute", help="暴力枚举最小值")
    _add_instance(brute_parser)
    _add_budget(brute_parser)
    _add_jobs(brute_parser)
    brute_parser.set_defaults(func=cli_instance.brute_instance)

    greedy_parser = subparsers.add_parser("greedy", help="计算贪心基向量与对偶下界")
    _add_instance(greedy_parser)
    greedy_parser.set_defaults(func=cli_instance.greedy_instance)

    optimize_parser = subparsers.add_parser("optimize", help="在 P_M(f) 上最大化线性目标")
    _add_instance(optimize_parser)
    optimize_parser.add_argument("--objective", required=True, help="目标向量 JSON 文件")
    _add_engine(optimize_parser)
    optimize_parser.set_defaults(func=cli_instance.optimize_instance)

    certify_parser = subparsers.add_parser("certify", help="生成最小值证书")
    _add_instance(certify_parser)
    certify_parser.add_argument("--out", required=True, help="证书输出路径")
    _add_budget(certify_parser)
    certify_parser.set_defaults(func=cli_instance.certify_instance)

    verify_parser = subparsers.add_parser("verify", help="验证最小值证书")
    _add_instance(verify_parser)
    verify_parser.add_argument("--cert", required=True, help="证书文件路径")
    _add_jobs(verify_parser)
    verify_parser.set_defaults(func=cli_instance.verify_certificate)

    check_parser = subparsers.add_parser("check", help="检查函数是否子模")
    _add_instance(check_parser)
    _add_budget(check_parser)
    check_parser.add_argument("--seed", type=int, default=None, help="抽样检查的随机种子")
    check_parser.set_defaults(func=cli_instance.check_instance)

    generate_parser = subparsers.add_parser("generate", help="生成随机子模实例")
    generate_parser.add_argument("--n", type=int, required=True, help="格的个数")
    generate_parser.add_argument("--k", type=int, required=True, help="每个 M_k 的原子数")
    generate_parser.add_argument("--seed", type=int, required=True, help="随机种子")
    generate_parser.add_argument("--bound", type=int, default=10, help="函数值绝对值上限")
    generate_parser.add_argument("--out", help="实例输出路径；缺省时打印到标准输出")
    generate_parser.set_defaults(func=cli_instance.generate_instance)

    return parser


def _add_instance(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", required=True, help="实例 JSON 文件")


def _add_engine(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--engine", choices=ENGINES, help="oracle 优化引擎")


def _add_budget(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget", type=_positive_int, help="枚举预算")


def _add_jobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=_positive_int, help="并行线程数")


def main(argv: List[str] | None = None) -> None:
    """命令行入口函数

    Example:
    >>> if __name__ == "__main__":
    ...     main()
    """
    argv = sys.argv[1:] if argv is None else argv
    cli = SFMCommandLine()
    parser = create_argument_parser(cli)

    if not argv:
        parser.print_help()
        sys.exit(EXIT_OK)

    args = parser.parse_args(argv)

    if args.version:
        sys.exit(cli.show_version(args))

    trace = getattr(args, "trace", False)
    try:
        setup_logging(level="DEBUG" if trace else "INFO", log_to_console=trace)
    except OSError:
        # 日志目录不可写时只输出到 stderr
        setup_logging(level="DEBUG" if trace else "WARNING", log_to_console=True, log_to_file=False)

    if not hasattr(args, "func"):
        parser.print_help()
        sys.exit(EXIT_OK)

    manager = LogManager()
    if args.log_file:
        manager.add_file_handler(args.log_file, level="DEBUG")
        # 控制台 handler 仍保持原级别
        get_logger(manager.app_name).setLevel(logging.DEBUG)
    try:
        code = args.func(args)
    finally:
        manager.cleanup()
    sys.exit(code)


if __name__ == "__main__":
    main()
