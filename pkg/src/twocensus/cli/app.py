"""
命令行界面 - TwoCensus

主要功能：
- argparse 子命令：census、verify、sections、quadform、lattice
- 全局参数覆盖配置（--oracle-cap、--workers、--lang）
- 退出码：0 全部通过，1 发现不一致或反例，2 用法错误或请求不可行
"""

import argparse
import io
import logging
import re
import sys
from typing import List, Optional, Sequence

from twocensus import __version__
from twocensus.cli.commands import (
    METHODS,
    cmd_census,
    cmd_lattice,
    cmd_quadform,
    cmd_sections,
    parse_form_type,
)
from twocensus.cli.spec_parser import parse_spec
from twocensus.cli.verify import FAMILIES, THEOREMS, cmd_verify
from twocensus.core.exceptions import CensusError, SpecSyntaxError
from twocensus.utils.i18n import set_language, tr
from twocensus.utils.output import FORMATS, emit
from twocensus.utils.settings import get_settings_manager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

_RANGE = re.compile(r"^\s*(\d+)\s*(?:(?:\.\.|-)\s*(\d+))?\s*$")


def parse_n_range(text: str) -> List[int]:
    """'5'、'3..6' 或 '3-6'"""
    match = _RANGE.match(text)
    if match is None:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}, expected N or A..B")
    low = int(match.group(1))
    high = int(match.group(2)) if match.group(2) else low
    if high < low:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(low, high + 1))


def parse_families(text: str) -> List[str]:
    families = [f.strip() for f in text.split(",") if f.strip()]
    if families == ["all"]:
        return list(FAMILIES)
    unknown = [f for f in families if f not in FAMILIES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown families {unknown}, choose from {', '.join(FAMILIES)}")
    return families


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twocensus",
        description="Exact subgroup censuses of finite 2-groups.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=FORMATS, default="text", help="report format")
    parser.add_argument("--color", choices=("auto", "always", "never"), default="auto",
                        help="colour JSON output")
    parser.add_argument("--lang", default=None, help="report language (en_US, zh_CN)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    parser.add_argument("--quiet", action="store_true", help="only errors on stderr, no progress bar")
    parser.add_argument("--workers", type=int, default=None, help="worker threads")
    parser.add_argument("--oracle-cap", type=int, default=None, help="largest group order for enumeration")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="s_k for every k")
    p.add_argument("spec", help='group expression, e.g. "D8 x C2^3"')
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--cross-check", action="store_true", help="run every applicable method")

    p = sub.add_parser("verify", help="instance verification of the dominance results")
    p.add_argument("theorem", choices=THEOREMS)
    p.add_argument("--n", type=parse_n_range, default=parse_n_range("3..6"), help="order exponents, e.g. 3..6")
    p.add_argument("--families", type=parse_families, default=list(FAMILIES),
                   help=f"comma list from {', '.join(FAMILIES)} or 'all'")
    p.add_argument("--spec", action="append", default=[], help="extra group to include (repeatable)")

    p = sub.add_parser("sections", help="elementary abelian section census")
    p.add_argument("spec")
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--split", action="store_true", help="split into the four classes")

    p = sub.add_parser("quadform", help="totally singular subspace counts of a standard form")
    p.add_argument("type", choices=("plus", "minus", "almost"))
    p.add_argument("r", type=int)
    p.add_argument("--m0", type=int, default=0, help="rank of the extra elementary factor")
    p.add_argument("--max-d", type=int, default=None)
    p.add_argument("--check", action="store_true", help="confirm by enumeration")

    p = sub.add_parser("lattice", help="subgroup lattice summary")
    p.add_argument("spec")
    return parser


def _columns(command: str, payload: dict) -> Optional[Sequence[str]]:
    rows = payload.get("rows", [])
    if not rows:
        return None
    if command == "verify":
        return ("theorem", "label", "n", "method", "status", "detail")
    return list(rows[0].keys())


def configure_logging(verbose: int, quiet: bool):
    if quiet:
        level = logging.ERROR
    else:
        level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def dispatch(args: argparse.Namespace):
    """执行子命令，返回 (报告数据, 退出码)"""
    if args.command == "census":
        return cmd_census(parse_spec(args.spec), args.method, args.cross_check)
    if args.command == "verify":
        return cmd_verify(args.theorem, args.n, args.families, args.spec, progress=not args.quiet)
    if args.command == "sections":
        return cmd_sections(parse_spec(args.spec), args.alpha, args.beta, args.split)
    if args.command == "quadform":
        return cmd_quadform(parse_form_type(args.type, args.r, args.m0), args.max_d, args.check)
    return cmd_lattice(parse_spec(args.spec))


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        settings = get_settings_manager().apply_overrides(oracle_cap=args.oracle_cap, workers=args.workers,
                                                          language=args.lang)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE
    set_language(settings.language)

    try:
        payload, code = dispatch(args)
    except SpecSyntaxError as e:
        logger.error(tr("errors.syntax", message=e.message, offset=e.offset))
        return EXIT_USAGE
    except CensusError as e:
        logger.error(tr("errors.infeasible", message=str(e)))
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=args.verbose > 0)
        return EXIT_USAGE

    payload["version"] = __version__
    emit(payload, args.format, _columns(args.command, payload), args.color)
    if code == EXIT_MISMATCH:
        logger.warning(tr("report.mismatch"))
    return code


def ensure_utf8_output(*streams):
    """把非 UTF-8 的文本流改为 UTF-8（Windows 控制台输出中文报告时需要）"""
    for stream in streams:
        encoding = (getattr(stream, "encoding", None) or "").lower().replace("-", "")
        reconfigure = getattr(stream, "reconfigure", None)
        if encoding != "utf8" and reconfigure is not None:
            try:
                reconfigure(encoding="utf-8")
            except (ValueError, io.UnsupportedOperation):
                pass


def main(argv: Optional[Sequence[str]] = None) -> int:
    """控制台入口"""
    ensure_utf8_output(sys.stdout, sys.stderr)
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
