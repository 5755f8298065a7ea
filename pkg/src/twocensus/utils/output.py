"""
报告输出 - TwoCensus

主要功能：
- 把报告渲染为 json / csv / text
- 计数一律序列化为十进制字符串（任意精度）
- 终端输出时用 Pygments 为 JSON 着色
"""

import csv
import io
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO

logger = logging.getLogger(__name__)

try:
    from pygments import highlight
    from pygments.formatters import TerminalFormatter
    from pygments.lexers import JsonLexer
    PYGMENTS_AVAILABLE = True
except ImportError:
    PYGMENTS_AVAILABLE = False
    logger.debug("Pygments not installed, JSON output stays uncoloured")

FORMATS = ("json", "csv", "text")


def count_str(value: int) -> str:
    return str(int(value))


def should_color(mode: str, stream: TextIO) -> bool:
    if mode == "always":
        return PYGMENTS_AVAILABLE
    if mode == "never":
        return False
    return PYGMENTS_AVAILABLE and hasattr(stream, "isatty") and stream.isatty()


def _render_json(payload: Dict[str, Any], color: bool) -> str:
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if color:
        return highlight(text, JsonLexer(), TerminalFormatter()).rstrip("\n")
    return text


def _render_csv(rows: List[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue().rstrip("\n")


def _render_text(payload: Dict[str, Any], columns: Sequence[str]) -> str:
    lines = []
    for key in ("label", "n", "method", "total"):
        if key in payload:
            lines.append(f"{key}: {payload[key]}")
    for note in payload.get("notes", []):
        lines.append(f"# {note}")
    rows = payload.get("rows", [])
    if rows:
        widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) for c in columns}
        lines.append("  ".join(c.rjust(widths[c]) for c in columns))
        lines.append("  ".join("-" * widths[c] for c in columns))
        for row in rows:
            lines.append("  ".join(str(row.get(c, "")).rjust(widths[c]) for c in columns))
    return "\n".join(lines)


def render(payload: Dict[str, Any], fmt: str = "json", columns: Optional[Sequence[str]] = None,
           color: bool = False) -> str:
    """
    渲染报告

    Args:
        payload: 报告数据，rows 为行字典列表
        fmt: json / csv / text
        columns: csv 与 text 的列顺序，默认取第一行的键
        color: 是否为 JSON 着色
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    rows = payload.get("rows", [])
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    if fmt == "json":
        return _render_json(payload, color)
    if fmt == "csv":
        return _render_csv(rows, columns)
    return _render_text(payload, columns)


def emit(payload: Dict[str, Any], fmt: str = "json", columns: Optional[Sequence[str]] = None,
         color_mode: str = "auto", stream: Optional[TextIO] = None):
    """渲染并写到 stdout（或给定的流）"""
    stream = stream or sys.stdout
    stream.write(render(payload, fmt, columns, should_color(color_mode, stream)) + "\n")
    stream.flush()
