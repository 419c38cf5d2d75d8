"""
工具函数模块
包含日志器、整数配置读取与上同调表格的文本格式化
"""
import logging
from typing import Any, Iterable, Mapping, Optional

logger = logging.getLogger("catcoh")


def clamp_int(value: Any, default: int, low: int, high: int) -> int:
    """读取整数配置：无法解析时回退默认值，再夹到 [low, high]。"""
    try:
        parsed = int(value)
    except (TypeError, ValueError):
        if value is not None:
            logger.debug("Catcoh：整数配置解析失败，已回退默认值 value=%r default=%s", value, default)
        parsed = default
    return max(low, min(high, parsed))


def format_group(free_rank: int, torsion: Iterable[int], field_char: Optional[int] = None) -> str:
    """把 (自由秩, 挠系数) 渲染成 Z^2 + Z/2 或 F_2^3 这样的短文本。"""
    torsion = list(torsion)
    base = f"F_{field_char}" if field_char else "Z"
    parts = []
    if free_rank == 1:
        parts.append(base)
    elif free_rank > 1:
        parts.append(f"{base}^{free_rank}")
    parts.extend(f"Z/{d}" for d in torsion)
    return " + ".join(parts) if parts else "0"


def format_cohomology_table(rows: Iterable[Mapping[str, Any]]) -> str:
    """上同调表格：每行一个次数。"""
    lines = ["  n | H^n", " ---+" + "-" * 20]
    for row in rows:
        lines.append(f" {row['degree']:>2} | {row['text']}")
    return "\n".join(lines)


def format_page_table(entries: Iterable[Mapping[str, Any]], page: int) -> str:
    """谱序列某一页的 (p, q) 维数网格，稳定项带 * 标记。"""
    grid = {}
    max_p = max_q = 0
    for entry in entries:
        if entry["r"] != page:
            continue
        grid[(entry["p"], entry["q"])] = entry
        max_p = max(max_p, entry["p"])
        max_q = max(max_q, entry["q"])
    if not grid:
        return f"E_{page}: (空)"
    lines = [f"E_{page}"]
    for q in range(max_q, -1, -1):
        cells = []
        for p in range(max_p + 1):
            entry = grid.get((p, q))
            if entry is None:
                cells.append("   .")
            else:
                mark = "*" if entry.get("stable") else " "
                cells.append(f"{entry['dim']:>3}{mark}")
        lines.append(f"q={q:<2}|" + "".join(cells))
    lines.append("     " + "".join(f" p={p:<1}" for p in range(max_p + 1)))
    return "\n".join(lines)
