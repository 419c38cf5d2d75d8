"""随附示例文件的定位与加载。"""

import os
from typing import List

from core.errors import ParseError

from services.workbench_file import WorkbenchFile, load_workbench

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")

BUNDLED = {
    "example_a": "example_a.json",
    "example_b": "example_b.json",
    "example_c": "example_c.json",
    "galois": "galois.json",
    "locality": "locality_counterexample.json",
}


def bundled_names() -> List[str]:
    return sorted(BUNDLED)


def bundled_path(name: str) -> str:
    if name not in BUNDLED:
        raise ParseError(f"没有名为 {name!r} 的随附示例（可选：{', '.join(bundled_names())}）")
    return os.path.join(DATA_DIR, BUNDLED[name])


def resolve_file(file_or_name: str) -> str:
    """路径存在则原样返回，否则按随附示例名解析（如 example_b）。"""
    if os.path.exists(file_or_name) or file_or_name not in BUNDLED:
        return file_or_name
    return bundled_path(file_or_name)


def load_bundled(name: str) -> WorkbenchFile:
    return load_workbench(bundled_path(name))
