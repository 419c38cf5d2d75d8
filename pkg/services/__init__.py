"""
服务层模块
包含配置预设、工作台文件、随附示例与随机化验证套件
"""

from .config_preset import ConfigPresetService
from .workbench_file import WorkbenchFile, load_workbench, parse_workbench, save_workbench
from .bundled_examples import bundled_path, load_bundled, resolve_file

__all__ = [
    'ConfigPresetService',
    'WorkbenchFile',
    'load_workbench',
    'parse_workbench',
    'save_workbench',
    'bundled_path',
    'load_bundled',
    'resolve_file',
]
