"""
配置预设服务

提供 quick / balanced / thorough 三套计算规模预设，并对数值参数做钳制读取。
"""

from typing import Any, Dict, Optional

from utils import clamp_int, logger


class ConfigPresetService:
    """配置预设服务。"""

    PRESETS: Dict[str, Dict[str, Any]] = {
        # 快速：小窗口，单线程
        "quick": {
            "max_degree": 3,
            "pages": 4,
            "rank_budget": 50_000,
            "workers": 1,
        },
        # 均衡：默认推荐
        "balanced": {
            "max_degree": 4,
            "pages": 6,
            "rank_budget": 200_000,
            "workers": 2,
        },
        # 充分：更大的可信窗口
        "thorough": {
            "max_degree": 6,
            "pages": 8,
            "rank_budget": 1_000_000,
            "workers": 4,
        },
    }

    LIMITS: Dict[str, tuple] = {
        "max_degree": (1, 12),
        "pages": (1, 32),
        "rank_budget": (1, 100_000_000),
        "workers": (1, 16),
    }

    def __init__(self, config: Optional[Dict[str, Any]] = None, file_settings: Optional[Dict[str, Any]] = None):
        self.config = {key: value for key, value in dict(config or {}).items() if value is not None}
        self.file_settings = dict(file_settings or {})

    def apply(self) -> Dict[str, Any]:
        """合并顺序：预设 < 文件 settings < 显式参数。"""
        layered = dict(self.file_settings)
        layered.update(self.config)

        mode = str(layered.get("preset", "balanced")).strip().lower()
        if mode in {"", "custom", "manual"}:
            return self._clamped(layered, self.PRESETS["balanced"])

        if mode not in self.PRESETS:
            logger.warning("Catcoh：未知配置预设 preset=%s，已回退到 balanced", mode)
            mode = "balanced"

        merged = dict(self.PRESETS[mode])
        merged.update(layered)
        merged["preset"] = mode
        logger.info("Catcoh：已应用配置预设 preset=%s（显式覆盖 %d 个参数）", mode, len(layered))
        return self._clamped(merged, self.PRESETS[mode])

    def _clamped(self, merged: Dict[str, Any], defaults: Dict[str, Any]) -> Dict[str, Any]:
        out = dict(merged)
        for key, (low, high) in self.LIMITS.items():
            out[key] = clamp_int(merged.get(key), defaults[key], low, high)
        return out
