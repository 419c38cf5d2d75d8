"""
检查报告

各类检查统一返回 CheckReport：status 取 pass / fail / hypothesis-fails，
checks 记录逐项判定，data 存放可序列化的数值结果。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_FAILS = "hypothesis-fails"
BUDGET_EXCEEDED = "budget-exceeded"


@dataclass
class CheckReport:
    name: str
    trusted_degree: Optional[int] = None
    checks: List[Dict[str, Any]] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)
    hypothesis_failed: bool = False
    note: str = ""

    def record(self, label: str, ok: bool, **detail: Any) -> bool:
        self.checks.append({"check": label, "ok": bool(ok), **detail})
        return bool(ok)

    def absorb(self, other: "CheckReport") -> None:
        """并入另一份报告的逐项判定，标签前缀为其名称。"""
        for item in other.checks:
            self.checks.append({**item, "check": f"{other.name}: {item['check']}"})
        self.hypothesis_failed = self.hypothesis_failed or other.hypothesis_failed

    @property
    def ok(self) -> bool:
        return all(item["ok"] for item in self.checks)

    @property
    def status(self) -> str:
        if self.hypothesis_failed:
            return HYPOTHESIS_FAILS
        return PASS if self.ok else FAIL

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [item for item in self.checks if not item["ok"]]

    def to_dict(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "name": self.name,
            "status": self.status,
            "trusted_degree": self.trusted_degree,
            "checks": self.checks,
        }
        if self.data:
            record["data"] = self.data
        if self.note:
            record["note"] = self.note
        return record
