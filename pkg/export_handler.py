"""
报告输出模块
负责把任务报告写成 JSON 文件，并在终端打印人类可读的摘要
"""
import datetime
import json
import os
import sys

from utils import format_cohomology_table, format_page_table, logger


class ExportHandler:
    """处理报告输出的所有逻辑"""

    def __init__(self, out_path: str = None, quiet: bool = False, stream=None):
        self.out_path = out_path
        self.quiet = quiet
        self.stream = stream or sys.stdout

    def build_document(self, reports, source: str = "") -> dict:
        """汇总为单个 JSON 文档；reports 保持任务顺序。"""
        return {
            "tool": "catcoh",
            "source": source,
            "generated_at": datetime.datetime.now().isoformat(timespec="seconds"),
            "reports": list(reports),
        }

    def write_json(self, document: dict) -> str:
        """写入 --out 指定的路径（自动创建父目录）。"""
        parent = os.path.dirname(os.path.abspath(self.out_path))
        os.makedirs(parent, exist_ok=True)
        try:
            with open(self.out_path, "w", encoding="utf-8") as f:
                json.dump(document, f, ensure_ascii=False, indent=2, sort_keys=True, default=str)
        except OSError as e:
            logger.error("Catcoh：保存报告失败 path=%s：%s", self.out_path, e)
            raise
        logger.info("Catcoh：报告已写入 path=%s reports=%s", self.out_path, len(document.get("reports", [])))
        return self.out_path

    def emit(self, reports, source: str = "") -> dict:
        document = self.build_document(reports, source)
        if self.out_path:
            self.write_json(document)
        if not self.quiet:
            for report in document["reports"]:
                self.stream.write(self.render_summary(report) + "\n\n")
        return document

    def render_summary(self, report: dict) -> str:
        """构建单个报告的摘要文本"""
        header = f"[{report.get('status', '-')}] {report.get('task') or report.get('name', '-')}"
        if report.get("op"):
            header += f"  ({report['op']})"
        lines = [header]
        if report.get("trusted_degree") is not None:
            lines.append(f"可信次数 ≤ {report['trusted_degree']}")
        if report.get("note"):
            lines.append(f"说明：{report['note']}")
        data = report.get("data") or {}
        if data.get("cohomology"):
            lines.append(format_cohomology_table(data["cohomology"]))
        pages = data.get("pages") or []
        for r in sorted({entry["r"] for entry in pages}):
            lines.append(format_page_table(pages, r))
        if data.get("abutment"):
            lines.append("Σ E_∞：" + ", ".join(str(v) for v in data["abutment"]))
        checks = report.get("checks") or []
        if checks:
            failed = [item for item in checks if not item.get("ok")]
            lines.append(f"检查 {len(checks) - len(failed)}/{len(checks)} 通过")
            for item in failed[:10]:
                lines.append(f"  ✗ {item['check']}")
            if len(failed) > 10:
                lines.append(f"  … 另有 {len(failed) - 10} 项失败")
        return "\n".join(lines)
