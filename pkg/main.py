"""
catcoh 命令行入口

架构说明：
- main.py 作为纯路由层，仅负责参数解析、配置合并与退出码映射
- 业务逻辑委托给 handlers/（命令处理）和 core/（计算核心）
- 任务调度与归档由 WorkbenchFacade 统一管理

退出码：0 通过；1 检查失败；2 输入错误；3 超出秩预算。
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from core.errors import InputError
from core.reports import BUDGET_EXCEEDED, FAIL
from core.workbench_facade import INPUT_ERROR, WorkbenchFacade
from export_handler import ExportHandler
from handlers import CheckCommandHandler, ComputeCommandHandler
from handlers.check_commands import TARGETS
from services import ConfigPresetService, parse_workbench, resolve_file
from services.workbench_file import WorkbenchFile, load_workbench
from utils import logger

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

# 单条命令透传到任务字典的参数
TASK_FIELDS = (
    "category", "system", "diagram", "adjunction", "presheaf", "object", "element",
    "coeff_rank", "seed", "instances", "target",
)


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", help="系数环：zz 或 fp:<p>（覆盖文件中的设置）")
    common.add_argument("--max-degree", type=int, dest="max_degree", help="截断次数 N_max")
    common.add_argument("--pages", type=int, help="谱序列页数上限")
    common.add_argument("--budget", type=int, dest="rank_budget", help="总秩预算")
    common.add_argument("--out", help="JSON 报告输出路径")
    common.add_argument("--quiet", action="store_true", help="不打印摘要，仅输出警告")
    common.add_argument("--verbose", action="store_true", help="输出调试日志")
    common.add_argument("--preset", help="配置预设：quick / balanced / thorough")
    common.add_argument("--archive", help="运行归档数据库路径（SQLite）")
    common.add_argument("--workers", type=int, help="并发任务数")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="catcoh", description="有限范畴的 Baues-Wirsching 上同调工作台")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="校验工作台文件")
    p.add_argument("file")

    p = sub.add_parser("cohomology", parents=[common], help="计算 H^*(C, D)")
    p.add_argument("file")
    p.add_argument("--category", required=True)
    p.add_argument("--system", required=True)

    p = sub.add_parser("grothendieck", parents=[common], help="构造 ∫L 与各 L̃(k)")
    p.add_argument("file")
    p.add_argument("--diagram", required=True)
    p.add_argument("--system")

    p = sub.add_parser("spectral", parents=[common], help="双复形与谱序列页面")
    p.add_argument("file")
    p.add_argument("--diagram", required=True)
    p.add_argument("--system", required=True)

    p = sub.add_parser("check", parents=[common], help="引理、命题与定理检查")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("file", nargs="?", help="工作台文件；省略时运行随机套件")
    for flag in ("--category", "--system", "--diagram", "--adjunction", "--presheaf"):
        p.add_argument(flag)
    p.add_argument("--object", type=int)
    p.add_argument("--element", type=int)
    p.add_argument("--coeff-rank", type=int, dest="coeff_rank")
    p.add_argument("--seed", type=int)
    p.add_argument("--instances", type=int)

    p = sub.add_parser("run", parents=[common], help="执行文件中的 tasks 块")
    p.add_argument("file")

    p = sub.add_parser("history", parents=[common], help="查看运行归档")
    p.add_argument("--task")
    p.add_argument("--limit", type=int, default=20)
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def exit_code_for(records: List[Dict[str, Any]]) -> int:
    statuses = {record.get("status") for record in records}
    if INPUT_ERROR in statuses:
        return EXIT_INPUT
    if BUDGET_EXCEEDED in statuses:
        return EXIT_BUDGET
    if FAIL in statuses:
        return EXIT_FAIL
    return EXIT_PASS


class CatcohApp:
    """
    catcoh 应用：组装配置、门面与处理器，并把一条命令翻译成任务列表。
    """

    def __init__(self, args: argparse.Namespace, wf: WorkbenchFile):
        self.args = args
        self.wf = wf
        explicit = {
            "preset": args.preset,
            "max_degree": args.max_degree,
            "pages": args.pages,
            "rank_budget": args.rank_budget,
            "workers": args.workers,
            "ring": args.ring,
        }
        self.config = ConfigPresetService(explicit, file_settings=wf.settings).apply()
        self.facade = WorkbenchFacade(self.config, archive=args.archive)
        self._compute = ComputeCommandHandler(self.config)
        self._check = CheckCommandHandler(self.config, self._compute)
        self.facade.register("validate", self._compute.handle_validate)
        self.facade.register("cohomology", self._compute.handle_cohomology)
        self.facade.register("grothendieck", self._compute.handle_grothendieck)
        self.facade.register("spectral", self._compute.handle_spectral)
        self.facade.register("check", self._check.handle_check)

    def tasks(self) -> List[Dict[str, Any]]:
        args = self.args
        if args.command == "run":
            # 命令行显式给出的次数与页数覆盖任务自身的参数
            overrides = {
                key: getattr(args, attr)
                for key, attr in (("max_degree", "max_degree"), ("pages", "pages"), ("budget", "rank_budget"))
                if getattr(args, attr) is not None
            }
            return [{**task, **overrides} for task in self.wf.tasks]
        task = {"name": args.command if args.command != "check" else f"check {args.target}", "op": args.command}
        for key in TASK_FIELDS:
            value = getattr(args, key, None)
            if value is not None:
                task[key] = value
        return [task]

    def run(self) -> List[Dict[str, Any]]:
        try:
            return self.facade.run(self.wf, self.tasks())
        finally:
            self.facade.shutdown()


def _history(args: argparse.Namespace) -> int:
    if not args.archive:
        raise InputError("history 需要 --archive <path>")
    facade = WorkbenchFacade({"workers": 1}, archive=args.archive)
    try:
        runs = facade.history(limit=args.limit, task=args.task)
    finally:
        facade.shutdown()
    exporter = ExportHandler(args.out, quiet=True)
    if args.out:
        exporter.write_json({"tool": "catcoh", "runs": runs})
    if not args.quiet:
        for run in runs:
            print(f"#{run['id']} {run['created_at']} [{run['status']}] {run['task']} ({run['op']}) "
                  f"{run['duration_ms']}ms {run['file']}")
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args)
    try:
        if args.command == "history":
            return _history(args)
        if getattr(args, "file", None):
            wf = load_workbench(resolve_file(args.file))
        else:
            wf = parse_workbench({}, source="")
        records = CatcohApp(args, wf).run()
        ExportHandler(args.out, quiet=args.quiet).emit(records, source=wf.source)
    except InputError as exc:
        logger.error("Catcoh：输入错误：%s", exc)
        print(f"catcoh: 输入错误：{exc}", file=sys.stderr)
        return EXIT_INPUT
    code = exit_code_for(records)
    logger.info("Catcoh：命令结束 command=%s exit=%s", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
