"""
工作台门面 (Workbench Facade)

统一持有线程池与运行归档，负责把工作台文件中的任务分派给已注册的处理器。

- 处理器按 op 名注册（validate / cohomology / grothendieck / spectral / check）
- 任务经 executor.map 并发执行，报告按文件顺序返回
- 预算超限与输入错误被收敛为带状态的报告，不中断其他任务
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Any, Callable, Dict, List, Optional

from db_manager import DatabaseManager
from utils import logger

from .errors import InputError, RankOverflowBudget
from .reports import BUDGET_EXCEEDED, FAIL, CheckReport

INPUT_ERROR = "input-error"

TaskHandler = Callable[[Any, Dict[str, Any]], CheckReport]


class WorkbenchFacade:
    """工作台门面：任务分派、并发与归档。"""

    def __init__(self, config: Dict[str, Any], archive: Optional[str] = None):
        self.config = config
        self.executor = ThreadPoolExecutor(max_workers=int(config.get("workers", 2)))
        self.db = None
        if archive:
            self.db = DatabaseManager(os.path.dirname(os.path.abspath(archive)), db_path=archive)
        self._handlers: Dict[str, TaskHandler] = {}
        self._is_shutdown = False

    # ========== 注册 ==========

    def register(self, op: str, handler: TaskHandler) -> None:
        self._handlers[op] = handler

    @property
    def ops(self) -> List[str]:
        return sorted(self._handlers)

    # ========== 执行 ==========

    def run_task(self, wf, task: Dict[str, Any]) -> Dict[str, Any]:
        """执行单个任务并返回报告字典（附 task / op / duration_ms）。"""
        op = task.get("op", "")
        name = task.get("name") or op
        started = time.perf_counter()
        try:
            handler = self._handlers.get(op)
            if handler is None:
                raise InputError(f"未知的任务类型 op={op!r}（可选：{', '.join(self.ops)}）")
            record = handler(wf, task).to_dict()
        except RankOverflowBudget as exc:
            logger.warning("Catcoh：任务超出预算 task=%s requested=%s budget=%s", name, exc.requested, exc.budget)
            record = {"name": name, "status": BUDGET_EXCEEDED, "note": str(exc), "checks": [],
                      "trusted_degree": None}
        except InputError as exc:
            logger.error("Catcoh：任务输入错误 task=%s：%s", name, exc)
            record = {"name": name, "status": INPUT_ERROR, "note": str(exc), "checks": [],
                      "trusted_degree": None}
        except Exception as exc:
            # 其余错误一律记为 fail
            logger.exception("Catcoh：任务执行失败 task=%s op=%s", name, op)
            record = {"name": name, "status": FAIL, "note": f"{type(exc).__name__}: {exc}", "checks": [],
                      "trusted_degree": None}
        duration_ms = int((time.perf_counter() - started) * 1000)
        record.update({"task": name, "op": op, "duration_ms": duration_ms})
        logger.info("Catcoh：任务完成 task=%s op=%s status=%s ms=%s", name, op, record["status"], duration_ms)
        self._archive(getattr(wf, "source", ""), record)
        return record

    def run(self, wf, tasks: Optional[List[Dict[str, Any]]] = None) -> List[Dict[str, Any]]:
        """并发执行任务列表（默认取文件中的 tasks 块），结果保持输入顺序。"""
        tasks = list(wf.tasks if tasks is None else tasks)
        if not tasks:
            logger.warning("Catcoh：没有可执行的任务 source=%s", getattr(wf, "source", ""))
            return []
        return list(self.executor.map(partial(self.run_task, wf), tasks))

    # ========== 归档 ==========

    def _archive(self, source: str, record: Dict[str, Any]) -> None:
        if self.db is None:
            return
        self.db.save_run(
            source,
            record["task"],
            record["op"],
            record["status"],
            trusted_degree=record.get("trusted_degree"),
            payload=record,
            duration_ms=record["duration_ms"],
        )

    def history(self, limit: int = 20, task: Optional[str] = None) -> List[Dict[str, Any]]:
        if self.db is None:
            raise InputError("未指定归档文件（--archive）")
        return [
            {
                "id": run.id,
                "file": run.file,
                "task": run.task,
                "op": run.op,
                "status": run.status,
                "trusted_degree": run.trusted_degree,
                "duration_ms": run.duration_ms,
                "created_at": run.created_at.isoformat(timespec="seconds"),
            }
            for run in self.db.get_runs(limit=limit, task=task)
        ]

    # ========== 生命周期 ==========

    def shutdown(self):
        self._is_shutdown = True
        self.executor.shutdown(wait=True)
