"""
计算命令处理器 (Compute Command Handler)

负责 validate / cohomology / grothendieck / spectral 四类任务的业务逻辑。
每个方法接收已解析的工作台文件与任务字典，返回 CheckReport。

任务字典的公共参数：
- max_degree：截断次数 N_max（可信次数为 N_max − 1）
- pages：谱序列页数上限
- ring：覆盖文件中自然系统的系数环（zz / fp:<p>）
- budget：总秩预算
"""

from typing import Any, Dict, Optional

from core.bw import bw_cochain
from core.errors import InputError
from core.fincat import validate_adjunction, validate_category
from core.grothendieck import FiberAnalysis, commutation_report, fiber_sizes
from core.homalg import Ring, cohomology_table
from core.natsys import NaturalSystem, natsys_constant
from core.reports import CheckReport
from core.spectral import bicomplex_report, build_bicomplex_thm1, e1_invariants, spectral_pages, total_complex
from utils import clamp_int, logger


def require(task: Dict[str, Any], key: str) -> Any:
    value = task.get(key)
    if value in (None, ""):
        raise InputError(f"任务 {task.get('name') or task.get('op')} 缺少参数 {key!r}")
    return value


class ComputeCommandHandler:
    """计算命令处理器"""

    def __init__(self, config: Dict[str, Any]):
        """
        Args:
            config: 已合并预设的配置（max_degree / pages / rank_budget / ring）
        """
        self.config = config

    # ========== 参数 ==========

    def max_degree(self, task: Dict[str, Any]) -> int:
        return clamp_int(task.get("max_degree"), self.config["max_degree"], 1, 12)

    def pages(self, task: Dict[str, Any]) -> int:
        return clamp_int(task.get("pages"), self.config["pages"], 1, 32)

    def budget(self, task: Dict[str, Any]) -> int:
        return clamp_int(task.get("budget"), self.config["rank_budget"], 1, 100_000_000)

    def ring(self, task: Dict[str, Any]) -> Optional[Ring]:
        """命令行 --ring 优先于任务中的 ring。"""
        tag = self.config.get("ring") or task.get("ring")
        return Ring.parse(tag) if tag else None

    def system(self, wf, task: Dict[str, Any]) -> NaturalSystem:
        return wf.system(require(task, "system"), self.ring(task))

    # ========== validate ==========

    def handle_validate(self, wf, task: Dict[str, Any]) -> CheckReport:
        report = wf.validate()
        logger.info("Catcoh：文件校验完成 source=%s status=%s", wf.source, report.status)
        return report

    # ========== cohomology ==========

    def handle_cohomology(self, wf, task: Dict[str, Any]) -> CheckReport:
        C = wf.category(require(task, "category"))
        D = self.system(wf, task)
        bw = bw_cochain(C, D, self.max_degree(task), self.budget(task))
        report = CheckReport(name=f"cohomology[{C.name}, {D.name}]", trusted_degree=bw.trusted_degree)
        problems = bw.complex.validate()
        report.record("d∘d = 0", not problems, problems=problems)
        if problems:
            return report
        table = cohomology_table(bw.complex)
        report.data["ring"] = D.ring.tag
        report.data["ranks"] = list(bw.ranks)
        report.data["cohomology"] = [value.to_dict(n) for n, value in enumerate(table)]
        return report

    # ========== grothendieck ==========

    def handle_grothendieck(self, wf, task: Dict[str, Any]) -> CheckReport:
        """∫L 与各 L̃(k) 的规模、伴随 (l_k, r_k) 与 i_k 交换性。"""
        name = require(task, "diagram")
        G = wf.grothendieck(name)
        cat = G.category
        report = CheckReport(name=f"grothendieck[{name}]")
        report.record("∫L 是范畴", validate_category(cat).ok)
        if task.get("system"):
            D = self.system(wf, task)
        else:
            D = natsys_constant(cat, Ring.parse(self.config.get("ring") or "zz"), 1)
        analysis = FiberAnalysis(G, D)
        for k in range(analysis.K.n_objects):
            adj_report = validate_adjunction(analysis.fiber(k).adjunction)
            report.record(f"l_{k} ⊣ r_{k}", adj_report.ok, violations=list(adj_report.violations))
        commutes = commutation_report(G, analysis)
        report.record("i_k∘L̃(γ) = i_k′ 且 L̃ 保持复合", commutes.ok, violations=list(commutes.violations))
        report.data["objects"] = [list(label) for label in cat.object_labels]
        report.data["morphisms"] = cat.n_morphisms
        report.data["fibers"] = fiber_sizes(G, analysis)
        return report

    # ========== spectral ==========

    def handle_spectral(self, wf, task: Dict[str, Any]) -> CheckReport:
        name = require(task, "diagram")
        G = wf.grothendieck(name)
        D = self.system(wf, task)
        N = self.max_degree(task)
        B = build_bicomplex_thm1(G, D, N, self.budget(task))
        report = CheckReport(name=f"spectral[{name}, {D.name}]", trusted_degree=N - 1)
        report.absorb(bicomplex_report(B))
        tot = total_complex(B)
        problems = tot.validate()
        report.record("D∘D = 0", not problems, problems=problems)
        report.data["e1"] = [
            {"p": p, "q": q, "value": value.text} for (p, q), value in sorted(e1_invariants(B).items())
        ]
        if not D.ring.is_field:
            report.note = "ℤ 系数只报告 E_1，不做收敛判断"
            return report
        result = spectral_pages(B, self.pages(task), tot)
        report.data["pages"] = [record for page in result.pages for record in page.to_records()]
        report.data["abutment"] = result.abutment
        report.data["stable_degrees"] = result.stable_degrees
        return report
