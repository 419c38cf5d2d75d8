"""
检查命令处理器 (Check Command Handler)

check 任务的 target：
- trivial / 4vanish / adjuntos / muro：给出具体输入时检查该实例，否则运行随机套件
- theorem1 / theorem2：对图表 + 自然系统做完整的定理检查
- local / h-local：只判定局部性假设
"""

from typing import Any, Dict

from core.bw import bw_cochain, bw_cohomology
from core.errors import InputError
from core.fincat import identity_adjunction, initial_objects
from core.grothendieck import (
    FiberAnalysis,
    check_lemma_adjuntos,
    check_prop_muro,
    h_local_verdicts,
    is_local,
)
from core.homalg import ZZ_RING, AbInvariants, cohomology_table
from core.natsys import build_category_aTm, natsys_constant, natsys_lemma44
from core.reports import CheckReport
from core.theorems import check_theorem1, check_theorem2
from services.verification import instance_count, run_suite
from utils import clamp_int, logger

from .compute_commands import ComputeCommandHandler, require

TARGETS = ("trivial", "4vanish", "adjuntos", "muro", "theorem1", "theorem2", "local", "h-local")


class CheckCommandHandler:
    """检查命令处理器"""

    def __init__(self, config: Dict[str, Any], compute: ComputeCommandHandler):
        self.config = config
        self.compute = compute

    def handle_check(self, wf, task: Dict[str, Any]) -> CheckReport:
        target = require(task, "target")
        if target not in TARGETS:
            raise InputError(f"未知的检查目标 {target!r}（可选：{', '.join(TARGETS)}）")
        method = getattr(self, "_check_" + target.replace("-", "_").replace("4vanish", "vanish"))
        report = method(wf, task)
        logger.info("Catcoh：检查完成 target=%s status=%s", target, report.status)
        return report

    def _suite(self, name: str, task: Dict[str, Any]) -> CheckReport:
        instances = task.get("instances")
        report = run_suite(
            name,
            instances=clamp_int(instances, 1, 1, 10_000) if instances is not None else None,
            seed=clamp_int(task.get("seed"), 0, 0, 2**31 - 1),
            budget=self.compute.budget(task),
            N_max=clamp_int(task["max_degree"], 3, 1, 12) if task.get("max_degree") else None,
        )
        passed, total = instance_count(report)
        report.data["checks_passed"] = {"passed": passed, "total": total}
        return report

    # ========== 引理 ==========

    def _check_trivial(self, wf, task: Dict[str, Any]) -> CheckReport:
        """有始对象 c₀ 的范畴上，常值系数 A 的上同调为 (A, 0, 0, …)。"""
        if not task.get("category"):
            return self._suite("trivial", task)
        C = wf.category(task["category"])
        N = self.compute.max_degree(task)
        report = CheckReport(name=f"trivial[{C.name}]", trusted_degree=N - 1)
        initials = initial_objects(C)
        report.data["initial_objects"] = initials
        if not initials:
            report.hypothesis_failed = True
            report.note = f"{C.name} 没有始对象"
            return report
        if task.get("system"):
            D = self.compute.system(wf, task)
        else:
            ring = self.compute.ring(task)
            D = natsys_constant(C, ring or ZZ_RING, clamp_int(task.get("coeff_rank"), 1, 0, 16))
        coefficient = D.rank[C.identity[initials[0]]]
        table = bw_cohomology(C, D, N, self.compute.budget(task))
        char = D.ring.p if D.ring.is_field else 0
        expected = [AbInvariants(coefficient, field_char=char)] + [AbInvariants(0, field_char=char)] * (N - 1)
        for n, (got, want) in enumerate(zip(table, expected)):
            report.record(f"H^{n}", got == want, degree=n, got=got.text, expected=want.text)
        report.data["cohomology"] = [value.to_dict(n) for n, value in enumerate(table)]
        return report

    def _check_vanish(self, wf, task: Dict[str, Any]) -> CheckReport:
        """D_{a,T,m,A}：H⁰ = A、H^{n≥1} = 0，且各次秩与 F^*(C_{a,T,m}, A) 相同。"""
        if not task.get("presheaf"):
            return self._suite("4vanish", task)
        T = wf.presheaf(task["presheaf"])
        a = clamp_int(task.get("object"), 0, 0, 10**6)
        m = clamp_int(task.get("element"), 0, 0, 10**6)
        A = clamp_int(task.get("coeff_rank"), 1, 0, 16)
        ring = self.compute.ring(task) or ZZ_RING
        N = self.compute.max_degree(task)
        budget = self.compute.budget(task)
        D = natsys_lemma44(T, a, m, A, ring)
        report = CheckReport(name=f"4vanish[{T.name}, {a}, {m}]", trusted_degree=N - 1)
        bw = bw_cochain(T.base, D, N, budget)
        table = cohomology_table(bw.complex)
        char = ring.p if ring.is_field else 0
        for n, value in enumerate(table):
            want = AbInvariants(A if n == 0 else 0, field_char=char)
            report.record(f"H^{n}", value == want, degree=n, got=value.text, expected=want.text)
        elements = build_category_aTm(T, a, m)
        other = bw_cochain(elements, natsys_constant(elements, ring, A), N, budget)
        report.record("逐次秩相等", bw.ranks == other.ranks, left=list(bw.ranks), right=list(other.ranks))
        report.data["cohomology"] = [value.to_dict(n) for n, value in enumerate(table)]
        return report

    def _check_adjuntos(self, wf, task: Dict[str, Any]) -> CheckReport:
        if not task.get("adjunction"):
            return self._suite("adjuntos", task)
        adj = wf.adjunction(task["adjunction"])
        return check_lemma_adjuntos(adj, self.compute.system(wf, task), self.compute.max_degree(task),
                                    self.compute.budget(task))

    def _check_muro(self, wf, task: Dict[str, Any]) -> CheckReport:
        """
        adjunction：该伴随上的比较；diagram：每个纤维上的 (l_k, r_k) 与 i_k^*D；
        只给 category 时用恒等伴随；都没有则运行随机套件。
        """
        N = self.compute.max_degree(task)
        budget = self.compute.budget(task)
        if task.get("adjunction"):
            adj = wf.adjunction(task["adjunction"])
            return check_prop_muro(adj, self.compute.system(wf, task), N, budget)
        if task.get("diagram"):
            G = wf.grothendieck(task["diagram"])
            analysis = FiberAnalysis(G, self.compute.system(wf, task))
            report = CheckReport(name=f"fibers[{task['diagram']}]", trusted_degree=N - 1)
            for k in range(analysis.K.n_objects):
                data = analysis.fiber(k)
                sub = check_prop_muro(data.adjunction, data.system, N, budget)
                sub.name = f"k={k}"
                report.absorb(sub)
            return report
        if task.get("category"):
            C = wf.category(task["category"])
            return check_prop_muro(identity_adjunction(C), self.compute.system(wf, task), N, budget)
        return self._suite("muro", task)

    # ========== 定理 ==========

    def _theorem_inputs(self, wf, task: Dict[str, Any]):
        G = wf.grothendieck(require(task, "diagram"))
        return G, self.compute.system(wf, task)

    def _check_theorem1(self, wf, task: Dict[str, Any]) -> CheckReport:
        G, D = self._theorem_inputs(wf, task)
        return check_theorem1(G, D, self.compute.max_degree(task), self.compute.pages(task), self.compute.budget(task))

    def _check_theorem2(self, wf, task: Dict[str, Any]) -> CheckReport:
        G, D = self._theorem_inputs(wf, task)
        return check_theorem2(G, D, self.compute.max_degree(task), self.compute.pages(task), self.compute.budget(task))

    def _check_local(self, wf, task: Dict[str, Any]) -> CheckReport:
        G, D = self._theorem_inputs(wf, task)
        report = CheckReport(name=f"local[{G.diagram.name}]")
        local = is_local(G, D)
        report.data["local"] = local
        if not local:
            report.hypothesis_failed = True
            report.note = "D 不是局部的"
        return report

    def _check_h_local(self, wf, task: Dict[str, Any]) -> CheckReport:
        G, D = self._theorem_inputs(wf, task)
        N = self.compute.max_degree(task)
        report = CheckReport(name=f"h-local[{G.diagram.name}]", trusted_degree=N - 1)
        verdicts = h_local_verdicts(G, D, N + 1, self.compute.budget(task))
        h_local = True
        for k, per_degree in sorted(verdicts.items()):
            for n, ok in sorted(per_degree.items()):
                if n <= N - 1:
                    report.data.setdefault("verdicts", []).append({"k": k, "degree": n, "acyclic": ok})
                    h_local = h_local and ok
        report.data["h_local"] = h_local
        if not h_local:
            report.hypothesis_failed = True
            report.note = "D 不是 h-局部的"
        return report
