"""
定理检查 (Theorem Checks)

- check_theorem1：双复形、φ 的拟同构、行正合、E_2 ≅ H^p(K, ℍ^q) 与收敛
- check_theorem2：h-局部假设下 E_2 ≅ H^p(K, H^q(L(−), D_−))

ℍ^q(k) = H^q(L̃(k), i_k^*D)，对 γ: k → k′ 由 L̃(γ) 的拉回给出 ℍ^q(k′) → ℍ^q(k)，
因此在 K 上是反变函子。
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from utils import logger

from .bw import DEFAULT_RANK_BUDGET, BWComplex, bw_cochain, bw_cohomology, cochain_map_from_system_map, pullback_cochain_map
from .errors import NotAField, NotAFunctor
from .grothendieck import (
    FiberAnalysis,
    GrothendieckCategory,
    bar_system,
    h_local_verdicts,
    is_local,
    muro_cochain_map,
    restrict_Dk,
)
from .homalg import (
    AbInvariants,
    CohomologyBasis,
    IntMatrix,
    cohomology_table,
    induced_on_cohomology,
    inverse_matrix,
    is_invertible,
    mat_mul,
    matrices_equal,
    zero_matrix,
)
from .natsys import CONTRAVARIANT, ModuleFunctor, NaturalSystem, natsys_from_functor
from .reports import CheckReport
from .spectral import (
    Bicomplex,
    SpectralResult,
    bicomplex_report,
    build_bicomplex_thm1,
    e1_invariants,
    phi_map,
    row_exactness_check,
    spectral_pages,
    total_complex,
)


def _bases(bw: BWComplex, degrees: int) -> List[CohomologyBasis]:
    return [CohomologyBasis.build(bw.complex, q) for q in range(degrees)]


def _k_cohomology(
    G: GrothendieckCategory,
    actions_by_q: List[Dict[int, IntMatrix]],
    dims_by_q: List[Dict[int, int]],
    ring,
    N_max: int,
    budget: int,
    label: str,
) -> Dict[Tuple[int, int], AbInvariants]:
    """H^p(K, M^q)，M^q 为反变函子，p + q ≤ N_max − 1。"""
    K = G.diagram.K
    out = {}
    for q in range(N_max):
        data = ModuleFunctor(CONTRAVARIANT, dims_by_q[q], actions_by_q[q])
        system = natsys_from_functor(K, CONTRAVARIANT, data, ring, name=f"{label}^{q}")
        for p, value in enumerate(bw_cohomology(K, system, N_max - q, budget)):
            out[(p, q)] = value
    return out


def fiber_cohomology_functor(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    analysis: Optional[FiberAnalysis] = None,
):
    """
    逐 k 构造 F^*(L̃(k), i_k^*D) 与代表基，并求每个 γ 在 ℍ^q 上的矩阵。

    返回 (analysis, 复形表, 基表, actions_by_q)。
    """
    if not D.ring.is_field:
        raise NotAField(f"ℍ^q 的函子矩阵需要域系数，当前为 {D.ring}")
    analysis = analysis or FiberAnalysis(G, D)
    K = analysis.K
    complexes = {}
    bases = {}
    for k in range(K.n_objects):
        data = analysis.fiber(k)
        complexes[k] = bw_cochain(data.tilde.category, data.system, N_max, budget)
        bases[k] = _bases(complexes[k], N_max)
    actions_by_q: List[Dict[int, IntMatrix]] = [{} for _ in range(N_max)]
    for gamma, F in analysis.tilde_functors.items():
        k, k2 = K.src[gamma], K.tgt[gamma]
        pull = pullback_cochain_map(
            F, analysis.fiber(k2).system, N_max, budget, source=complexes[k2], target=complexes[k]
        )
        for q in range(N_max):
            actions_by_q[q][gamma] = induced_on_cohomology(pull, q, bases[k2][q], bases[k][q])
    return analysis, complexes, bases, actions_by_q


def e2_identify_thm1(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    pages: Optional[SpectralResult] = None,
    budget: int = DEFAULT_RANK_BUDGET,
    analysis: Optional[FiberAnalysis] = None,
) -> CheckReport:
    """E_2^{p,q} 的维数与 H^p(K, ℍ^q) 逐项比较（p + q ≤ N_max − 1）。"""
    analysis, _, bases, actions_by_q = fiber_cohomology_functor(G, D, N_max, budget, analysis)
    K = analysis.K
    dims_by_q = [{k: bases[k][q].dimension for k in range(K.n_objects)} for q in range(N_max)]
    table = _k_cohomology(G, actions_by_q, dims_by_q, D.ring, N_max, budget, "ℍ")
    report = CheckReport(name="E2≅H(K,ℍ)", trusted_degree=N_max - 1)
    report.data["fiber_dims"] = [
        {"q": q, "dims": [dims_by_q[q][k] for k in range(K.n_objects)]} for q in range(N_max)
    ]
    report.data["e2_expected"] = [
        {"p": p, "q": q, "dim": value.free_rank} for (p, q), value in sorted(table.items())
    ]
    if pages is None:
        B = build_bicomplex_thm1(G, D, N_max, budget)
        pages = spectral_pages(B, 2)
    if len(pages.pages) >= 2:
        page2 = pages.page(2)
        for (p, q), value in sorted(table.items()):
            got = page2.dim(p, q)
            report.record(f"E_2^{{{p},{q}}}", got == value.free_rank, p=p, q=q, page=got, expected=value.free_rank)
    else:
        report.note = "未计算 E_2"
    return report


# ========== 定理 1 ==========

def check_theorem1(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    r_max: int = 3,
    budget: int = DEFAULT_RANK_BUDGET,
    bicomplex: Optional[Bicomplex] = None,
) -> CheckReport:
    report = CheckReport(name="theorem1", trusted_degree=N_max - 1)
    B = bicomplex or build_bicomplex_thm1(G, D, N_max, budget)
    report.absorb(bicomplex_report(B))
    tot = total_complex(B)
    problems = tot.validate()
    report.record("D∘D = 0", not problems, problems=problems)
    if problems:
        return report
    _, phi_report = phi_map(B, tot)
    report.absorb(phi_report)
    report.absorb(row_exactness_check(B))

    tot_table = cohomology_table(tot)
    bw_table = cohomology_table(B.total_bw.complex)
    for n, (a, b) in enumerate(zip(tot_table, bw_table)):
        report.record(f"H^{n}(Tot) = H^{n}(∫L, D)", a == b, degree=n, tot=a.text, direct=b.text)
    report.data["cohomology"] = [value.to_dict(n) for n, value in enumerate(bw_table)]
    report.data["e1"] = [
        {"p": p, "q": q, "value": value.text} for (p, q), value in sorted(e1_invariants(B).items())
    ]

    if not D.ring.is_field:
        report.note = "ℤ 系数只报告 E_1"
        return report
    pages = spectral_pages(B, max(r_max, 2), tot)
    report.data["pages"] = [record for page in pages.pages for record in page.to_records()]
    report.data["abutment"] = pages.abutment
    for n, total in enumerate(pages.abutment):
        report.record(f"Σ E_∞ 次数 {n}", total == bw_table[n].free_rank, degree=n, abutment=total)
    report.absorb(e2_identify_thm1(G, D, N_max, pages, budget))
    logger.info("Catcoh：定理 1 检查完成 diagram=%s status=%s", G.diagram.name, report.status)
    return report


# ========== 定理 2 ==========

def _transport(
    P_k: IntMatrix, C_k: IntMatrix, M: IntMatrix, C_k2: IntMatrix, P_k2: IntMatrix, ring
) -> IntMatrix:
    """Φ_k⁻¹ c_k M c_{k′}⁻¹ Φ_{k′}：H^q(L(k′), D_{k′}) → H^q(L(k), D_k)。"""
    rows, cols = P_k.shape[1], P_k2.shape[1]
    if rows == 0 or cols == 0:
        return zero_matrix(rows, cols, ring)
    chain = mat_mul(inverse_matrix(C_k2, ring), P_k2)
    chain = mat_mul(M, chain)
    chain = mat_mul(C_k, chain)
    return mat_mul(inverse_matrix(P_k, ring), chain)


def check_theorem2(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    r_max: int = 3,
    budget: int = DEFAULT_RANK_BUDGET,
    pages: Optional[SpectralResult] = None,
) -> CheckReport:
    """
    先检查 h-局部性；不满足时报告 hypothesis-fails 并停止。

    满足时逐 k 比较 ℍ^q(k) 与 H^q(L(k), D_k)，并把 ℍ 的函子作用搬运到后者上，
    最后与 E_2 页及收敛值比较。
    """
    report = CheckReport(name="theorem2", trusted_degree=N_max - 1)
    analysis = FiberAnalysis(G, D)
    local = is_local(G, D, analysis)
    verdicts = h_local_verdicts(G, D, N_max + 1, budget, analysis)
    h_local = all(all(v.values()) for v in verdicts.values())
    report.data["local"] = local
    report.data["h_local"] = h_local
    if not h_local:
        report.hypothesis_failed = True
        report.note = "D 不是 h-局部的"
        bad = sorted(k for k, v in verdicts.items() if not all(v.values()))
        report.data["failing_objects"] = bad
        logger.info("Catcoh：定理 2 假设不满足 diagram=%s objects=%s", G.diagram.name, bad)
        return report
    if not D.ring.is_field:
        raise NotAField(f"定理 2 的比较需要域系数，当前为 {D.ring}")

    analysis, complexes, bases, actions_by_q = fiber_cohomology_functor(G, D, N_max, budget, analysis)
    K = analysis.K
    comparison: Dict[int, List[IntMatrix]] = {}
    muro: Dict[int, List[IntMatrix]] = {}
    fiber_dims: List[Dict[int, int]] = [{} for _ in range(N_max)]
    for k in range(K.n_objects):
        data = analysis.fiber(k)
        b1 = complexes[k]
        b2 = bw_cochain(data.tilde.category, data.tilde_system, N_max, budget)
        bar = restrict_Dk(G, D, k)
        from_adj = bar_system(data.adjunction, data.system)
        same = bar.rank == from_adj.rank and all(
            matrices_equal(bar.post[key], from_adj.post[key]) for key in bar.post
        ) and all(matrices_equal(bar.pre[key], from_adj.pre[key]) for key in bar.pre)
        report.record(f"Ē_{k} = D_{k}", same, k=k)
        b3 = bw_cochain(G.diagram.fibers[k], bar, N_max, budget)
        basis2 = _bases(b2, N_max)
        basis3 = _bases(b3, N_max)
        c_map = cochain_map_from_system_map(data.tilde.category, data.comparison, N_max, budget, source=b1, target=b2)
        m_map = muro_cochain_map(data.adjunction, data.system, N_max, budget, source=b3, target=b2)
        comparison[k] = []
        muro[k] = []
        for q in range(N_max):
            C_q = induced_on_cohomology(c_map, q, bases[k][q], basis2[q])
            P_q = induced_on_cohomology(m_map, q, basis3[q], basis2[q])
            report.record(f"c_{k} 在 H^{q} 可逆", is_invertible(C_q, D.ring), k=k, degree=q)
            report.record(f"Φ_{k} 在 H^{q} 可逆", is_invertible(P_q, D.ring), k=k, degree=q)
            comparison[k].append(C_q)
            muro[k].append(P_q)
            fiber_dims[q][k] = basis3[q].dimension
    if not report.ok:
        return report

    transported: List[Dict[int, IntMatrix]] = [{} for _ in range(N_max)]
    for gamma in range(K.n_morphisms):
        k, k2 = K.src[gamma], K.tgt[gamma]
        for q in range(N_max):
            transported[q][gamma] = _transport(
                muro[k][q], comparison[k][q], actions_by_q[q][gamma], comparison[k2][q], muro[k2][q], D.ring
            )
    try:
        table = _k_cohomology(G, transported, fiber_dims, D.ring, N_max, budget, "H(L,D)")
    except NotAFunctor as exc:
        report.record("搬运后的作用满足函子性", False, error=str(exc))
        return report
    report.data["e2_fibers"] = [
        {"p": p, "q": q, "dim": value.free_rank} for (p, q), value in sorted(table.items())
    ]

    identified = e2_identify_thm1(G, D, N_max, pages, budget, analysis)
    expected = {(row["p"], row["q"]): row["dim"] for row in identified.data["e2_expected"]}
    for (p, q), value in sorted(table.items()):
        report.record(f"H^{p}(K, H^{q}(L, D)) = H^{p}(K, ℍ^{q})", value.free_rank == expected[(p, q)], p=p, q=q)
    report.absorb(identified)

    if pages is None:
        B = build_bicomplex_thm1(G, D, N_max, budget)
        pages = spectral_pages(B, max(r_max, 2))
    direct = bw_cohomology(G.category, D, N_max, budget)
    r_top = len(pages.pages)
    last = pages.pages[-1]
    for n in range(N_max):
        if n + 2 > r_top:
            continue
        total = sum(last.dim(p, n - p) for p in range(n + 1))
        report.record(f"Σ E_{r_top} 次数 {n} = dim H^{n}(∫L, D)", total == direct[n].free_rank, degree=n)
    logger.info("Catcoh：定理 2 检查完成 diagram=%s status=%s", G.diagram.name, report.status)
    return report

