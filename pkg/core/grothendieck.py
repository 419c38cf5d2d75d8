"""
Grothendieck 构造与 Thomason 函子 (Grothendieck Construction)

主要功能：
- Diagram：严格函子 L: K → CAT，逐对校验函子性
- grothendieck_construction：∫_K L，对象 (k, x)，态射标签 (α, x₀, ξ)
- thomason_tilde / tilde_on_morphism：L̃(k) 与 L̃(γ)
- forgetful_ik / fiber_inclusion / projection_functor
- adjoint_lr：伴随 l_k ⊣ r_k 及其单位
- 诱导自然系统：restrict_Dk、tilde_system（含比较映射）、bar_system
- 局部性：is_local、is_h_local
- 伴随比较的两项检查：check_prop_muro、check_lemma_adjuntos

∫L 的态射标签显式带上源纤维对象 x₀，因为 L(α) 不必单射，ξ 单独无法确定源。
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from utils import logger

from .bw import (
    DEFAULT_RANK_BUDGET,
    BWComplex,
    bw_cochain,
    cochain_map_from_system_map,
    induced_cochain_map,
    pullback_cochain_map,
)
from .errors import InputError, ObjectOutOfRange
from .fincat import (
    Adjunction,
    CatFunctor,
    FiniteCategory,
    ValidationReport,
    compose_functors,
    identity_functor,
    make_category,
    validate_adjunction,
    validate_category,
    validate_functor,
)
from .homalg import CochainMap, cohomology_table, cone_acyclic, is_invertible
from .natsys import NaturalSystem, SystemMap, natsys_pullback
from .reports import CheckReport


# ========== 图表 ==========

@dataclass(frozen=True, eq=False)
class Diagram:
    """L: K → CAT；fibers[k] = L(k)，on_mor[α] = L(α)。"""

    K: FiniteCategory
    fibers: Tuple[FiniteCategory, ...]
    on_mor: Tuple[CatFunctor, ...]
    name: str = ""

    def apply_obj(self, alpha: int, x: int) -> int:
        return self.on_mor[alpha].obj_map[x]

    def apply_mor(self, alpha: int, xi: int) -> int:
        return self.on_mor[alpha].mor_map[xi]


def validate_diagram(Dg: Diagram) -> ValidationReport:
    K = Dg.K
    report = ValidationReport(subject=f"图表 {Dg.name or '?'}")
    if len(Dg.fibers) != K.n_objects or len(Dg.on_mor) != K.n_morphisms:
        report.add("纤维个数或态射像个数与 K 不符")
        return report
    for k, fiber in enumerate(Dg.fibers):
        report.merge(validate_category(fiber), prefix=f"L({k}): ")
    for alpha, F in enumerate(Dg.on_mor):
        s, t = K.src[alpha], K.tgt[alpha]
        if F.source.structure() != Dg.fibers[s].structure() or F.target.structure() != Dg.fibers[t].structure():
            report.add(f"L({alpha}) 的源/靶不是 L({s}) → L({t})")
            continue
        report.merge(validate_functor(F), prefix=f"L({alpha}): ")
    if not report.ok:
        return report
    for k in range(K.n_objects):
        if not Dg.on_mor[K.identity[k]].same_maps(identity_functor(Dg.fibers[k])):
            report.add(f"L(id_{k}) 不是恒等函子")
    for g in range(K.n_morphisms):
        for f in K.into[K.src[g]]:
            composed = compose_functors(Dg.on_mor[g], Dg.on_mor[f])
            if not Dg.on_mor[K.table[g][f]].same_maps(composed):
                report.add(f"严格函子性失败：L({g}∘{f}) ≠ L({g})∘L({f})")
    return report


# ========== ∫_K L ==========

@dataclass(frozen=True, eq=False)
class GrothendieckCategory:
    """对象标签 (k, x)，态射标签 (α, x₀, ξ)，ξ: L(α)x₀ → x₁。"""

    diagram: Diagram
    category: FiniteCategory

    def obj(self, k: int, x: int) -> int:
        return self.category.object_lookup[(k, x)]

    def mor(self, alpha: int, x0: int, xi: int) -> int:
        return self.category.morphism_lookup[(alpha, x0, xi)]


def grothendieck_construction(Dg: Diagram, check: bool = True) -> GrothendieckCategory:
    if check:
        validate_diagram(Dg).raise_if_invalid("grothendieck_construction")
    K, L = Dg.K, Dg.fibers
    objects = [(k, x) for k in range(K.n_objects) for x in range(L[k].n_objects)]
    obj_pos = {o: i for i, o in enumerate(objects)}
    labels = []
    arrows = []
    for alpha in range(K.n_morphisms):
        k0, k1 = K.src[alpha], K.tgt[alpha]
        F = Dg.on_mor[alpha]
        for x0 in range(L[k0].n_objects):
            for xi in L[k1].out_of[F.obj_map[x0]]:
                labels.append((alpha, x0, xi))
                arrows.append((obj_pos[(k0, x0)], obj_pos[(k1, L[k1].tgt[xi])]))
    label_pos = {label: i for i, label in enumerate(labels)}
    identity = [label_pos[(K.identity[k], x, L[k].identity[x])] for k, x in objects]

    def compose_fn(g: int, f: int) -> int:
        alpha1, x0, xi1 = labels[f]
        alpha2, _, xi2 = labels[g]
        fiber = L[K.tgt[alpha2]]
        return label_pos[(K.table[alpha2][alpha1], x0, fiber.table[xi2][Dg.apply_mor(alpha2, xi1)])]

    cat = make_category(
        len(objects),
        arrows,
        identity,
        compose_fn,
        name=f"∫{Dg.name or 'L'}",
        object_labels=objects,
        morphism_labels=labels,
    )
    logger.debug("Catcoh：∫L 已构建 diagram=%s objects=%s morphisms=%s", Dg.name, cat.n_objects, cat.n_morphisms)
    return GrothendieckCategory(Dg, cat)


def projection_functor(G: GrothendieckCategory) -> CatFunctor:
    """∫L → K：(k, x) ↦ k，(α, x₀, ξ) ↦ α。"""
    cat = G.category
    return CatFunctor(
        cat,
        G.diagram.K,
        tuple(k for k, _ in cat.object_labels),
        tuple(alpha for alpha, _, _ in cat.morphism_labels),
        name="π",
    )


def fiber_inclusion(G: GrothendieckCategory, k: int) -> CatFunctor:
    """L(k) → ∫L：y ↦ (k, y)，ξ ↦ (id_k, src ξ, ξ)。"""
    Dg = G.diagram
    _check_object(Dg, k)
    fiber = Dg.fibers[k]
    ident = Dg.K.identity[k]
    return CatFunctor(
        fiber,
        G.category,
        tuple(G.obj(k, y) for y in range(fiber.n_objects)),
        tuple(G.mor(ident, fiber.src[xi], xi) for xi in range(fiber.n_morphisms)),
        name=f"j_{k}",
    )


def _check_object(Dg: Diagram, k: int) -> None:
    if not 0 <= k < Dg.K.n_objects:
        raise ObjectOutOfRange(f"对象 {k} 不在 K 中（共 {Dg.K.n_objects} 个）")


# ========== L̃(k) ==========

@dataclass(frozen=True, eq=False)
class TildeCategory:
    """
    L̃(k)：对象标签 (α: l→k, x)，态射标签 (α, x, β, α′, ξ)

    满足 α′β = α，ξ: L(β)x → x′；复合 (β, ξ)(β′, ξ′) = (ββ′, ξ∘L(β)(ξ′))。
    """

    diagram: Diagram
    k: int
    category: FiniteCategory

    def obj(self, alpha: int, x: int) -> int:
        return self.category.object_lookup[(alpha, x)]


def thomason_tilde(Dg: Diagram, k: int) -> TildeCategory:
    _check_object(Dg, k)
    K, L = Dg.K, Dg.fibers
    objects = [(alpha, x) for alpha in K.into[k] for x in range(L[K.src[alpha]].n_objects)]
    obj_pos = {o: i for i, o in enumerate(objects)}
    labels = []
    arrows = []
    for alpha, x in objects:
        l = K.src[alpha]
        for beta in K.out_of[l]:
            l2 = K.tgt[beta]
            start = Dg.apply_obj(beta, x)
            for alpha2 in K.hom(l2, k):
                if K.table[alpha2][beta] != alpha:
                    continue
                for xi in L[l2].out_of[start]:
                    labels.append((alpha, x, beta, alpha2, xi))
                    arrows.append((obj_pos[(alpha, x)], obj_pos[(alpha2, L[l2].tgt[xi])]))
    label_pos = {label: i for i, label in enumerate(labels)}
    identity = [
        label_pos[(alpha, x, K.identity[K.src[alpha]], alpha, L[K.src[alpha]].identity[x])]
        for alpha, x in objects
    ]

    def compose_fn(g: int, f: int) -> int:
        alpha, x, beta1, _, xi1 = labels[f]
        _, _, beta2, alpha3, xi2 = labels[g]
        fiber = L[K.tgt[beta2]]
        return label_pos[(alpha, x, K.table[beta2][beta1], alpha3, fiber.table[xi2][Dg.apply_mor(beta2, xi1)])]

    cat = make_category(
        len(objects),
        arrows,
        identity,
        compose_fn,
        name=f"L̃({k})",
        object_labels=objects,
        morphism_labels=labels,
    )
    return TildeCategory(Dg, k, cat)


def tilde_on_morphism(Dg: Diagram, gamma: int, source: Optional[TildeCategory] = None,
                      target: Optional[TildeCategory] = None) -> CatFunctor:
    """L̃(γ): L̃(k) → L̃(k′)，(α, x) ↦ (γα, x)，(β, ξ) ↦ (β, ξ)。"""
    K = Dg.K
    k, k2 = K.src[gamma], K.tgt[gamma]
    source = source or thomason_tilde(Dg, k)
    target = target or thomason_tilde(Dg, k2)
    obj_map = tuple(target.obj(K.table[gamma][alpha], x) for alpha, x in source.category.object_labels)
    lookup = target.category.morphism_lookup
    mor_map = tuple(
        lookup[(K.table[gamma][alpha], x, beta, K.table[gamma][alpha2], xi)]
        for alpha, x, beta, alpha2, xi in source.category.morphism_labels
    )
    return CatFunctor(source.category, target.category, obj_map, mor_map, name=f"L̃({gamma})")


def forgetful_ik(G: GrothendieckCategory, tilde: TildeCategory) -> CatFunctor:
    """i_k: L̃(k) → ∫L，(α: l→k, x) ↦ (l, x)，(β, ξ) ↦ (β, x, ξ)。"""
    K = G.diagram.K
    return CatFunctor(
        tilde.category,
        G.category,
        tuple(G.obj(K.src[alpha], x) for alpha, x in tilde.category.object_labels),
        tuple(G.mor(beta, x, xi) for _, x, beta, _, xi in tilde.category.morphism_labels),
        name=f"i_{tilde.k}",
    )


def adjoint_lr(tilde: TildeCategory) -> Adjunction:
    """
    l_k ⊣ r_k：l_k(α, x) = L(α)x，r_k(y) = (id_k, y)

    单位 ε_{(α,x)} = (β = α, α′ = id_k, ξ = id_{L(α)x})。
    """
    Dg, k = tilde.diagram, tilde.k
    K = Dg.K
    fiber = Dg.fibers[k]
    cat = tilde.category
    ident = K.identity[k]
    l_obj = tuple(Dg.apply_obj(alpha, x) for alpha, x in cat.object_labels)
    l_mor = tuple(Dg.apply_mor(alpha2, xi) for _, _, _, alpha2, xi in cat.morphism_labels)
    left = CatFunctor(cat, fiber, l_obj, l_mor, name=f"l_{k}")
    lookup = cat.morphism_lookup
    r_obj = tuple(tilde.obj(ident, y) for y in range(fiber.n_objects))
    r_mor = tuple(lookup[(ident, fiber.src[xi], ident, ident, xi)] for xi in range(fiber.n_morphisms))
    right = CatFunctor(fiber, cat, r_obj, r_mor, name=f"r_{k}")
    unit = []
    for alpha, x in cat.object_labels:
        y = Dg.apply_obj(alpha, x)
        unit.append(lookup[(alpha, x, alpha, ident, fiber.identity[y])])
    adj = Adjunction(left, right, tuple(unit), name=f"l_{k}⊣r_{k}")
    validate_adjunction(adj).raise_if_invalid("adjoint_lr")
    return adj


# ========== 诱导自然系统 ==========

def restrict_Dk(G: GrothendieckCategory, D: NaturalSystem, k: int) -> NaturalSystem:
    """D_k(ξ) = D((id_k, ξ))。"""
    return natsys_pullback(fiber_inclusion(G, k), D, check=False, name=f"{D.name}_{k}")


def tilde_system(adj: Adjunction, E: NaturalSystem) -> Tuple[NaturalSystem, SystemMap]:
    """
    Ẽ(α: c→d) = E(ε_d∘α)，作用按函子性搬运：
    ψ_* ↦ rl(ψ)_*，ν^* ↦ ν^*。

    同时返回比较映射 E → Ẽ，在 α 处为 (ε_d)_*。
    """
    C = adj.source
    eps = adj.unit
    table = C.table

    def moved(alpha: int) -> int:
        return table[eps[C.tgt[alpha]]][alpha]

    post = {}
    pre = {}
    for alpha in range(C.n_morphisms):
        base = moved(alpha)
        for psi in C.out_of[C.tgt[alpha]]:
            post[(psi, alpha)] = E.post[(adj.rl_morphism(psi), base)]
        for nu in C.into[C.src[alpha]]:
            pre[(nu, alpha)] = E.pre[(nu, base)]
    rank = tuple(E.rank[moved(alpha)] for alpha in range(C.n_morphisms))
    tilde = NaturalSystem(C, E.ring, rank, post, pre, name=f"{E.name}~")
    components = tuple(E.post[(eps[C.tgt[alpha]], alpha)] for alpha in range(C.n_morphisms))
    return tilde, SystemMap(E, tilde, components, name=f"{E.name}→{E.name}~")


def bar_system(adj: Adjunction, E: NaturalSystem) -> NaturalSystem:
    """Ē = r^*E。"""
    return natsys_pullback(adj.right, E, check=False, name=f"{E.name}¯")


# ========== 局部性 ==========

@dataclass(frozen=True, eq=False)
class FiberData:
    """每个 k 的 L̃(k)、i_k、伴随与 i_k^*D、Ẽ_k 及比较映射。"""

    tilde: TildeCategory
    ik: CatFunctor
    adjunction: Adjunction
    system: NaturalSystem
    tilde_system: NaturalSystem
    comparison: SystemMap


class FiberAnalysis:
    """对固定的 (Dg, D) 缓存逐纤维数据。"""

    def __init__(self, G: GrothendieckCategory, D: NaturalSystem):
        if D.base is not G.category and D.base.structure() != G.category.structure():
            raise InputError(f"自然系统 {D.name} 不在 {G.category.name} 上")
        self.G = G
        self.D = D
        self._fibers: Dict[int, FiberData] = {}

    @property
    def K(self) -> FiniteCategory:
        return self.G.diagram.K

    def fiber(self, k: int) -> FiberData:
        if k not in self._fibers:
            tilde = thomason_tilde(self.G.diagram, k)
            ik = forgetful_ik(self.G, tilde)
            adj = adjoint_lr(tilde)
            system = natsys_pullback(ik, self.D, check=False, name=f"i_{k}^*{self.D.name}")
            tilde_sys, comparison = tilde_system(adj, system)
            self._fibers[k] = FiberData(tilde, ik, adj, system, tilde_sys, comparison)
        return self._fibers[k]

    @cached_property
    def tilde_functors(self) -> Dict[int, CatFunctor]:
        K = self.K
        return {
            gamma: tilde_on_morphism(
                self.G.diagram, gamma, self.fiber(K.src[gamma]).tilde, self.fiber(K.tgt[gamma]).tilde
            )
            for gamma in range(K.n_morphisms)
        }


def is_local(G: GrothendieckCategory, D: NaturalSystem, analysis: Optional[FiberAnalysis] = None) -> bool:
    """对每个 k 与 L̃(k) 的每个态射 γ，(i_k ε_{tgt γ})_* 可逆。"""
    analysis = analysis or FiberAnalysis(G, D)
    for k in range(analysis.K.n_objects):
        comparison = analysis.fiber(k).comparison
        for alpha, M in enumerate(comparison.components):
            if not is_invertible(M, D.ring):
                logger.info("Catcoh：局部性失败 k=%s morphism=%s", k, alpha)
                return False
    return True


def h_local_verdicts(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    analysis: Optional[FiberAnalysis] = None,
) -> Dict[int, Dict[int, bool]]:
    """k → {次数: 比较映射的映射锥在该次数无环}。"""
    analysis = analysis or FiberAnalysis(G, D)
    verdicts = {}
    for k in range(analysis.K.n_objects):
        data = analysis.fiber(k)
        cmap = cochain_map_from_system_map(data.tilde.category, data.comparison, N_max, budget)
        verdicts[k] = cone_acyclic(cmap)
    return verdicts


def is_h_local(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    analysis: Optional[FiberAnalysis] = None,
) -> bool:
    verdicts = h_local_verdicts(G, D, N_max, budget, analysis)
    return all(all(per_degree.values()) for per_degree in verdicts.values())


# ========== 伴随比较 ==========

def muro_cochain_map(
    adj: Adjunction,
    E: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    source: Optional[BWComplex] = None,
    target: Optional[BWComplex] = None,
) -> CochainMap:
    """
    Φ: F^*(C′, Ē) → F^*(C, Ẽ)

    (Φg)(α₁, …, α_n) = (ε_{c_n})^* g(lα₁, …, lα_n)，c_n 为串的起点。
    """
    C = adj.source
    bar = source.system if source is not None else bar_system(adj, E)
    if target is not None:
        tilde = target.system
    else:
        tilde, _ = tilde_system(adj, E)
    source = source or bw_cochain(adj.target, bar, N_max, budget)
    target = target or bw_cochain(C, tilde, N_max, budget)
    eps = adj.unit

    def block(comp: int) -> object:
        return E.pre[(eps[C.src[comp]], adj.rl_morphism(comp))]

    return induced_cochain_map(source, target, adj.left, block, name=f"Φ[{adj.name}]")


def _compare_tables(report: CheckReport, left, right, label: str) -> None:
    for n, (a, b) in enumerate(zip(left, right)):
        report.record(f"{label} H^{n}", a == b, degree=n, left=a.to_dict(), right=b.to_dict())


def check_prop_muro(adj: Adjunction, E: NaturalSystem, N_max: int, budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    """H^*(C′, Ē) ≅ H^*(C, Ẽ)，并用 Φ 的映射锥加以确认。"""
    bar = bar_system(adj, E)
    tilde, _ = tilde_system(adj, E)
    left_bw = bw_cochain(adj.target, bar, N_max, budget)
    right_bw = bw_cochain(adj.source, tilde, N_max, budget)
    report = CheckReport(name=f"muro[{adj.name}]", trusted_degree=N_max - 1)
    _compare_tables(report, cohomology_table(left_bw.complex), cohomology_table(right_bw.complex), "Ē vs Ẽ")
    phi = muro_cochain_map(adj, E, N_max, budget, source=left_bw, target=right_bw)
    for n, ok in cone_acyclic(phi).items():
        report.record(f"cone(Φ) 在 {n} 无环", ok, degree=n)
    return report


def check_lemma_adjuntos(adj: Adjunction, G: NaturalSystem, N_max: int, budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    """H^*(A, l^*G) ≅ H^*(B, G)，l: A → B 为左伴随；并检查 l^* 的映射锥。"""
    pulled = natsys_pullback(adj.left, G, check=False, name=f"l^*{G.name}")
    source = bw_cochain(adj.target, G, N_max, budget)
    target = bw_cochain(adj.source, pulled, N_max, budget)
    report = CheckReport(name=f"adjuntos[{adj.name}]", trusted_degree=N_max - 1)
    _compare_tables(report, cohomology_table(target.complex), cohomology_table(source.complex), "l^*G vs G")
    pull = pullback_cochain_map(adj.left, G, N_max, budget, source=source, target=target)
    for n, ok in cone_acyclic(pull).items():
        report.record(f"cone(l^*) 在 {n} 无环", ok, degree=n)
    return report


def commutation_report(G: GrothendieckCategory, analysis: FiberAnalysis) -> ValidationReport:
    """对每个 γ: k→k′ 检查 i_{k′}∘L̃(γ) = i_k，以及 L̃ 的函子性。"""
    K = analysis.K
    report = ValidationReport(subject="i_k 交换性")
    functors = analysis.tilde_functors
    for gamma, F in functors.items():
        k, k2 = K.src[gamma], K.tgt[gamma]
        composed = compose_functors(analysis.fiber(k2).ik, F)
        if not composed.same_maps(analysis.fiber(k).ik):
            report.add(f"i_{k2}∘L̃({gamma}) ≠ i_{k}")
        report.merge(validate_functor(F), prefix=f"L̃({gamma}): ")
    for k in range(K.n_objects):
        if not functors[K.identity[k]].same_maps(identity_functor(analysis.fiber(k).tilde.category)):
            report.add(f"L̃(id_{k}) 不是恒等函子")
    for g in range(K.n_morphisms):
        for f in K.into[K.src[g]]:
            if not functors[K.table[g][f]].same_maps(compose_functors(functors[g], functors[f])):
                report.add(f"L̃({g}∘{f}) ≠ L̃({g})∘L̃({f})")
    return report


def fiber_sizes(G: GrothendieckCategory, analysis: FiberAnalysis) -> List[dict]:
    rows = []
    for k in range(analysis.K.n_objects):
        data = analysis.fiber(k)
        rows.append({
            "k": k,
            "fiber_objects": G.diagram.fibers[k].n_objects,
            "fiber_morphisms": G.diagram.fibers[k].n_morphisms,
            "tilde_objects": data.tilde.category.n_objects,
            "tilde_morphisms": data.tilde.category.n_morphisms,
        })
    return rows
