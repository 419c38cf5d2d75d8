"""
随机化验证套件

按固定种子生成小规模实例，逐项调用核心检查并汇总为 CheckReport：
- trivial：带最小元的随机偏序集 + 常值系数，H^* = (A, 0, 0, …)
- 4vanish：D_{a,T,m,A} 的消失性及与 F^*(C_{a,T,m}, A) 的逐次秩相等
- adjuntos：随机 Galois 连接上 H^*(A, l^*G) ≅ H^*(B, G)（G 为常值或靶协变）
- muro：随机 Galois 连接与任意自然系统上 H^*(C′, Ē) ≅ H^*(C, Ẽ)
"""

import random
from typing import Callable, List, Optional, Sequence, Tuple

from core.bw import DEFAULT_RANK_BUDGET, bw_cochain, bw_cohomology
from core.errors import NotAFunctor
from core.fincat import (
    Adjunction,
    FiniteCategory,
    build_group_category,
    build_poset_category,
    galois_adjunction,
    initial_objects,
    transitive_closure,
)
from core.grothendieck import check_lemma_adjuntos, check_prop_muro
from core.homalg import (
    AbInvariants,
    IntMatrix,
    Ring,
    ZZ_RING,
    identity_matrix,
    mat_add,
    mat_mul,
    matrix_from_rows,
    zero_matrix,
)
from core.natsys import (
    BIFUNCTOR,
    CONTRAVARIANT,
    COVARIANT,
    ModuleFunctor,
    NaturalSystem,
    PresheafData,
    build_category_aTm,
    coproduct_presheaf,
    natsys_change_ring,
    natsys_constant,
    natsys_from_functor,
    natsys_lemma44,
    representable_presheaf,
)
from core.reports import CheckReport
from utils import logger

F2 = Ring(2)


# ========== 随机实例 ==========

def random_poset(rng: random.Random, max_objects: int, bottom: bool = False, density: float = 0.4,
                 name: str = "") -> FiniteCategory:
    """随机偏序：只在 i < j 间加边再取传递闭包；bottom 时 0 为最小元。"""
    n = rng.randint(1, max_objects)
    edges = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    if bottom:
        edges.update((0, j) for j in range(1, n))
    return build_poset_category(n, sorted(transitive_closure(edges, n)), name=name or f"P{n}")


def poset_height(P: FiniteCategory) -> List[int]:
    """h(x) = 严格小于 x 的元素个数；x < y 蕴含 h(x) < h(y)。"""
    return [len(P.into[x]) - 1 for x in range(P.n_objects)]


def random_galois(rng: random.Random, max_objects: int, attempts: int = 40) -> Adjunction:
    """
    随机单调 l: A → B，若每个 {a : l(a) ≤ b} 都是主下集则取 r(b) 为其最大元。

    多次失败后退回到链上的 l（保持最小元），此时连接总存在。
    """
    for _ in range(attempts):
        A = random_poset(rng, max_objects, name="A")
        B = random_poset(rng, max_objects, name="B")
        l_map = _random_monotone(rng, A, B)
        if l_map is None:
            continue
        r_map = _right_adjoint_map(A, B, l_map)
        if r_map is not None:
            return galois_adjunction(A, B, l_map, r_map, name="galois")
    n_a, n_b = rng.randint(1, max_objects), rng.randint(1, max_objects)
    A = build_poset_category(n_a, [(i, j) for i in range(n_a) for j in range(i, n_a)], name="A")
    B = build_poset_category(n_b, [(i, j) for i in range(n_b) for j in range(i, n_b)], name="B")
    steps = sorted(rng.randint(0, n_b - 1) for _ in range(n_a))
    steps[0] = 0
    l_map = steps
    return galois_adjunction(A, B, l_map, _right_adjoint_map(A, B, l_map), name="galois-chain")


def _leq(P: FiniteCategory, x: int, y: int) -> bool:
    return bool(P.hom(x, y))


def _random_monotone(rng: random.Random, A: FiniteCategory, B: FiniteCategory) -> Optional[List[int]]:
    values: List[int] = []
    for a in range(A.n_objects):
        # 对象编号与偏序相容（只在 i < j 间有边），按序贪心即可
        lower = [values[x] for x in range(a) if _leq(A, x, a)]
        choices = [b for b in range(B.n_objects) if all(_leq(B, v, b) for v in lower)]
        if not choices:
            return None
        values.append(rng.choice(choices))
    return values


def _right_adjoint_map(A: FiniteCategory, B: FiniteCategory, l_map: Sequence[int]) -> Optional[List[int]]:
    r_map = []
    for b in range(B.n_objects):
        below = [a for a in range(A.n_objects) if _leq(B, l_map[a], b)]
        tops = [a for a in below if all(_leq(A, x, a) for x in below)]
        if len(tops) != 1:
            return None
        r_map.append(tops[0])
    return r_map


def random_matrix(rng: random.Random, size: int, ring: Ring, low: int = -2, high: int = 2) -> IntMatrix:
    return matrix_from_rows([[rng.randint(low, high) for _ in range(size)] for _ in range(size)], ring,
                            shape=(size, size))


def mat_pow(M: IntMatrix, k: int, ring: Ring) -> IntMatrix:
    out = identity_matrix(M.shape[0], ring)
    for _ in range(k):
        out = mat_mul(M, out)
    return out


def _polynomial_in(rng: random.Random, P: IntMatrix, ring: Ring) -> IntMatrix:
    """c₀ + c₁P + c₂P²，与 P 可交换。"""
    size = P.shape[0]
    total = zero_matrix(size, size, ring).to_sparse()
    power = identity_matrix(size, ring)
    for _ in range(3):
        c = rng.randint(-1, 1)
        if c:
            scalar = matrix_from_rows([[c if i == j else 0 for j in range(size)] for i in range(size)], ring)
            total = mat_add(total, mat_mul(scalar, power))
        power = mat_mul(P, power)
    return total


def covariant_height_system(P: FiniteCategory, A: IntMatrix, ring: Ring, variance: str = COVARIANT,
                            name: str = "") -> NaturalSystem:
    """偏序上的单变量函子 M(x ≤ y) = A^{h(y) − h(x)}。"""
    h = poset_height(P)
    rank = A.shape[0]
    actions = {
        f: mat_pow(A, h[P.tgt[f]] - h[P.src[f]], ring)
        for f in range(P.n_morphisms)
        if not P.is_identity_morphism[f]
    }
    data = ModuleFunctor(variance, {x: rank for x in range(P.n_objects)}, actions)
    return natsys_from_functor(P, variance, data, ring, name=name or f"{variance}-height")


def bifunctor_height_system(P: FiniteCategory, left: IntMatrix, right: IntMatrix, ring: Ring) -> NaturalSystem:
    """M(x, y) = ℤ^r，左作用 left^{h(x)−h(x′)}，右作用 right^{h(y′)−h(y)}；left 与 right 可交换。"""
    h = poset_height(P)
    rank = left.shape[0]
    objects = range(P.n_objects)
    ranks = {(x, y): rank for x in objects for y in objects}
    left_actions = {}
    right_actions = {}
    for f in range(P.n_morphisms):
        if P.is_identity_morphism[f]:
            continue
        power = h[P.tgt[f]] - h[P.src[f]]
        for z in objects:
            left_actions[(f, z)] = mat_pow(left, power, ring)
            right_actions[(z, f)] = mat_pow(right, power, ring)
    data = ModuleFunctor(BIFUNCTOR, ranks, left=left_actions, right=right_actions)
    return natsys_from_functor(P, BIFUNCTOR, data, ring, name="bifunctor-height")


def random_presheaf(rng: random.Random, C: FiniteCategory, group: bool) -> PresheafData:
    """偏序：1–3 个可表预层之和或常值预层；群：正则或平凡作用。"""
    if group:
        if rng.random() < 0.5:
            return representable_presheaf(C, 0)
        size = rng.randint(1, 3)
        return _constant_presheaf(C, size)
    if rng.random() < 0.3:
        return _constant_presheaf(C, rng.randint(1, 3))
    parts = [representable_presheaf(C, rng.randrange(C.n_objects)) for _ in range(rng.randint(1, 3))]
    return coproduct_presheaf(parts)


def _constant_presheaf(C: FiniteCategory, size: int) -> PresheafData:
    return PresheafData(C, (size,) * C.n_objects, (tuple(range(size)),) * C.n_morphisms, name=f"const{size}")


# ========== 套件 ==========

def suite_trivial(instances: int = 50, seed: int = 0, N_max: int = 4,
                  budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    rng = random.Random(seed)
    report = CheckReport(name="trivial", trusted_degree=N_max - 1)
    for i in range(instances):
        P = random_poset(rng, 6, bottom=True, name=f"P{i}")
        rank = rng.randint(1, 2)
        report.record(f"#{i} 有始对象", initial_objects(P) == [0], instance=i)
        table = bw_cohomology(P, natsys_constant(P, ZZ_RING, rank), N_max, budget)
        expected = [AbInvariants(rank)] + [AbInvariants(0)] * (N_max - 1)
        report.record(
            f"#{i} H^* = (ℤ^{rank}, 0, …)", table == expected, instance=i,
            objects=P.n_objects, got=[value.text for value in table],
        )
    logger.info("Catcoh：trivial 套件完成 instances=%s status=%s", instances, report.status)
    return report


def suite_4vanish(instances: int = 20, seed: int = 0, N_max: int = 3,
                  budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    rng = random.Random(seed)
    report = CheckReport(name="4vanish", trusted_degree=N_max - 1)
    for i in range(instances):
        group = rng.random() < 0.3
        C = build_group_category(rng.choice([2, 3])) if group else random_poset(rng, 5, name=f"C{i}")
        T = random_presheaf(rng, C, group)
        candidates = [x for x in range(C.n_objects) if T.sizes[x]]
        a = rng.choice(candidates)
        m = rng.randrange(T.sizes[a])
        A = rng.randint(1, 2)
        D = natsys_lemma44(T, a, m, A, ZZ_RING)
        table = bw_cohomology(C, D, N_max, budget)
        expected = [AbInvariants(A)] + [AbInvariants(0)] * (N_max - 1)
        report.record(f"#{i} H^* = (A, 0, 0)", table == expected, instance=i, category=C.name,
                      got=[value.text for value in table])
        elements = build_category_aTm(T, a, m)
        left = bw_cochain(C, D, N_max, budget).ranks
        right = bw_cochain(elements, natsys_constant(elements, ZZ_RING, A), N_max, budget).ranks
        report.record(f"#{i} 逐次秩相等", left == right, instance=i, left=list(left), right=list(right))
    logger.info("Catcoh：4vanish 套件完成 instances=%s status=%s", instances, report.status)
    return report


def _both_rings(report: CheckReport, label: str, system: NaturalSystem,
                check: Callable[[NaturalSystem], CheckReport]) -> None:
    for variant in (system, natsys_change_ring(system, F2)):
        sub = check(variant)
        sub.name = f"{label}/{variant.ring.tag}"
        report.absorb(sub)


def suite_adjuntos(instances: int = 20, seed: int = 0, N_max: int = 3,
                   budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    rng = random.Random(seed)
    report = CheckReport(name="adjuntos", trusted_degree=N_max - 1)
    for i in range(instances):
        adj = random_galois(rng, 5)
        B = adj.target
        rank = rng.randint(1, 2)
        if rng.random() < 0.4:
            G = natsys_constant(B, ZZ_RING, rank)
        else:
            G = covariant_height_system(B, random_matrix(rng, rank, ZZ_RING), ZZ_RING)
        _both_rings(report, f"#{i}", G, lambda D: check_lemma_adjuntos(adj, D, N_max, budget))
    logger.info("Catcoh：adjuntos 套件完成 instances=%s status=%s", instances, report.status)
    return report


def random_system_on(rng: random.Random, C: FiniteCategory) -> NaturalSystem:
    """常值、协变、反变、可交换双函子或 D_{a,T,m,A} 之一。"""
    rank = rng.randint(1, 2)
    kind = rng.choice(["constant", COVARIANT, CONTRAVARIANT, BIFUNCTOR, "lemma44"])
    if kind == "constant":
        return natsys_constant(C, ZZ_RING, rank)
    if kind in (COVARIANT, CONTRAVARIANT):
        return covariant_height_system(C, random_matrix(rng, rank, ZZ_RING), ZZ_RING, variance=kind)
    if kind == BIFUNCTOR:
        P = random_matrix(rng, rank, ZZ_RING)
        return bifunctor_height_system(C, P, _polynomial_in(rng, P, ZZ_RING), ZZ_RING)
    T = random_presheaf(rng, C, group=False)
    a = rng.choice([x for x in range(C.n_objects) if T.sizes[x]])
    return natsys_lemma44(T, a, rng.randrange(T.sizes[a]), rank, ZZ_RING)


def suite_muro(instances: int = 20, seed: int = 0, N_max: int = 3,
               budget: int = DEFAULT_RANK_BUDGET) -> CheckReport:
    rng = random.Random(seed)
    report = CheckReport(name="muro", trusted_degree=N_max - 1)
    for i in range(instances):
        adj = random_galois(rng, 5)
        try:
            E = random_system_on(rng, adj.source)
        except NotAFunctor:
            # 只在随机矩阵意外不满足函子性时发生；退回常值系数
            E = natsys_constant(adj.source, ZZ_RING, 1)
        _both_rings(report, f"#{i}", E, lambda D: check_prop_muro(adj, D, N_max, budget))
    logger.info("Catcoh：muro 套件完成 instances=%s status=%s", instances, report.status)
    return report


SUITES = {
    "trivial": suite_trivial,
    "4vanish": suite_4vanish,
    "adjuntos": suite_adjuntos,
    "muro": suite_muro,
}


def run_suite(name: str, instances: Optional[int] = None, seed: int = 0, budget: int = DEFAULT_RANK_BUDGET,
              N_max: Optional[int] = None) -> CheckReport:
    suite = SUITES[name]
    kwargs = {"seed": seed, "budget": budget}
    if instances is not None:
        kwargs["instances"] = instances
    if N_max is not None:
        kwargs["N_max"] = N_max
    return suite(**kwargs)


def instance_count(report: CheckReport) -> Tuple[int, int]:
    """(通过项数, 总项数)。"""
    return sum(1 for item in report.checks if item["ok"]), len(report.checks)
