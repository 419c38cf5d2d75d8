"""
Baues-Wirsching 上链复形 F^*(C, D)

n 维上链给每条可复合串 c₀ ←α₁ c₁ ← ⋯ ←α_n c_n 指定 D(α₁⋯α_n) 中的值，
上边缘为三段式：(α₁)_* 作用、内部复合的交错和、(−1)^{n+1}(α_{n+1})^* 作用。

串按态射编号字典序枚举（逐层延长前缀），块偏移因此确定可复现。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from utils import logger

from .errors import InputError, RankOverflowBudget
from .fincat import CatFunctor, FiniteCategory, identity_functor
from .homalg import (
    AbInvariants,
    CochainComplex,
    CochainMap,
    IntMatrix,
    cohomology_table,
    identity_matrix,
    matrix_from_dod,
)
from .natsys import NaturalSystem, SystemMap, natsys_pullback

DEFAULT_RANK_BUDGET = 200_000


@dataclass(frozen=True, eq=False)
class NerveStrings:
    """
    strings[n]：n 维串列表；n = 0 时每项为 (x,)，即对象 x。
    composite[n][i]：第 i 条串的复合（n = 0 时为 id_x）。
    """

    category: FiniteCategory
    strings: Tuple[Tuple[Tuple[int, ...], ...], ...]
    composite: Tuple[Tuple[int, ...], ...]
    index: Tuple[Dict[Tuple[int, ...], int], ...]

    @property
    def max_degree(self) -> int:
        return len(self.strings) - 1

    def count(self, n: int) -> int:
        return len(self.strings[n])

    def position(self, n: int, string: Tuple[int, ...]) -> int:
        return self.index[n][string]


def enumerate_strings(
    C: FiniteCategory,
    N_max: int,
    rank: Optional[Sequence[int]] = None,
    budget: int = DEFAULT_RANK_BUDGET,
    where: str = "",
) -> NerveStrings:
    """
    逐层枚举可复合串（含恒等态射）。

    rank 给出时按 Σ r(复合) 累计总秩；串的条数同样计入预算。
    """
    strings: List[List[Tuple[int, ...]]] = [[(x,) for x in range(C.n_objects)]]
    composite: List[List[int]] = [list(C.identity)]
    total_rank = sum(rank[e] for e in C.identity) if rank is not None else 0
    total_count = C.n_objects
    table = C.table
    for n in range(1, N_max + 1):
        layer: List[Tuple[int, ...]] = []
        comps: List[int] = []
        if n == 1:
            for alpha in range(C.n_morphisms):
                layer.append((alpha,))
                comps.append(alpha)
        else:
            for string, comp in zip(strings[n - 1], composite[n - 1]):
                for alpha in C.into[C.src[string[-1]]]:
                    layer.append(string + (alpha,))
                    comps.append(table[comp][alpha])
        total_count += len(layer)
        if rank is not None:
            total_rank += sum(rank[c] for c in comps)
        if total_rank > budget or total_count > budget:
            raise RankOverflowBudget(max(total_rank, total_count), budget, where or f"{C.name} 的 {n} 维串")
        strings.append(layer)
        composite.append(comps)
    return NerveStrings(
        category=C,
        strings=tuple(tuple(layer) for layer in strings),
        composite=tuple(tuple(comps) for comps in composite),
        index=tuple({s: i for i, s in enumerate(layer)} for layer in strings),
    )


@dataclass(frozen=True, eq=False)
class BWComplex:
    """F^*(C, D) 及其块索引：offsets[n][i] 是第 i 条 n 维串的块起点。"""

    category: FiniteCategory
    system: NaturalSystem
    nerve: NerveStrings
    offsets: Tuple[Tuple[int, ...], ...]
    complex: CochainComplex

    @property
    def ranks(self) -> Tuple[int, ...]:
        return self.complex.ranks

    @property
    def trusted_degree(self) -> int:
        return self.complex.trusted_degree

    def block(self, n: int, i: int) -> Tuple[int, int]:
        """第 i 条 n 维串的 (起点, 长度)。"""
        start = self.offsets[n][i]
        return start, self.system.rank[self.nerve.composite[n][i]]


def accumulate_block(dod: Dict[int, Dict[int, object]], row0: int, col0: int, M: IntMatrix, sign: int) -> None:
    for i, row in M.to_dod().items():
        target = dod.setdefault(row0 + i, {})
        for j, v in row.items():
            value = v if sign > 0 else -v
            key = col0 + j
            if key in target:
                target[key] = target[key] + value
            else:
                target[key] = value


def _coboundary(C: FiniteCategory, D: NaturalSystem, nerve: NerveStrings, offsets, n: int) -> IntMatrix:
    """d_n: F^n → F^{n+1}，按靶串逐块填入各个面的贡献。"""
    table = C.table
    rank = D.rank
    ring = D.ring
    dod: Dict[int, Dict[int, object]] = {}
    src_comp = nerve.composite[n]
    src_index = nerve.index[n]
    src_off = offsets[n]
    for t, string in enumerate(nerve.strings[n + 1]):
        comp = nerve.composite[n + 1][t]
        size = rank[comp]
        if size == 0:
            continue
        row0 = offsets[n + 1][t]
        alpha1 = string[0]
        last = string[-1]
        if n == 0:
            first_face = (C.src[alpha1],)
            last_face = (C.tgt[alpha1],)
        else:
            first_face = string[1:]
            last_face = string[:-1]
        s = src_index[first_face]
        if rank[src_comp[s]]:
            accumulate_block(dod, row0, src_off[s], D.post[(alpha1, src_comp[s])], 1)
        for i in range(1, n + 1):
            face = string[: i - 1] + (table[string[i - 1]][string[i]],) + string[i + 1:]
            s = src_index[face]
            accumulate_block(dod, row0, src_off[s], identity_matrix(size, ring), 1 if i % 2 == 0 else -1)
        s = src_index[last_face]
        if rank[src_comp[s]]:
            accumulate_block(dod, row0, src_off[s], D.pre[(last, src_comp[s])], 1 if (n + 1) % 2 == 0 else -1)
    rows = sum(rank[c] for c in nerve.composite[n + 1])
    cols = sum(rank[c] for c in src_comp)
    return matrix_from_dod(dod, rows, cols, ring)


def bw_cochain(
    C: FiniteCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
) -> BWComplex:
    """构造 F^0..F^{N_max} 与 d_0..d_{N_max−1}。"""
    if N_max < 1:
        raise InputError(f"N_max 至少为 1，收到 {N_max}")
    if D.base is not C and D.base.structure() != C.structure():
        raise InputError(f"自然系统 {D.name} 不在范畴 {C.name} 上")
    nerve = enumerate_strings(C, N_max, D.rank, budget, where=f"F^*({C.name}, {D.name})")
    offsets = []
    ranks = []
    for n in range(N_max + 1):
        acc = 0
        layer_off = []
        for comp in nerve.composite[n]:
            layer_off.append(acc)
            acc += D.rank[comp]
        offsets.append(tuple(layer_off))
        ranks.append(acc)
    diffs = tuple(_coboundary(C, D, nerve, offsets, n) for n in range(N_max))
    cx = CochainComplex(D.ring, tuple(ranks), diffs, name=f"F({C.name},{D.name})")
    logger.debug("Catcoh：BW 复形已构建 category=%s system=%s ranks=%s", C.name, D.name, ranks)
    return BWComplex(C, D, nerve, tuple(offsets), cx)


def bw_cohomology(
    C: FiniteCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
) -> List[AbInvariants]:
    """H^0..H^{N_max−1}(C, D)。"""
    bw = bw_cochain(C, D, N_max, budget)
    return cohomology_table(bw.complex)


# ========== 诱导的上链映射 ==========

def induced_cochain_map(
    source: BWComplex,
    target: BWComplex,
    functor: CatFunctor,
    block: Callable[[int], IntMatrix],
    name: str = "",
) -> CochainMap:
    """
    (Φf)(α₁, …, α_n) = block(α₁⋯α_n) · f(Fα₁, …, Fα_n)

    functor 从 target 的范畴到 source 的范畴；block(c) 形状为 r_T(c) × r_S(F c)。
    """
    ring = source.system.ring
    top = min(source.nerve.max_degree, target.nerve.max_degree)
    obj_map, mor_map = functor.obj_map, functor.mor_map
    components = []
    for n in range(top + 1):
        dod: Dict[int, Dict[int, object]] = {}
        for t, string in enumerate(target.nerve.strings[n]):
            comp = target.nerve.composite[n][t]
            if target.system.rank[comp] == 0:
                continue
            if n == 0:
                image = (obj_map[string[0]],)
            else:
                image = tuple(mor_map[a] for a in string)
            s = source.nerve.index[n][image]
            if source.system.rank[source.nerve.composite[n][s]] == 0:
                continue
            accumulate_block(dod, target.offsets[n][t], source.offsets[n][s], block(comp), 1)
        components.append(matrix_from_dod(dod, target.complex.rank(n), source.complex.rank(n), ring))
    return CochainMap(source.complex, target.complex, tuple(components), name=name)


def pullback_cochain_map(
    F: CatFunctor,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    source: Optional[BWComplex] = None,
    target: Optional[BWComplex] = None,
) -> CochainMap:
    """F^*: F^*(B, D) → F^*(A, F^*D)，(F^*f)(α₁…α_n) = f(Fα₁…Fα_n)。"""
    if source is None:
        source = bw_cochain(F.target, D, N_max, budget)
    if target is None:
        target = bw_cochain(F.source, natsys_pullback(F, D, check=False), N_max, budget)
    ring = D.ring
    rank = target.system.rank
    return induced_cochain_map(
        source, target, F, lambda comp: identity_matrix(rank[comp], ring), name=f"{F.name or 'F'}^*"
    )


def cochain_map_from_system_map(
    C: FiniteCategory,
    phi: SystemMap,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
    source: Optional[BWComplex] = None,
    target: Optional[BWComplex] = None,
) -> CochainMap:
    """φ: S → T 诱导的 F^*(C, S) → F^*(C, T)，逐块乘 φ_{α₁⋯α_n}。"""
    if source is None:
        source = bw_cochain(C, phi.source, N_max, budget)
    if target is None:
        target = bw_cochain(C, phi.target, N_max, budget)
    return induced_cochain_map(
        source, target, identity_functor(C), lambda comp: phi.components[comp], name=phi.name or "φ_*"
    )
