"""
双复形与谱序列 (Bicomplex & Spectral Pages)

C^{p,q} 以三元组 (α₁..α_p ; (β₁,ξ₁)..(β_q,ξ_q) ; γ: j₀ → i_p) 为块索引，
块的系数为 D((β₁,ξ₁)∘⋯∘(β_q,ξ_q))。p = 0 时 γ 取 j₀ 出发的任意态射。

- δ：去掉 α₁；内部复合 (−1)^t；α_{p+1} 并入连接子 γ ↦ α_{p+1}γ，符号 (−1)^{p+1}
- ∂：(β₁,ξ₁)_* 且 γ ↦ γβ₁；内部复合 (−1)^t；(−1)^{q+1}(β_{q+1},ξ_{q+1})^*
- 全微分 D = δ + (−1)^p ∂

谱序列取列滤过 F^p Tot = ⊕_{p′≥p} C^{p′,*}，页面由持久化配对得到：
配对长度 r = p_行 − p_列 即在 E_r 上非零的 d_r。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from utils import logger

from .bw import DEFAULT_RANK_BUDGET, BWComplex, accumulate_block, bw_cochain, enumerate_strings
from .errors import InputError, NotAField, RankOverflowBudget
from .grothendieck import GrothendieckCategory
from .homalg import (
    AbInvariants,
    CochainComplex,
    CochainMap,
    IntMatrix,
    Ring,
    block_matrix,
    cohomology_at,
    cone_acyclic,
    is_zero,
    mat_mul,
    matrices_equal,
    matrix_from_dod,
    validate_chain_map,
    zero_matrix,
)
from .natsys import NaturalSystem
from .reports import CheckReport

Triple = Tuple[Tuple[int, ...], int, int]


def _add_identity(dod, row0: int, col0: int, size: int, sign: int, one) -> None:
    value = one if sign > 0 else -one
    for i in range(size):
        target = dod.setdefault(row0 + i, {})
        key = col0 + i
        target[key] = target[key] + value if key in target else value


@dataclass(eq=False)
class Bicomplex:
    """
    triples[(p, q)]：三元组 (K 串, ∫L 串编号, γ) 的列表；
    delta[(p, q)]: C^{p,q} → C^{p+1,q}，partial[(p, q)]: C^{p,q} → C^{p,q+1}。
    """

    ring: Ring
    N_max: int
    grothendieck: GrothendieckCategory
    system: NaturalSystem
    total_bw: BWComplex
    triples: Dict[Tuple[int, int], List[Triple]]
    index: Dict[Tuple[int, int], Dict[Triple, int]]
    offsets: Dict[Tuple[int, int], List[int]]
    ranks: Dict[Tuple[int, int], int]
    delta: Dict[Tuple[int, int], IntMatrix] = field(default_factory=dict)
    partial: Dict[Tuple[int, int], IntMatrix] = field(default_factory=dict)

    def rank(self, p: int, q: int) -> int:
        return self.ranks.get((p, q), 0)

    def cells(self):
        return sorted(self.ranks)

    def d_h(self, p: int, q: int) -> IntMatrix:
        if (p, q) in self.delta:
            return self.delta[(p, q)]
        return zero_matrix(self.rank(p + 1, q), self.rank(p, q), self.ring)

    def d_v(self, p: int, q: int) -> IntMatrix:
        if (p, q) in self.partial:
            return self.partial[(p, q)]
        return zero_matrix(self.rank(p, q + 1), self.rank(p, q), self.ring)


def build_bicomplex_thm1(
    G: GrothendieckCategory,
    D: NaturalSystem,
    N_max: int,
    budget: int = DEFAULT_RANK_BUDGET,
) -> Bicomplex:
    if N_max < 1:
        raise InputError(f"N_max 至少为 1，收到 {N_max}")
    K = G.diagram.K
    total = G.category
    bw = bw_cochain(total, D, N_max, budget)
    nerve = bw.nerve
    k_nerve = enumerate_strings(K, N_max, budget=budget, where=f"{K.name} 的串")
    obj_k = [k for k, _ in total.object_labels]
    proj = [alpha for alpha, _, _ in total.morphism_labels]

    def first_component(q: int, b: Tuple[int, ...]) -> int:
        # j₀：(β₁,ξ₁) 的靶（q = 0 时即该对象）的 K 分量
        return obj_k[b[0]] if q == 0 else obj_k[total.tgt[b[0]]]

    triples: Dict[Tuple[int, int], List[Triple]] = {}
    index: Dict[Tuple[int, int], Dict[Triple, int]] = {}
    offsets: Dict[Tuple[int, int], List[int]] = {}
    ranks: Dict[Tuple[int, int], int] = {}
    total_rank = 0
    for p in range(N_max + 1):
        k_strings = [()] if p == 0 else list(k_nerve.strings[p])
        for q in range(N_max - p + 1):
            layer: List[Triple] = []
            offs: List[int] = []
            acc = 0
            for a in k_strings:
                for b_idx, b in enumerate(nerve.strings[q]):
                    j0 = first_component(q, b)
                    gammas = K.out_of[j0] if p == 0 else K.hom(j0, K.src[a[-1]])
                    size = D.rank[nerve.composite[q][b_idx]]
                    for gamma in gammas:
                        layer.append((a, b_idx, gamma))
                        offs.append(acc)
                        acc += size
            total_rank += acc
            if total_rank > budget:
                raise RankOverflowBudget(total_rank, budget, f"双复形 C^{{{p},{q}}}")
            triples[(p, q)] = layer
            index[(p, q)] = {t: i for i, t in enumerate(layer)}
            offsets[(p, q)] = offs
            ranks[(p, q)] = acc

    B = Bicomplex(D.ring, N_max, G, D, bw, triples, index, offsets, ranks)
    one = D.ring.convert(1)
    string_pos = nerve.index

    for (p, q) in list(ranks):
        if p + q + 1 > N_max:
            continue
        # δ^{p,q}
        dod: Dict[int, Dict[int, object]] = {}
        src_index = index[(p, q)]
        src_off = offsets[(p, q)]
        for t_pos, (a, b_idx, gamma) in enumerate(triples[(p + 1, q)]):
            size = D.rank[nerve.composite[q][b_idx]]
            if size == 0:
                continue
            row0 = offsets[(p + 1, q)][t_pos]
            faces = [((a[1:], b_idx, gamma), 1)]
            for t in range(1, p + 1):
                merged = a[: t - 1] + (K.table[a[t - 1]][a[t]],) + a[t + 1:]
                faces.append(((merged, b_idx, gamma), 1 if t % 2 == 0 else -1))
            faces.append(((a[:-1], b_idx, K.table[a[-1]][gamma]), 1 if (p + 1) % 2 == 0 else -1))
            for key, sign in faces:
                _add_identity(dod, row0, src_off[src_index[key]], size, sign, one)
        B.delta[(p, q)] = matrix_from_dod(dod, ranks[(p + 1, q)], ranks[(p, q)], D.ring)

        # ∂^{p,q}
        dod = {}
        for t_pos, (a, b_idx, gamma) in enumerate(triples[(p, q + 1)]):
            comp = nerve.composite[q + 1][b_idx]
            size = D.rank[comp]
            if size == 0:
                continue
            row0 = offsets[(p, q + 1)][t_pos]
            b = nerve.strings[q + 1][b_idx]
            beta1, last = b[0], b[-1]
            if q == 0:
                first_face = (total.src[beta1],)
                last_face = (total.tgt[beta1],)
            else:
                first_face = b[1:]
                last_face = b[:-1]
            s_idx = string_pos[q][first_face]
            s_comp = nerve.composite[q][s_idx]
            key = (a, s_idx, K.table[gamma][proj[beta1]])
            if D.rank[s_comp]:
                accumulate_block(dod, row0, _cell_offset(offsets, index, p, q, key), D.post[(beta1, s_comp)], 1)
            for t in range(1, q + 1):
                merged = b[: t - 1] + (total.table[b[t - 1]][b[t]],) + b[t + 1:]
                key = (a, string_pos[q][merged], gamma)
                _add_identity(dod, row0, _cell_offset(offsets, index, p, q, key), size, 1 if t % 2 == 0 else -1, one)
            s_idx = string_pos[q][last_face]
            s_comp = nerve.composite[q][s_idx]
            if D.rank[s_comp]:
                key = (a, s_idx, gamma)
                accumulate_block(dod, row0, _cell_offset(offsets, index, p, q, key), D.pre[(last, s_comp)],
                            1 if (q + 1) % 2 == 0 else -1)
        B.partial[(p, q)] = matrix_from_dod(dod, ranks[(p, q + 1)], ranks[(p, q)], D.ring)

    logger.debug("Catcoh：双复形已构建 diagram=%s N_max=%s total_rank=%s", G.diagram.name, N_max, total_rank)
    return B


def _cell_offset(offsets, index, p: int, q: int, key: Triple) -> int:
    return offsets[(p, q)][index[(p, q)][key]]


def bicomplex_report(B: Bicomplex) -> CheckReport:
    """δδ = 0、∂∂ = 0、δ∂ = ∂δ 逐格检查。"""
    report = CheckReport(name="bicomplex", trusted_degree=B.N_max - 1)
    for (p, q) in B.cells():
        if p + q + 2 > B.N_max:
            continue
        report.record(f"δδ@({p},{q})", is_zero(mat_mul(B.d_h(p + 1, q), B.d_h(p, q))))
        report.record(f"∂∂@({p},{q})", is_zero(mat_mul(B.d_v(p, q + 1), B.d_v(p, q))))
        report.record(
            f"δ∂=∂δ@({p},{q})",
            matrices_equal(mat_mul(B.d_h(p, q + 1), B.d_v(p, q)), mat_mul(B.d_v(p + 1, q), B.d_h(p, q))),
        )
    return report


# ========== 全复形 ==========

def _tot_layout(B: Bicomplex, n: int) -> List[Tuple[int, int]]:
    return [(p, n - p) for p in range(n + 1)]


def total_complex(B: Bicomplex) -> CochainComplex:
    """Tot^n = ⊕_{p+q=n} C^{p,q}（按 p 升序），D = δ + (−1)^p ∂。"""
    ranks = []
    diffs = []
    for n in range(B.N_max + 1):
        ranks.append(sum(B.rank(p, q) for p, q in _tot_layout(B, n)))
    for n in range(B.N_max):
        src_cells = _tot_layout(B, n)
        dst_cells = _tot_layout(B, n + 1)
        blocks = {}
        for j, (p, q) in enumerate(src_cells):
            blocks[(j + 1, j)] = B.d_h(p, q)
            vertical = B.d_v(p, q)
            blocks[(j, j)] = vertical if p % 2 == 0 else vertical.neg()
        diffs.append(block_matrix(
            blocks,
            [B.rank(p, q) for p, q in dst_cells],
            [B.rank(p, q) for p, q in src_cells],
            B.ring,
        ))
    return CochainComplex(B.ring, tuple(ranks), tuple(diffs), name="Tot")


def tot_offset(B: Bicomplex, p: int, n: int) -> int:
    return sum(B.rank(p2, n - p2) for p2 in range(p))


# ========== φ 与行正合 ==========

def phi_components(B: Bicomplex) -> List[IntMatrix]:
    """φ^q: F^q(∫L, D) → C^{0,q}，(i₀; β; γ) 处取 f(β)。"""
    bw = B.total_bw
    out = []
    one = B.ring.convert(1)
    for q in range(B.N_max + 1):
        dod: Dict[int, Dict[int, object]] = {}
        for t_pos, (_, b_idx, _) in enumerate(B.triples[(0, q)]):
            start, size = bw.block(q, b_idx)
            _add_identity(dod, B.offsets[(0, q)][t_pos], start, size, 1, one)
        out.append(matrix_from_dod(dod, B.rank(0, q), bw.complex.rank(q), B.ring))
    return out


def phi_map(B: Bicomplex, tot: Optional[CochainComplex] = None) -> Tuple[CochainMap, CheckReport]:
    """φ̄: F^*(∫L, D) → Tot，并检查 δ^{0,*}φ = 0、链映射性与映射锥无环。"""
    tot = tot or total_complex(B)
    report = CheckReport(name="phi", trusted_degree=B.N_max - 1)
    components = []
    for q, phi in enumerate(phi_components(B)):
        if q < B.N_max:
            report.record(f"δ^{{0,{q}}}φ = 0", is_zero(mat_mul(B.d_h(0, q), phi)), degree=q)
        # C^{0,q} 是 Tot^q 的第一块
        dod = {i: row for i, row in phi.to_dod().items()}
        components.append(matrix_from_dod(dod, tot.rank(q), phi.shape[1], B.ring))
    cmap = CochainMap(B.total_bw.complex, tot, tuple(components), name="φ")
    problems = validate_chain_map(cmap)
    report.record("φ 是链映射", not problems, problems=problems)
    if not problems:
        for n, ok in cone_acyclic(cmap).items():
            report.record(f"cone(φ) 在 {n} 无环", ok, degree=n)
    return cmap, report


def row_exactness_check(B: Bicomplex) -> CheckReport:
    """0 → F^n → C^{0,n} → C^{1,n} → ⋯ 在 p ≤ N_max − n − 1 处正合。"""
    N = B.N_max
    report = CheckReport(name="rows", trusted_degree=N - 1)
    phis = phi_components(B)
    for n in range(N):
        top = N - n
        ranks = [B.total_bw.complex.rank(n)] + [B.rank(p, n) for p in range(top + 1)]
        diffs = [phis[n]] + [B.d_h(p, n) for p in range(top)]
        row = CochainComplex(B.ring, tuple(ranks), tuple(diffs), start_degree=-1, name=f"row{n}")
        for position in range(-1, row.trusted_degree + 1):
            value = cohomology_at(row, position)
            report.record(f"行 {n} 在位置 {position} 正合", value.is_zero, row=n, position=position, value=value.text)
    return report


# ========== E_1 与页面 ==========

def column_complex(B: Bicomplex, p: int) -> CochainComplex:
    top = B.N_max - p
    ranks = tuple(B.rank(p, q) for q in range(top + 1))
    diffs = tuple(B.d_v(p, q) for q in range(top))
    return CochainComplex(B.ring, ranks, diffs, name=f"C^{{{p},*}}")


def e1_invariants(B: Bicomplex) -> Dict[Tuple[int, int], AbInvariants]:
    """E_1^{p,q} = H^q(C^{p,*}, ∂)，p + q ≤ N_max − 1；任意系数环。"""
    out = {}
    for p in range(B.N_max):
        cx = column_complex(B, p)
        for q in range(B.N_max - p):
            out[(p, q)] = cohomology_at(cx, q)
    return out


@dataclass
class PageTable:
    r: int
    dims: Dict[Tuple[int, int], int]
    rank_out: Dict[Tuple[int, int], Optional[int]]
    stable: Dict[Tuple[int, int], bool]

    def dim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def to_records(self) -> List[dict]:
        return [
            {"r": self.r, "p": p, "q": q, "dim": self.dims[(p, q)],
             "stable": self.stable[(p, q)], "rank_out": self.rank_out[(p, q)]}
            for p, q in sorted(self.dims)
        ]


@dataclass
class SpectralResult:
    """pages[r − 1] 为 E_r；abutment[n] = Σ_p dim E_∞^{p, n−p}。"""

    N_max: int
    pages: List[PageTable]
    abutment: List[int]
    pairs: List[Tuple[int, int, int]]

    def page(self, r: int) -> PageTable:
        return self.pages[r - 1]

    @property
    def stable_degrees(self) -> List[int]:
        """所有 p+q = n 的项在已算页内都已稳定的总次数 n。"""
        last = self.pages[-1] if self.pages else None
        if last is None:
            return []
        return [
            n for n in range(self.N_max)
            if all(last.stable[(p, n - p)] for p in range(n + 1))
        ]


def _persistence_pairs(B: Bicomplex, tot: CochainComplex):
    """
    列滤过的持久化约化

    基元素按 (p 降序, 次数降序) 排列，使每个前缀都是子复形；
    low(j) 为列 j 中位置最靠后的非零行。返回 (元素列表, 配对列表)。
    """
    p_char = B.ring.p
    elements = []
    for n in range(B.N_max + 1):
        for p, q in _tot_layout(B, n):
            start = tot_offset(B, p, n)
            for i in range(B.rank(p, q)):
                elements.append((p, n, start + i))
    elements.sort(key=lambda e: (-e[0], -e[1], e[2]))
    position = {(n, idx): k for k, (_, n, idx) in enumerate(elements)}

    columns_by_degree = {}
    for n in range(B.N_max):
        dod = tot.d(n).to_dod()
        cols: Dict[int, Dict[int, int]] = {}
        for i, row in dod.items():
            for j, v in row.items():
                value = B.ring.to_int(v)
                if value:
                    cols.setdefault(j, {})[position[(n + 1, i)]] = value
        columns_by_degree[n] = cols

    pivots: Dict[int, Dict[int, int]] = {}
    pairs = []
    for k, (p, n, idx) in enumerate(elements):
        col = dict(columns_by_degree.get(n, {}).get(idx, {}))
        while col:
            low = max(col)
            other = pivots.get(low)
            if other is None:
                break
            factor = col[low] * pow(other[low], -1, p_char) % p_char
            for row, v in other.items():
                new = (col.get(row, 0) - factor * v) % p_char
                if new:
                    col[row] = new
                else:
                    col.pop(row, None)
        if col:
            low = max(col)
            pivots[low] = col
            pairs.append((low, k))
    return elements, pairs


def spectral_pages(B: Bicomplex, r_max: int, tot: Optional[CochainComplex] = None) -> SpectralResult:
    """E_1..E_{r_max}（域系数），只报告 p + q ≤ N_max − 1。"""
    if not B.ring.is_field:
        raise NotAField(f"谱序列页面需要域系数，当前为 {B.ring}")
    if r_max < 1:
        raise InputError(f"页数至少为 1，收到 {r_max}")
    tot = tot or total_complex(B)
    elements, pairs = _persistence_pairs(B, tot)
    N = B.N_max
    paired = set()
    lengths = []
    for row, col in pairs:
        p_row, n_row, _ = elements[row]
        p_col, n_col, _ = elements[col]
        paired.update((row, col))
        lengths.append((p_col, n_col, p_row, n_row, p_row - p_col))
    essential: Dict[Tuple[int, int], int] = {}
    for k, (p, n, _) in enumerate(elements):
        if k not in paired:
            essential[(p, n)] = essential.get((p, n), 0) + 1

    pages = []
    for r in range(1, r_max + 1):
        dims, rank_out, stable = {}, {}, {}
        for n in range(N):
            for p in range(n + 1):
                q = n - p
                count = essential.get((p, n), 0)
                out_rank = 0
                for p_col, n_col, p_row, n_row, length in lengths:
                    if length < r:
                        continue
                    if (p_col, n_col) == (p, n) or (p_row, n_row) == (p, n):
                        count += 1
                    if length == r and (p_col, n_col) == (p, n):
                        out_rank += 1
                dims[(p, q)] = count
                rank_out[(p, q)] = out_rank if n + 1 <= N - 1 else None
                stable[(p, q)] = r >= max(p + 1, q + 2)
        pages.append(PageTable(r, dims, rank_out, stable))
    abutment = [sum(essential.get((p, n), 0) for p in range(n + 1)) for n in range(N)]
    logger.debug("Catcoh：谱序列页面完成 pages=%s pairs=%s abutment=%s", r_max, len(pairs), abutment)
    return SpectralResult(N, pages, abutment, [(p_col, n_col, length) for p_col, n_col, _, _, length in lengths])
