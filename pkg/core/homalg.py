"""
精确同调代数 (Exact Homological Algebra)

矩阵统一用 sympy 的 DomainMatrix（稀疏 SDM 格式）承载，系数环为 ℤ 或 𝔽_p。

主要功能：
- Ring：ℤ / 𝔽_p 标签与 sympy 域之间的换算
- smith_normal_form：最小绝对值主元的 Smith 标准形，带幺模变换 U·M·V = S
- invariant_factors：先做稀疏单位主元消元，再对残余稠密块做 Smith 约化
- CochainComplex / CochainMap / mapping_cone / cone_acyclic
- cohomology_at：ℤ 上给出自由秩与挠系数，域上给出维数
- CohomologyBasis：域上的代表上闭链基与类坐标，用于计算诱导映射

截断约定：存储到 N_max 的复形只在 N_max−1 及以下可信。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import isprime
from sympy.polys.domains import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from utils import format_group, logger

from .errors import DegreeBeyondTrusted, NotAChainMap, NotAField, ParseError

IntMatrix = DomainMatrix


@lru_cache(maxsize=None)
def _prime_field(p: int):
    return GF(p)


@dataclass(frozen=True)
class Ring:
    """p == 0 表示 ℤ，否则为素域 𝔽_p。"""

    p: int = 0

    def __post_init__(self):
        if self.p < 0 or (self.p and not isprime(self.p)):
            raise ParseError(f"𝔽_p 需要素数 p，收到 {self.p}")

    @classmethod
    def parse(cls, tag: str) -> "Ring":
        text = str(tag or "").strip().lower()
        if text in {"zz", "z", "ℤ"}:
            return cls(0)
        if text.startswith("fp:"):
            try:
                return cls(int(text[3:]))
            except ValueError as exc:
                raise ParseError(f"无法解析环标签 {tag!r}") from exc
        raise ParseError(f"未知的环标签 {tag!r}（应为 zz 或 fp:<p>）")

    @property
    def is_field(self) -> bool:
        return self.p != 0

    @property
    def tag(self) -> str:
        return f"fp:{self.p}" if self.p else "zz"

    @property
    def domain(self):
        return _prime_field(self.p) if self.p else ZZ

    def convert(self, value: int):
        return self.domain(int(value))

    def to_int(self, element) -> int:
        value = int(element)
        return value % self.p if self.p else value

    def __str__(self) -> str:
        return f"𝔽_{self.p}" if self.p else "ℤ"


ZZ_RING = Ring(0)


# ========== 矩阵辅助 ==========

def _clean_dod(dod: Dict[int, Dict[int, object]]) -> Dict[int, Dict[int, object]]:
    cleaned = {}
    for i, row in dod.items():
        kept = {j: v for j, v in row.items() if v}
        if kept:
            cleaned[i] = kept
    return cleaned


def matrix_from_dod(dod: Dict[int, Dict[int, object]], rows: int, cols: int, ring: Ring) -> IntMatrix:
    """字典字典 → 稀疏矩阵（剔除零元，整数会先转成环元素）。"""
    domain = ring.domain
    converted = {}
    for i, row in dod.items():
        kept = {}
        for j, v in row.items():
            element = v if not isinstance(v, int) else domain(v)
            if element:
                kept[j] = element
        if kept:
            converted[i] = kept
    return DomainMatrix.from_dod(converted, (rows, cols), domain)


def matrix_from_rows(rows: Sequence[Sequence[int]], ring: Ring, shape: Optional[Tuple[int, int]] = None) -> IntMatrix:
    n_rows = len(rows) if shape is None else shape[0]
    n_cols = (len(rows[0]) if rows else 0) if shape is None else shape[1]
    dod = {i: {j: int(v) for j, v in enumerate(row) if int(v)} for i, row in enumerate(rows)}
    return matrix_from_dod(dod, n_rows, n_cols, ring)


def zero_matrix(rows: int, cols: int, ring: Ring) -> IntMatrix:
    return DomainMatrix.zeros((rows, cols), ring.domain)


@lru_cache(maxsize=256)
def identity_matrix(n: int, ring: Ring) -> IntMatrix:
    return DomainMatrix.eye(n, ring.domain).to_sparse()


def matrix_to_rows(M: IntMatrix, ring: Ring) -> List[List[int]]:
    rows, cols = M.shape
    out = [[0] * cols for _ in range(rows)]
    for i, row in M.to_dod().items():
        for j, v in row.items():
            out[i][j] = ring.to_int(v)
    return out


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    """稀疏乘法；避免 DomainMatrix.__mul__ 的稠密化。"""
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"矩阵形状不可乘：{A.shape} × {B.shape}")
    return A.to_sparse().matmul(B.to_sparse())


def mat_add(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    return A.to_sparse().add(B.to_sparse())


def matrices_equal(A: IntMatrix, B: IntMatrix) -> bool:
    return A.shape == B.shape and _clean_dod(A.to_dod()) == _clean_dod(B.to_dod())


def is_zero(M: IntMatrix) -> bool:
    return not _clean_dod(M.to_dod())


def rank_over(M: IntMatrix, ring: Ring) -> int:
    """域上的秩走 sympy 的稀疏 rref；ℤ 上取不变因子个数。"""
    if 0 in M.shape:
        return 0
    if ring.is_field:
        return M.to_sparse().rank()
    return len(invariant_factors(M))


def is_invertible(M: IntMatrix, ring: Ring) -> bool:
    rows, cols = M.shape
    if rows != cols:
        return False
    if rows == 0:
        return True
    det = ring.to_int(M.to_dense().det())
    return det != 0 if ring.is_field else det in (1, -1)


def inverse_matrix(M: IntMatrix, ring: Ring) -> IntMatrix:
    """域上的逆矩阵；0×0 原样返回。"""
    if not ring.is_field:
        raise NotAField(f"求逆只在域系数上进行，当前为 {ring}")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"非方阵不可逆：{M.shape}")
    if M.shape[0] == 0:
        return M
    return M.to_dense().inv().to_sparse()


# ========== Smith 标准形 ==========

def _min_abs_entry(a: List[List[int]], t: int, m: int, n: int) -> Optional[Tuple[int, int]]:
    best = None
    best_abs = 0
    for i in range(t, m):
        row = a[i]
        for j in range(t, n):
            v = row[j]
            if v and (best is None or abs(v) < best_abs):
                best, best_abs = (i, j), abs(v)
                if best_abs == 1:
                    return best
    return best


def _swap_rows(a, i, k, U):
    if i != k:
        a[i], a[k] = a[k], a[i]
        if U is not None:
            U[i], U[k] = U[k], U[i]


def _swap_cols(a, j, k, V):
    if j != k:
        for row in a:
            row[j], row[k] = row[k], row[j]
        if V is not None:
            for row in V:
                row[j], row[k] = row[k], row[j]


def _add_row(a, target, source, factor, U):
    """row_target += factor · row_source"""
    src_row, dst_row = a[source], a[target]
    for j, v in enumerate(src_row):
        if v:
            dst_row[j] += factor * v
    if U is not None:
        src_u, dst_u = U[source], U[target]
        for j, v in enumerate(src_u):
            if v:
                dst_u[j] += factor * v


def _add_col(a, target, source, factor, V):
    """col_target += factor · col_source"""
    for row in a:
        if row[source]:
            row[target] += factor * row[source]
    if V is not None:
        for row in V:
            if row[source]:
                row[target] += factor * row[source]


def _smith_in_place(a: List[List[int]], m: int, n: int, U=None, V=None) -> int:
    """稠密 Smith 约化（原地），返回非零对角元个数；U、V 同步记录行/列变换。"""
    t = 0
    while t < min(m, n):
        pivot = _min_abs_entry(a, t, m, n)
        if pivot is None:
            break
        _swap_rows(a, t, pivot[0], U)
        _swap_cols(a, t, pivot[1], V)
        while True:
            clean = True
            p = a[t][t]
            for i in range(t + 1, m):
                if a[i][t]:
                    _add_row(a, i, t, -(a[i][t] // p), U)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if a[t][j]:
                    _add_col(a, j, t, -(a[t][j] // p), V)
                    if a[t][j]:
                        clean = False
            if not clean:
                candidates = [(abs(a[i][t]), i, t) for i in range(t + 1, m) if a[i][t]]
                candidates += [(abs(a[t][j]), t, j) for j in range(t + 1, n) if a[t][j]]
                _, i, j = min(candidates)
                _swap_rows(a, t, i, U)
                _swap_cols(a, t, j, V)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            _add_row(a, t, bad, 1, U)
        if a[t][t] < 0:
            a[t] = [-v for v in a[t]]
            if U is not None:
                U[t] = [-v for v in U[t]]
        t += 1
    return t


def smith_normal_form(M: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """
    ℤ 上的 Smith 标准形

    Returns:
        (U, S, V)：U·M·V = S，U、V 幺模，S 对角且 S_ii | S_{i+1,i+1}，对角元非负
    """
    m, n = M.shape
    a = matrix_to_rows(M, ZZ_RING)
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    _smith_in_place(a, m, n, U, V)
    return (
        matrix_from_rows(U, ZZ_RING, (m, m)),
        matrix_from_rows(a, ZZ_RING, (m, n)),
        matrix_from_rows(V, ZZ_RING, (n, n)),
    )


def invariant_factors(M: IntMatrix) -> List[int]:
    """
    非零不变因子（升序整除链），不记录变换。

    先用 ±1 主元做稀疏消元（Markowitz 式选列），剩余块再走稠密 Smith 约化。
    """
    rows: Dict[int, Dict[int, int]] = {}
    cols: Dict[int, set] = {}
    for i, row in M.to_dod().items():
        kept = {j: int(v) for j, v in row.items() if int(v)}
        if kept:
            rows[i] = kept
            for j in kept:
                cols.setdefault(j, set()).add(i)

    ones = 0
    stack = list(rows)
    while stack:
        i = stack.pop()
        row = rows.get(i)
        if not row:
            continue
        units = [j for j, v in row.items() if v in (1, -1)]
        if not units:
            continue
        j = min(units, key=lambda c: len(cols[c]))
        a = row[j]
        del rows[i]
        for c in row:
            cols[c].discard(i)
        for r in list(cols.pop(j, ())):
            target = rows[r]
            factor = target[j] * a
            for c, v in row.items():
                new = target.get(c, 0) - factor * v
                if new:
                    if c not in target:
                        cols.setdefault(c, set()).add(r)
                    target[c] = new
                elif c in target:
                    del target[c]
                    # 主元列已整体弹出
                    if c != j:
                        cols[c].discard(r)
            if not target:
                del rows[r]
            else:
                stack.append(r)
        ones += 1

    factors = [1] * ones
    if rows:
        col_ids = sorted({c for row in rows.values() for c in row})
        col_pos = {c: k for k, c in enumerate(col_ids)}
        dense = []
        for row in rows.values():
            line = [0] * len(col_ids)
            for c, v in row.items():
                line[col_pos[c]] = v
            dense.append(line)
        logger.debug("Catcoh：不变因子残余稠密块 shape=%sx%s", len(dense), len(col_ids))
        t = _smith_in_place(dense, len(dense), len(col_ids))
        factors.extend(dense[k][k] for k in range(t))
    return factors


# ========== 阿贝尔群不变量 ==========

@dataclass(frozen=True)
class AbInvariants:
    """有限生成阿贝尔群：自由秩 + 挠系数整除链；域上 torsion 恒为空。"""

    free_rank: int
    torsion: Tuple[int, ...] = ()
    field_char: int = 0

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def text(self) -> str:
        return format_group(self.free_rank, self.torsion, self.field_char or None)

    def to_dict(self, degree: Optional[int] = None) -> dict:
        record = {"free_rank": self.free_rank, "torsion": list(self.torsion), "text": self.text}
        if degree is not None:
            record = {"degree": degree, **record}
        return record

    def __str__(self) -> str:
        return self.text


# ========== 上链复形 ==========

@dataclass(frozen=True, eq=False)
class CochainComplex:
    """
    次数 0..N_max 的上链复形，differentials[n] 形状为 (rank_{n+1}, rank_n)。

    start_degree 允许整体平移（映射锥从 −1 开始）。
    """

    ring: Ring
    ranks: Tuple[int, ...]
    differentials: Tuple[IntMatrix, ...]
    start_degree: int = 0
    name: str = ""

    @property
    def max_degree(self) -> int:
        return self.start_degree + len(self.ranks) - 1

    @property
    def trusted_degree(self) -> int:
        return self.max_degree - 1

    def rank(self, n: int) -> int:
        k = n - self.start_degree
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    def d(self, n: int) -> IntMatrix:
        """d_n: C^n → C^{n+1}；存储范围外返回零矩阵。"""
        k = n - self.start_degree
        if 0 <= k < len(self.differentials):
            return self.differentials[k]
        return zero_matrix(self.rank(n + 1), self.rank(n), self.ring)

    def validate(self) -> List[str]:
        problems = []
        if len(self.differentials) != max(len(self.ranks) - 1, 0):
            problems.append("微分个数与存储次数不符")
            return problems
        for k, d in enumerate(self.differentials):
            n = self.start_degree + k
            if d.shape != (self.rank(n + 1), self.rank(n)):
                problems.append(f"d_{n} 形状 {d.shape} 与秩不符")
        if problems:
            return problems
        for k in range(len(self.differentials) - 1):
            n = self.start_degree + k
            if not is_zero(mat_mul(self.differentials[k + 1], self.differentials[k])):
                problems.append(f"d_{n + 1}·d_{n} ≠ 0")
        return problems

    def reduce_mod(self, p: int) -> "CochainComplex":
        """ℤ 系数复形 ⊗ 𝔽_p。"""
        target = Ring(p)
        if self.ring.is_field:
            raise NotAField(f"只能从 ℤ 约化，当前为 {self.ring}")
        diffs = tuple(d.convert_to(target.domain) for d in self.differentials)
        return CochainComplex(target, self.ranks, diffs, self.start_degree, self.name)

    @cached_property
    def _rank_cache(self) -> Dict[int, int]:
        return {}

    def rank_of_d(self, n: int) -> int:
        cache = self._rank_cache
        if n not in cache:
            cache[n] = rank_over(self.d(n), self.ring)
        return cache[n]


def cohomology_at(cx: CochainComplex, n: int) -> AbInvariants:
    """H^n = ker d_n / im d_{n−1}。ℤ 上挠部分来自 d_{n−1} 的不变因子。"""
    if n > cx.trusted_degree:
        raise DegreeBeyondTrusted(n, cx.trusted_degree)
    dim = cx.rank(n)
    if cx.ring.is_field:
        free = dim - cx.rank_of_d(n) - cx.rank_of_d(n - 1)
        return AbInvariants(free, (), cx.ring.p)
    incoming = invariant_factors(cx.d(n - 1)) if cx.rank(n - 1) and dim else []
    free = dim - cx.rank_of_d(n) - len(incoming)
    torsion = tuple(sorted(d for d in (abs(v) for v in incoming) if d > 1))
    return AbInvariants(free, torsion)


def cohomology_table(cx: CochainComplex, up_to: Optional[int] = None) -> List[AbInvariants]:
    last = cx.trusted_degree if up_to is None else min(up_to, cx.trusted_degree)
    return [cohomology_at(cx, n) for n in range(cx.start_degree, last + 1)]


# ========== 上链映射与映射锥 ==========

@dataclass(frozen=True, eq=False)
class CochainMap:
    """f_n: S^n → T^n，components[k] 对应次数 source.start_degree + k。"""

    source: CochainComplex
    target: CochainComplex
    components: Tuple[IntMatrix, ...]
    name: str = ""

    @property
    def max_degree(self) -> int:
        return min(self.source.max_degree, self.target.max_degree, len(self.components) - 1)

    def f(self, n: int) -> IntMatrix:
        if 0 <= n < len(self.components):
            return self.components[n]
        return zero_matrix(self.target.rank(n), self.source.rank(n), self.source.ring)


def validate_chain_map(f: CochainMap) -> List[str]:
    problems = []
    for n in range(f.max_degree + 1):
        if f.f(n).shape != (f.target.rank(n), f.source.rank(n)):
            problems.append(f"f_{n} 形状 {f.f(n).shape} 不符")
    if problems:
        return problems
    for n in range(f.max_degree):
        lhs = mat_mul(f.target.d(n), f.f(n))
        rhs = mat_mul(f.f(n + 1), f.source.d(n))
        if not matrices_equal(lhs, rhs):
            problems.append(f"次数 {n} 处 d_T·f ≠ f·d_S")
    return problems


def block_matrix(blocks: Dict[Tuple[int, int], IntMatrix], row_sizes, col_sizes, ring: Ring) -> IntMatrix:
    row_off = [0]
    for size in row_sizes:
        row_off.append(row_off[-1] + size)
    col_off = [0]
    for size in col_sizes:
        col_off.append(col_off[-1] + size)
    dod: Dict[int, Dict[int, object]] = {}
    for (bi, bj), block in blocks.items():
        for i, row in block.to_dod().items():
            target = dod.setdefault(row_off[bi] + i, {})
            for j, v in row.items():
                target[col_off[bj] + j] = v
    return matrix_from_dod(dod, row_off[-1], col_off[-1], ring)


def mapping_cone(f: CochainMap) -> CochainComplex:
    """cone^n = S^{n+1} ⊕ T^n，d(s, t) = (−d_S s, f s + d_T t)，次数从 −1 起。"""
    problems = validate_chain_map(f)
    if problems:
        raise NotAChainMap("；".join(problems))
    S, T, ring = f.source, f.target, f.source.ring
    top = f.max_degree
    ranks = [S.rank(n + 1) + T.rank(n) for n in range(-1, top)]
    diffs = []
    for n in range(-1, top - 1):
        blocks = {
            (0, 0): S.d(n + 1).neg(),
            (1, 0): f.f(n + 1),
            (1, 1): T.d(n),
        }
        diffs.append(
            block_matrix(blocks, [S.rank(n + 2), T.rank(n + 1)], [S.rank(n + 1), T.rank(n)], ring)
        )
    return CochainComplex(ring, tuple(ranks), tuple(diffs), start_degree=-1, name=f"cone({f.name})")


def cone_acyclic(f: CochainMap) -> Dict[int, bool]:
    """映射锥在每个可信次数上是否无环（H^n(cone) = 0）。"""
    cone = mapping_cone(f)
    verdicts = {}
    for n in range(cone.start_degree, cone.trusted_degree + 1):
        verdicts[n] = cohomology_at(cone, n).is_zero
    logger.debug("Catcoh：映射锥检查 map=%s verdicts=%s", f.name, verdicts)
    return verdicts


def is_quasi_isomorphism(f: CochainMap) -> bool:
    return all(cone_acyclic(f).values())


# ========== 域上的上同调基 ==========

@dataclass
class CohomologyBasis:
    """
    域上 H^n 的代表上闭链基

    reps 的列是代表元；coordinates(c) 给出上闭链 c 的类坐标（列向量）。
    """

    ring: Ring
    dimension: int
    reps: IntMatrix
    _pivot_rows: List[int] = field(default_factory=list)
    _solver: Optional[IntMatrix] = None
    _boundary_rank: int = 0

    @classmethod
    def build(cls, cx: CochainComplex, n: int) -> "CohomologyBasis":
        ring = cx.ring
        if not ring.is_field:
            raise NotAField("代表基只在域系数上构造")
        if n > cx.trusted_degree:
            raise DegreeBeyondTrusted(n, cx.trusted_degree)
        size = cx.rank(n)
        if size == 0:
            return cls(ring, 0, zero_matrix(0, 0, ring))
        incoming = cx.d(n - 1).to_dense()
        boundaries = incoming.columnspace() if 0 not in incoming.shape else zero_matrix(size, 0, ring).to_dense()
        outgoing = cx.d(n).to_dense()
        if outgoing.shape[0] == 0:
            cycles = identity_matrix(size, ring).to_dense()
        else:
            cycles = outgoing.nullspace().transpose()
        n_b = boundaries.shape[1]
        combined = boundaries.hstack(cycles) if n_b else cycles
        _, pivots = combined.rref()
        chosen = [k - n_b for k in pivots if k >= n_b]
        reps = cycles.extract(list(range(size)), chosen) if chosen else zero_matrix(size, 0, ring).to_dense()
        basis = boundaries.hstack(reps) if n_b and chosen else (boundaries if n_b else reps)
        dim = len(chosen)
        pivot_rows: List[int] = []
        solver = None
        if basis.shape[1]:
            _, row_pivots = basis.transpose().rref()
            pivot_rows = list(row_pivots)
            square = basis.extract(pivot_rows, list(range(basis.shape[1])))
            solver = square.inv()
        return cls(ring, dim, reps.to_sparse(), pivot_rows, solver, n_b)

    def coordinates(self, cocycles: IntMatrix) -> IntMatrix:
        """cocycles 的列必须是上闭链；返回 dim × k 的类坐标。"""
        k = cocycles.shape[1]
        if self.dimension == 0 or self._solver is None:
            return zero_matrix(self.dimension, k, self.ring)
        picked = cocycles.to_dense().extract(self._pivot_rows, list(range(k)))
        full = self._solver.matmul(picked)
        total = self._boundary_rank + self.dimension
        return full.extract(list(range(self._boundary_rank, total)), list(range(k))).to_sparse()


def induced_on_cohomology(f: CochainMap, n: int, basis_src: CohomologyBasis, basis_tgt: CohomologyBasis) -> IntMatrix:
    """H^n(f) 在两组代表基下的矩阵（dim_tgt × dim_src）。"""
    if basis_src.dimension == 0:
        return zero_matrix(basis_tgt.dimension, 0, f.source.ring)
    images = mat_mul(f.f(n), basis_src.reps)
    return basis_tgt.coordinates(images)
