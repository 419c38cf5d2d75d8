"""
有限范畴与函子 (Finite Categories)

全部范畴都以扁平的整数索引表示：态射全局编号，hom 集合只是派生视图。
复合存成稠密的 |Mor|×|Mor| 偏函数表，不可复合处填 NO_COMP。

主要功能：
- FiniteCategory / CatFunctor / Adjunction 三个不可变类型
- validate_category / validate_functor / validate_adjunction：穷举校验，返回 ValidationReport
- 构造器：偏序集、幺半群、循环群、离散范畴、under 范畴 K↑j₀
- 函子工具：恒等、复合、常值、偏序映射；Galois 连接
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils import logger

from .errors import NotAFunctor, NotAMonoid, ObjectOutOfRange, RelationNotPartialOrder, ValidationError

NO_COMP = -1


@dataclass
class ValidationReport:
    """校验报告：violations 为空即通过。"""

    subject: str = ""
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def merge(self, other: "ValidationReport", prefix: str = "") -> None:
        for message in other.violations:
            self.violations.append(f"{prefix}{message}" if prefix else message)

    def raise_if_invalid(self, stage: str = "") -> None:
        if self.ok:
            return
        for message in self.violations:
            logger.error("Catcoh：校验失败 subject=%s stage=%s：%s", self.subject, stage, message)
        raise ValidationError(
            f"{self.subject or '结构'} 校验失败（{stage or '-'}）：{self.violations[0]}"
            + (f" 等 {len(self.violations)} 处" if len(self.violations) > 1 else ""),
            report=self,
        )


@dataclass(frozen=True, eq=False)
class FiniteCategory:
    """
    有限范畴

    table[g][f] 是 g∘f 的索引，恰在 tgt(f) == src(g) 时有定义。
    object_labels / morphism_labels 只用于展示与反查，不参与运算。
    """

    n_objects: int
    src: Tuple[int, ...]
    tgt: Tuple[int, ...]
    identity: Tuple[int, ...]
    table: Tuple[Tuple[int, ...], ...]
    name: str = ""
    object_labels: Optional[Tuple] = None
    morphism_labels: Optional[Tuple] = None

    @property
    def n_morphisms(self) -> int:
        return len(self.src)

    @cached_property
    def out_of(self) -> Tuple[Tuple[int, ...], ...]:
        """out_of[x]：以 x 为源的态射（升序）。"""
        buckets: List[List[int]] = [[] for _ in range(self.n_objects)]
        for f, s in enumerate(self.src):
            buckets[s].append(f)
        return tuple(tuple(b) for b in buckets)

    @cached_property
    def into(self) -> Tuple[Tuple[int, ...], ...]:
        """into[y]：以 y 为靶的态射（升序）。"""
        buckets: List[List[int]] = [[] for _ in range(self.n_objects)]
        for f, t in enumerate(self.tgt):
            buckets[t].append(f)
        return tuple(tuple(b) for b in buckets)

    @cached_property
    def _hom_index(self) -> Dict[Tuple[int, int], Tuple[int, ...]]:
        index: Dict[Tuple[int, int], List[int]] = {}
        for f in range(self.n_morphisms):
            index.setdefault((self.src[f], self.tgt[f]), []).append(f)
        return {key: tuple(value) for key, value in index.items()}

    @cached_property
    def is_identity_morphism(self) -> Tuple[bool, ...]:
        flags = [False] * self.n_morphisms
        for f in self.identity:
            flags[f] = True
        return tuple(flags)

    @cached_property
    def morphism_lookup(self) -> Dict:
        """morphism_labels 的反查表（label → 索引）。"""
        if self.morphism_labels is None:
            return {}
        return {label: f for f, label in enumerate(self.morphism_labels)}

    @cached_property
    def object_lookup(self) -> Dict:
        if self.object_labels is None:
            return {}
        return {label: x for x, label in enumerate(self.object_labels)}

    def hom(self, x: int, y: int) -> Tuple[int, ...]:
        return self._hom_index.get((x, y), ())

    def is_composable(self, g: int, f: int) -> bool:
        return self.tgt[f] == self.src[g]

    def compose(self, g: int, f: int) -> int:
        """g∘f；不可复合时抛 ValueError。"""
        h = self.table[g][f]
        if h == NO_COMP:
            raise ValueError(f"{self.name or '范畴'}：态射 {g}∘{f} 不可复合")
        return h

    def composite(self, chain: Sequence[int]) -> int:
        """α₁∘α₂∘⋯∘α_n（chain 按 α₁..α_n 给出，非空）。"""
        acc = chain[-1]
        table = self.table
        for alpha in reversed(chain[:-1]):
            acc = table[alpha][acc]
        return acc

    def structure(self) -> Tuple:
        """结构签名：用于判定两份描述是否给出同一个范畴。"""
        return (self.n_objects, self.src, self.tgt, self.identity, self.table)

    def describe_morphism(self, f: int) -> str:
        if self.morphism_labels is not None:
            return str(self.morphism_labels[f])
        return f"#{f}:{self.src[f]}→{self.tgt[f]}"

    def __repr__(self) -> str:
        return f"FiniteCategory(name={self.name!r}, objects={self.n_objects}, morphisms={self.n_morphisms})"


def make_category(
    n_objects: int,
    arrows: Sequence[Tuple[int, int]],
    identity: Sequence[int],
    compose_fn,
    name: str = "",
    object_labels: Optional[Sequence] = None,
    morphism_labels: Optional[Sequence] = None,
) -> FiniteCategory:
    """按 compose_fn(g, f) 填表构造范畴，只对可复合对调用。"""
    src = tuple(a for a, _ in arrows)
    tgt = tuple(b for _, b in arrows)
    by_src: List[List[int]] = [[] for _ in range(n_objects)]
    for g, s in enumerate(src):
        by_src[s].append(g)
    table = []
    for g in range(len(arrows)):
        row = [NO_COMP] * len(arrows)
        table.append(row)
    for f in range(len(arrows)):
        for g in by_src[tgt[f]]:
            table[g][f] = compose_fn(g, f)
    return FiniteCategory(
        n_objects=n_objects,
        src=src,
        tgt=tgt,
        identity=tuple(identity),
        table=tuple(tuple(row) for row in table),
        name=name,
        object_labels=tuple(object_labels) if object_labels is not None else None,
        morphism_labels=tuple(morphism_labels) if morphism_labels is not None else None,
    )


# ========== 校验 ==========

def validate_category(cat: FiniteCategory) -> ValidationReport:
    """穷举检查单位律、结合律与复合表的定义域。"""
    report = ValidationReport(subject=f"范畴 {cat.name or '?'}")
    n_mor = len(cat.src)
    if len(cat.tgt) != n_mor:
        report.add(f"src 与 tgt 长度不一致：{n_mor} vs {len(cat.tgt)}")
        return report
    for f in range(n_mor):
        if not (0 <= cat.src[f] < cat.n_objects and 0 <= cat.tgt[f] < cat.n_objects):
            report.add(f"态射 {f} 的端点越界：{cat.src[f]}→{cat.tgt[f]}")
    if len(cat.identity) != cat.n_objects:
        report.add(f"恒等态射数 {len(cat.identity)} ≠ 对象数 {cat.n_objects}")
    if not report.ok:
        return report
    for x, e in enumerate(cat.identity):
        if not 0 <= e < n_mor:
            report.add(f"对象 {x} 的恒等态射 {e} 越界")
        elif cat.src[e] != x or cat.tgt[e] != x:
            report.add(f"对象 {x} 的恒等态射 {e} 不是 {x}→{x}")
    if len(cat.table) != n_mor or any(len(row) != n_mor for row in cat.table):
        report.add("复合表形状不是 |Mor|×|Mor|")
    if not report.ok:
        return report

    for g in range(n_mor):
        row = cat.table[g]
        for f in range(n_mor):
            h = row[f]
            composable = cat.tgt[f] == cat.src[g]
            if not composable:
                if h != NO_COMP:
                    report.add(f"不可复合对 ({g},{f}) 在复合表中有值 {h}")
                continue
            if h == NO_COMP:
                report.add(f"可复合对 {g}∘{f} 缺少复合值")
            elif not 0 <= h < n_mor:
                report.add(f"复合值 {g}∘{f}={h} 越界")
            elif cat.src[h] != cat.src[f] or cat.tgt[h] != cat.tgt[g]:
                report.add(f"复合值 {g}∘{f}={h} 端点错误")
    if not report.ok:
        return report

    for f in range(n_mor):
        if cat.table[cat.identity[cat.tgt[f]]][f] != f:
            report.add(f"左单位律失败：id∘{f} ≠ {f}")
        if cat.table[f][cat.identity[cat.src[f]]] != f:
            report.add(f"右单位律失败：{f}∘id ≠ {f}")

    # 结合律：对每个中间态射 g 向量化比较 h∘(g∘f) 与 (h∘g)∘f
    grid = np.asarray(cat.table, dtype=np.int64).reshape(n_mor, n_mor)
    for g in range(n_mor):
        fs = np.asarray(cat.into[cat.src[g]], dtype=np.int64)
        hs = np.asarray(cat.out_of[cat.tgt[g]], dtype=np.int64)
        if fs.size == 0 or hs.size == 0:
            continue
        gf = grid[g, fs]
        hg = grid[hs, g]
        lhs = grid[hs[:, None], gf[None, :]]
        rhs = grid[hg[:, None], fs[None, :]]
        for i, j in np.argwhere(lhs != rhs):
            report.add(f"结合律失败：h={int(hs[i])} g={g} f={int(fs[j])}")
    return report


# ========== 构造器 ==========

def build_discrete_category(n: int, name: str = "") -> FiniteCategory:
    cat = make_category(
        n,
        [(x, x) for x in range(n)],
        list(range(n)),
        lambda g, f: f,
        name=name or f"discrete{n}",
    )
    return cat


def terminal_category() -> FiniteCategory:
    return build_discrete_category(1, name="1")


def build_poset_category(n: int, relation: Iterable[Tuple[int, int]], name: str = "") -> FiniteCategory:
    """偏序集 → 范畴：x→y 恰有一个态射当且仅当 x ≤ y。"""
    pairs = set()
    for x, y in relation:
        if not (0 <= x < n and 0 <= y < n):
            raise ObjectOutOfRange(f"关系 ({x},{y}) 越界，对象数 {n}")
        pairs.add((int(x), int(y)))
    missing = [x for x in range(n) if (x, x) not in pairs]
    if missing:
        raise RelationNotPartialOrder(f"关系不自反：缺少 {missing[:5]}")
    for x, y in pairs:
        if x != y and (y, x) in pairs:
            raise RelationNotPartialOrder(f"关系不反对称：({x},{y}) 与 ({y},{x})")
    for x, y in pairs:
        for z in range(n):
            if (y, z) in pairs and (x, z) not in pairs:
                raise RelationNotPartialOrder(f"关系不传递：({x},{y}),({y},{z}) 但缺 ({x},{z})")

    arrows = sorted(pairs)
    position = {pair: i for i, pair in enumerate(arrows)}
    identity = [position[(x, x)] for x in range(n)]
    cat = make_category(
        n,
        arrows,
        identity,
        lambda g, f: position[(arrows[f][0], arrows[g][1])],
        name=name or f"poset{n}",
        morphism_labels=arrows,
    )
    validate_category(cat).raise_if_invalid("build_poset_category")
    return cat


def transitive_closure(pairs: Iterable[Tuple[int, int]], n: int) -> set:
    """关系的自反传递闭包（Warshall）。"""
    closed = {(int(x), int(y)) for x, y in pairs}
    closed.update((x, x) for x in range(n))
    for k in range(n):
        for i in range(n):
            if (i, k) not in closed:
                continue
            for j in range(n):
                if (k, j) in closed:
                    closed.add((i, j))
    return closed


def build_monoid_category(table: Sequence[Sequence[int]], name: str = "") -> FiniteCategory:
    """单对象范畴：自同态即幺半群元素，g∘f = table[g][f]。"""
    size = len(table)
    if size == 0 or any(len(row) != size for row in table):
        raise NotAMonoid("乘法表必须是非空方阵")
    for row in table:
        for value in row:
            if not 0 <= value < size:
                raise NotAMonoid(f"乘法表取值 {value} 越界")
    units = [
        e for e in range(size)
        if all(table[e][a] == a and table[a][e] == a for a in range(size))
    ]
    if not units:
        raise NotAMonoid("乘法表没有单位元")
    for a in range(size):
        for b in range(size):
            ab = table[a][b]
            for c in range(size):
                if table[ab][c] != table[a][table[b][c]]:
                    raise NotAMonoid(f"乘法表不满足结合律：({a}{b}){c} ≠ {a}({b}{c})")
    cat = make_category(
        1,
        [(0, 0)] * size,
        [units[0]],
        lambda g, f: table[g][f],
        name=name or f"monoid{size}",
    )
    validate_category(cat).raise_if_invalid("build_monoid_category")
    return cat


def build_group_category(order: int, name: str = "") -> FiniteCategory:
    """循环群 ℤ/order 的单对象范畴 Σℤ/order，元素 i 对应态射 i。"""
    if order < 1:
        raise NotAMonoid(f"群阶必须为正：{order}")
    table = [[(i + j) % order for j in range(order)] for i in range(order)]
    return build_monoid_category(table, name=name or f"Σℤ/{order}")


def under_category(K: FiniteCategory, j0: int) -> FiniteCategory:
    """
    K↑j₀：对象是 σ: j₀→j，态射 σ→σ′ 是满足 τσ = σ′ 的 τ。

    态射标签为 (σ, τ)，对象标签为 σ；id_{j₀} 是始对象。
    """
    if not 0 <= j0 < K.n_objects:
        raise ObjectOutOfRange(f"对象 {j0} 不在 {K.name or 'K'} 中（共 {K.n_objects} 个）")
    objects = list(K.out_of[j0])
    obj_pos = {sigma: i for i, sigma in enumerate(objects)}
    labels = [(sigma, tau) for sigma in objects for tau in K.out_of[K.tgt[sigma]]]
    label_pos = {label: i for i, label in enumerate(labels)}
    arrows = [(obj_pos[sigma], obj_pos[K.table[tau][sigma]]) for sigma, tau in labels]
    identity = [label_pos[(sigma, K.identity[K.tgt[sigma]])] for sigma in objects]

    def compose_fn(g: int, f: int) -> int:
        sigma, tau = labels[f]
        _, tau2 = labels[g]
        return label_pos[(sigma, K.table[tau2][tau])]

    return make_category(
        len(objects),
        arrows,
        identity,
        compose_fn,
        name=f"{K.name or 'K'}↑{j0}",
        object_labels=objects,
        morphism_labels=labels,
    )


def initial_objects(cat: FiniteCategory) -> List[int]:
    """到每个对象恰有一个态射的对象。"""
    return [
        x for x in range(cat.n_objects)
        if all(len(cat.hom(x, y)) == 1 for y in range(cat.n_objects))
    ]


# ========== 函子 ==========

@dataclass(frozen=True, eq=False)
class CatFunctor:
    source: FiniteCategory
    target: FiniteCategory
    obj_map: Tuple[int, ...]
    mor_map: Tuple[int, ...]
    name: str = ""

    def same_maps(self, other: "CatFunctor") -> bool:
        return self.obj_map == other.obj_map and self.mor_map == other.mor_map

    def __repr__(self) -> str:
        return f"CatFunctor({self.name or '?'}: {self.source.name} → {self.target.name})"


def validate_functor(F: CatFunctor) -> ValidationReport:
    """穷举检查端点、恒等与全部复合是否被保持。"""
    report = ValidationReport(subject=f"函子 {F.name or '?'}")
    A, B = F.source, F.target
    if len(F.obj_map) != A.n_objects or len(F.mor_map) != A.n_morphisms:
        report.add("对象/态射映射长度与源范畴不符")
        return report
    for x, y in enumerate(F.obj_map):
        if not 0 <= y < B.n_objects:
            report.add(f"对象 {x} 映到越界对象 {y}")
    for f, g in enumerate(F.mor_map):
        if not 0 <= g < B.n_morphisms:
            report.add(f"态射 {f} 映到越界态射 {g}")
    if not report.ok:
        return report
    for f, g in enumerate(F.mor_map):
        if B.src[g] != F.obj_map[A.src[f]] or B.tgt[g] != F.obj_map[A.tgt[f]]:
            report.add(f"态射 {f} 的像 {g} 端点不匹配")
    for x in range(A.n_objects):
        if F.mor_map[A.identity[x]] != B.identity[F.obj_map[x]]:
            report.add(f"恒等态射 id_{x} 未映到恒等态射")
    if not report.ok:
        return report
    for g in range(A.n_morphisms):
        for f in A.into[A.src[g]]:
            if F.mor_map[A.table[g][f]] != B.table[F.mor_map[g]][F.mor_map[f]]:
                report.add(f"复合未被保持：F({g}∘{f}) ≠ F({g})∘F({f})")
    return report


def identity_functor(C: FiniteCategory) -> CatFunctor:
    return CatFunctor(C, C, tuple(range(C.n_objects)), tuple(range(C.n_morphisms)), name=f"id_{C.name}")


def compose_functors(G: CatFunctor, F: CatFunctor) -> CatFunctor:
    """G∘F（先 F 后 G）。"""
    if F.target is not G.source and F.target.structure() != G.source.structure():
        raise NotAFunctor(f"函子 {G.name}∘{F.name} 不可复合")
    return CatFunctor(
        F.source,
        G.target,
        tuple(G.obj_map[y] for y in F.obj_map),
        tuple(G.mor_map[g] for g in F.mor_map),
        name=f"{G.name}∘{F.name}",
    )


def constant_functor(C: FiniteCategory, D: FiniteCategory, x: int, name: str = "") -> CatFunctor:
    if not 0 <= x < D.n_objects:
        raise ObjectOutOfRange(f"常值函子的取值对象 {x} 越界")
    return CatFunctor(
        C, D, (x,) * C.n_objects, (D.identity[x],) * C.n_morphisms, name=name or f"const_{x}"
    )


def poset_functor(A: FiniteCategory, B: FiniteCategory, obj_map: Sequence[int], name: str = "") -> CatFunctor:
    """偏序范畴之间的单调映射；态射部分由 hom 集唯一确定。"""
    obj_map = tuple(int(v) for v in obj_map)
    mor_map = []
    for f in range(A.n_morphisms):
        candidates = B.hom(obj_map[A.src[f]], obj_map[A.tgt[f]])
        if len(candidates) != 1:
            raise NotAFunctor(
                f"映射在 {A.src[f]}→{A.tgt[f]} 处不单调或目标不是偏序（候选 {len(candidates)} 个）"
            )
        mor_map.append(candidates[0])
    F = CatFunctor(A, B, obj_map, tuple(mor_map), name=name)
    validate_functor(F).raise_if_invalid("poset_functor")
    return F


# ========== 伴随 ==========

@dataclass(frozen=True, eq=False)
class Adjunction:
    """l ⊣ r，l: C → C′，unit[c] 是 ε_c: c → r l c 在 C 中的索引。"""

    left: CatFunctor
    right: CatFunctor
    unit: Tuple[int, ...]
    name: str = ""

    @property
    def source(self) -> FiniteCategory:
        return self.left.source

    @property
    def target(self) -> FiniteCategory:
        return self.left.target

    def rl_morphism(self, f: int) -> int:
        return self.right.mor_map[self.left.mor_map[f]]


def counit(adj: Adjunction) -> Tuple[int, ...]:
    """由单位的泛性质求余单位 η_u: l r u → u（r(η_u)∘ε_{ru} = id_{ru}）。"""
    C, Cp = adj.source, adj.target
    r, l = adj.right, adj.left
    result = []
    for u in range(Cp.n_objects):
        ru = r.obj_map[u]
        eps = adj.unit[ru]
        matches = [
            nu_hat for nu_hat in Cp.hom(l.obj_map[ru], u)
            if C.table[r.mor_map[nu_hat]][eps] == C.identity[ru]
        ]
        result.append(matches[0] if len(matches) == 1 else NO_COMP)
    return tuple(result)


def validate_adjunction(adj: Adjunction) -> ValidationReport:
    """检查两个函子、单位的类型、自然性、泛性质与三角恒等式。"""
    report = ValidationReport(subject=f"伴随 {adj.name or '?'}")
    l, r = adj.left, adj.right
    C, Cp = l.source, l.target
    report.merge(validate_functor(l), prefix="l: ")
    report.merge(validate_functor(r), prefix="r: ")
    if r.source.structure() != Cp.structure() or r.target.structure() != C.structure():
        report.add("r 的源/靶与 l 不匹配")
    if len(adj.unit) != C.n_objects:
        report.add("单位分量个数与对象数不符")
    if not report.ok:
        return report

    for c, eps in enumerate(adj.unit):
        if not 0 <= eps < C.n_morphisms or C.src[eps] != c or C.tgt[eps] != r.obj_map[l.obj_map[c]]:
            report.add(f"单位分量 ε_{c}={eps} 不是 {c} → r l {c}")
    if not report.ok:
        return report

    for beta in range(C.n_morphisms):
        c, c2 = C.src[beta], C.tgt[beta]
        if C.table[adj.rl_morphism(beta)][adj.unit[c]] != C.table[adj.unit[c2]][beta]:
            report.add(f"单位不自然：态射 {beta}")

    for c in range(C.n_objects):
        lc = l.obj_map[c]
        eps = adj.unit[c]
        for u in range(Cp.n_objects):
            counts = Counter(C.table[r.mor_map[nu_hat]][eps] for nu_hat in Cp.hom(lc, u))
            for nu in C.hom(c, r.obj_map[u]):
                if counts.get(nu, 0) != 1:
                    report.add(f"泛性质失败：c={c} u={u} ν={nu} 的提升个数 {counts.get(nu, 0)}")

    if report.ok:
        eta = counit(adj)
        for c in range(C.n_objects):
            lc = l.obj_map[c]
            if Cp.table[eta[lc]][l.mor_map[adj.unit[c]]] != Cp.identity[lc]:
                report.add(f"三角恒等式失败：η_l{c}∘l(ε_{c}) ≠ id")
    return report


def identity_adjunction(C: FiniteCategory) -> Adjunction:
    ident = identity_functor(C)
    return Adjunction(ident, ident, tuple(C.identity), name=f"id_{C.name}")


def galois_adjunction(
    A: FiniteCategory,
    B: FiniteCategory,
    l_map: Sequence[int],
    r_map: Sequence[int],
    name: str = "",
) -> Adjunction:
    """偏序集之间的 Galois 连接 l ⊣ r（l: A → B），ε_a 为 a ≤ r l a。"""
    l = poset_functor(A, B, l_map, name="l")
    r = poset_functor(B, A, r_map, name="r")
    unit = []
    for a in range(A.n_objects):
        candidates = A.hom(a, r.obj_map[l.obj_map[a]])
        if not candidates:
            raise NotAFunctor(f"Galois 连接失败：{a} 不满足 a ≤ r l a")
        unit.append(candidates[0])
    adj = Adjunction(l, r, tuple(unit), name=name or "galois")
    validate_adjunction(adj).raise_if_invalid("galois_adjunction")
    return adj
