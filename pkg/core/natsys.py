"""
自然系统 (Natural Systems)

自然系统 D 是分解范畴 FC 上的协变函子，取值为 ℤ 或 𝔽_p 上的有限秩自由模。
这里只存生成元作用：
- post[(ψ, α)] ：ψ_*: D(α) → D(ψα)，形状 r(ψα) × r(α)
- pre[(ν, α)]  ：ν^*: D(α) → D(αν)，形状 r(αν) × r(α)
FC 上的作用由 (ν, ψ) ↦ ν^* ψ_* 派生。

构造器：常值、由函子诱导（协变 / 反变 / 双函子）、拉回、
由集值预层构造的 D_{a,T,m,A} 以及对应的范畴 C_{a,T,m}。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from utils import logger

from .errors import ElementNotInT, InputError, NotAFunctor, ObjectOutOfRange
from .fincat import (
    CatFunctor,
    FiniteCategory,
    ValidationReport,
    make_category,
)
from .homalg import (
    IntMatrix,
    Ring,
    identity_matrix,
    is_invertible,
    mat_mul,
    matrices_equal,
    matrix_from_dod,
)

COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"
BIFUNCTOR = "bifunctor"
VARIANCES = (COVARIANT, CONTRAVARIANT, BIFUNCTOR)


# ========== 分解范畴 ==========

@dataclass(frozen=True, eq=False)
class FactorizationCategory:
    """
    FC：对象是 base 的态射，(ν, ψ): α → ψαν。

    态射标签 (α, ν, ψ)，复合 (β, ν₂, ψ₂)∘(α, ν₁, ψ₁) = (α, ν₁ν₂, ψ₂ψ₁)。
    """

    base: FiniteCategory
    as_category: FiniteCategory

    def pair(self, morphism: int) -> Tuple[int, int]:
        _, nu, psi = self.as_category.morphism_labels[morphism]
        return nu, psi


def build_factorization_category(C: FiniteCategory) -> FactorizationCategory:
    labels = []
    arrows = []
    for alpha in range(C.n_morphisms):
        x, y = C.src[alpha], C.tgt[alpha]
        for nu in C.into[x]:
            a_nu = C.table[alpha][nu]
            for psi in C.out_of[y]:
                labels.append((alpha, nu, psi))
                arrows.append((alpha, C.table[psi][a_nu]))
    position = {label: i for i, label in enumerate(labels)}
    identity = [position[(alpha, C.identity[C.src[alpha]], C.identity[C.tgt[alpha]])]
                for alpha in range(C.n_morphisms)]

    def compose_fn(g: int, f: int) -> int:
        alpha, nu1, psi1 = labels[f]
        _, nu2, psi2 = labels[g]
        return position[(alpha, C.table[nu1][nu2], C.table[psi2][psi1])]

    fc = make_category(
        C.n_morphisms,
        arrows,
        identity,
        compose_fn,
        name=f"F{C.name or 'C'}",
        object_labels=tuple(range(C.n_morphisms)),
        morphism_labels=labels,
    )
    return FactorizationCategory(base=C, as_category=fc)


# ========== 自然系统 ==========

@dataclass(frozen=True, eq=False)
class NaturalSystem:
    base: FiniteCategory
    ring: Ring
    rank: Tuple[int, ...]
    post: Mapping[Tuple[int, int], IntMatrix]
    pre: Mapping[Tuple[int, int], IntMatrix]
    name: str = ""

    def post_of(self, psi: int, alpha: int) -> IntMatrix:
        return self.post[(psi, alpha)]

    def pre_of(self, nu: int, alpha: int) -> IntMatrix:
        return self.pre[(nu, alpha)]

    def action(self, nu: int, psi: int, alpha: int) -> IntMatrix:
        """(ν, ψ): α → ψαν 的作用 ν^*ψ_*。"""
        C = self.base
        return mat_mul(self.pre[(nu, C.table[psi][alpha])], self.post[(psi, alpha)])

    @cached_property
    def total_rank(self) -> int:
        return sum(self.rank)

    def __repr__(self) -> str:
        return f"NaturalSystem(name={self.name!r}, base={self.base.name!r}, ring={self.ring})"


def _assemble(C: FiniteCategory, ring: Ring, rank, post_fn, pre_fn, name: str) -> NaturalSystem:
    post = {}
    pre = {}
    for alpha in range(C.n_morphisms):
        for psi in C.out_of[C.tgt[alpha]]:
            post[(psi, alpha)] = post_fn(psi, alpha)
        for nu in C.into[C.src[alpha]]:
            pre[(nu, alpha)] = pre_fn(nu, alpha)
    return NaturalSystem(C, ring, tuple(rank), post, pre, name=name)


def natsys_constant(C: FiniteCategory, ring: Ring, rank: int, name: str = "") -> NaturalSystem:
    if rank < 0:
        raise InputError(f"秩不能为负：{rank}")
    ident = identity_matrix(rank, ring)
    return _assemble(
        C, ring, [rank] * C.n_morphisms,
        lambda psi, alpha: ident,
        lambda nu, alpha: ident,
        name or f"const{rank}",
    )


# ========== 由函子诱导 ==========

@dataclass(frozen=True)
class ModuleFunctor:
    """
    取值为自由模的函子数据

    - covariant：ranks[x]，actions[f] 形状 (r(tgt f), r(src f))
    - contravariant：ranks[x]，actions[f] 形状 (r(src f), r(tgt f))
    - bifunctor：ranks[(x, y)]；left[(ν, y)] 为 M(ν, y): M(x, y) → M(x′, y)（ν: x′→x），
      right[(x, ψ)] 为 M(x, ψ): M(x, y) → M(x, y′)（ψ: y→y′）
    """

    variance: str
    ranks: Mapping
    actions: Mapping = field(default_factory=dict)
    left: Mapping = field(default_factory=dict)
    right: Mapping = field(default_factory=dict)


def _check_one_variable(C: FiniteCategory, data: ModuleFunctor, ring: Ring) -> ValidationReport:
    report = ValidationReport(subject=f"{data.variance} 函子")
    covariant = data.variance == COVARIANT
    for x in range(C.n_objects):
        if x not in data.ranks:
            report.add(f"缺少对象 {x} 的秩")
    if not report.ok:
        return report
    for f in range(C.n_morphisms):
        M = data.actions.get(f)
        s, t = data.ranks[C.src[f]], data.ranks[C.tgt[f]]
        expected = (t, s) if covariant else (s, t)
        if M is None:
            if C.is_identity_morphism[f]:
                continue
            report.add(f"缺少态射 {f} 的作用矩阵")
        elif M.shape != expected:
            report.add(f"态射 {f} 的作用矩阵形状 {M.shape} ≠ {expected}")
    if not report.ok:
        return report

    def act(f: int) -> IntMatrix:
        M = data.actions.get(f)
        return M if M is not None else identity_matrix(data.ranks[C.src[f]], ring)

    for x in range(C.n_objects):
        if not matrices_equal(act(C.identity[x]), identity_matrix(data.ranks[x], ring)):
            report.add(f"恒等态射 id_{x} 的作用不是单位阵")
    for g in range(C.n_morphisms):
        for f in C.into[C.src[g]]:
            gf = C.table[g][f]
            composed = mat_mul(act(g), act(f)) if covariant else mat_mul(act(f), act(g))
            if not matrices_equal(act(gf), composed):
                report.add(f"函子性失败：M({g}∘{f})")
    return report


def _check_bifunctor(C: FiniteCategory, data: ModuleFunctor, ring: Ring) -> ValidationReport:
    report = ValidationReport(subject="双函子")
    pairs = [(x, y) for x in range(C.n_objects) for y in range(C.n_objects)]
    for pair in pairs:
        if pair not in data.ranks:
            report.add(f"缺少 {pair} 的秩")
    if not report.ok:
        return report

    def left(nu: int, y: int) -> IntMatrix:
        M = data.left.get((nu, y))
        return M if M is not None else identity_matrix(data.ranks[(C.tgt[nu], y)], ring)

    def right(x: int, psi: int) -> IntMatrix:
        M = data.right.get((x, psi))
        return M if M is not None else identity_matrix(data.ranks[(x, C.src[psi])], ring)

    for nu in range(C.n_morphisms):
        for y in range(C.n_objects):
            expected = (data.ranks[(C.src[nu], y)], data.ranks[(C.tgt[nu], y)])
            if (nu, y) not in data.left and not C.is_identity_morphism[nu]:
                report.add(f"缺少左作用 M({nu}, {y})")
            elif left(nu, y).shape != expected:
                report.add(f"左作用 M({nu}, {y}) 形状错误")
    for psi in range(C.n_morphisms):
        for x in range(C.n_objects):
            expected = (data.ranks[(x, C.tgt[psi])], data.ranks[(x, C.src[psi])])
            if (x, psi) not in data.right and not C.is_identity_morphism[psi]:
                report.add(f"缺少右作用 M({x}, {psi})")
            elif right(x, psi).shape != expected:
                report.add(f"右作用 M({x}, {psi}) 形状错误")
    if not report.ok:
        return report

    for x, y in pairs:
        ident = identity_matrix(data.ranks[(x, y)], ring)
        if not matrices_equal(left(C.identity[x], y), ident) or not matrices_equal(right(x, C.identity[y]), ident):
            report.add(f"M({x}, {y}) 上恒等态射的作用不是单位阵")
    for g in range(C.n_morphisms):
        for f in C.into[C.src[g]]:
            gf = C.table[g][f]
            for z in range(C.n_objects):
                # 左变量反变：M(gf, z) = M(f, z)·M(g, z)
                if not matrices_equal(left(gf, z), mat_mul(left(f, z), left(g, z))):
                    report.add(f"左函子性失败：M({g}∘{f}, {z})")
                if not matrices_equal(right(z, gf), mat_mul(right(z, g), right(z, f))):
                    report.add(f"右函子性失败：M({z}, {g}∘{f})")
    for nu in range(C.n_morphisms):
        for psi in range(C.n_morphisms):
            x = C.tgt[nu]
            lhs = mat_mul(right(C.src[nu], psi), left(nu, C.src[psi]))
            rhs = mat_mul(left(nu, C.tgt[psi]), right(x, psi))
            if not matrices_equal(lhs, rhs):
                report.add(f"左右作用不交换：ν={nu} ψ={psi}")
    return report


def natsys_from_functor(C: FiniteCategory, variance: str, data: ModuleFunctor, ring: Ring, name: str = "") -> NaturalSystem:
    """
    由函子 M 诱导自然系统

    - covariant：D(α: x→y) = M(y)，ψ_* = M(ψ)，ν^* = id
    - contravariant：D(α: x→y) = M(x)，ψ_* = id，ν^* = M(ν)
    - bifunctor：D(α: x→y) = M(x, y)，ψ_* = M(x, ψ)，ν^* = M(ν, y)
    """
    if variance not in VARIANCES:
        raise NotAFunctor(f"未知的变性 {variance!r}")
    if variance == BIFUNCTOR:
        report = _check_bifunctor(C, data, ring)
    else:
        report = _check_one_variable(C, data, ring)
    if not report.ok:
        for message in report.violations:
            logger.error("Catcoh：函子数据无效 variance=%s：%s", variance, message)
        raise NotAFunctor(f"{variance} 函子数据无效：{report.violations[0]}")

    src, tgt = C.src, C.tgt
    if variance == COVARIANT:
        rank = [data.ranks[tgt[a]] for a in range(C.n_morphisms)]

        def act(f):
            M = data.actions.get(f)
            return M if M is not None else identity_matrix(data.ranks[src[f]], ring)

        system = _assemble(
            C, ring, rank,
            lambda psi, alpha: act(psi),
            lambda nu, alpha: identity_matrix(rank[alpha], ring),
            name or "covariant",
        )
    elif variance == CONTRAVARIANT:
        rank = [data.ranks[src[a]] for a in range(C.n_morphisms)]

        def act(f):
            M = data.actions.get(f)
            return M if M is not None else identity_matrix(data.ranks[tgt[f]], ring)

        system = _assemble(
            C, ring, rank,
            lambda psi, alpha: identity_matrix(rank[alpha], ring),
            lambda nu, alpha: act(nu),
            name or "contravariant",
        )
    else:
        rank = [data.ranks[(src[a], tgt[a])] for a in range(C.n_morphisms)]

        def post_fn(psi, alpha):
            M = data.right.get((src[alpha], psi))
            return M if M is not None else identity_matrix(rank[alpha], ring)

        def pre_fn(nu, alpha):
            M = data.left.get((nu, tgt[alpha]))
            return M if M is not None else identity_matrix(rank[alpha], ring)

        system = _assemble(C, ring, rank, post_fn, pre_fn, name or "bifunctor")
    validate_natural_system(system).raise_if_invalid("natsys_from_functor")
    return system


def natsys_pullback(F: CatFunctor, D: NaturalSystem, check: bool = True, name: str = "") -> NaturalSystem:
    """F^*D：r(α) = r(Fα)，作用经 F 拉回。"""
    if F.target is not D.base and F.target.structure() != D.base.structure():
        raise NotAFunctor(f"函子 {F.name} 的靶与自然系统 {D.name} 的底范畴不一致")
    A = F.source
    m = F.mor_map
    system = _assemble(
        A, D.ring, [D.rank[m[a]] for a in range(A.n_morphisms)],
        lambda psi, alpha: D.post[(m[psi], m[alpha])],
        lambda nu, alpha: D.pre[(m[nu], m[alpha])],
        name or f"{F.name or 'F'}^*{D.name}",
    )
    if check:
        validate_natural_system(system).raise_if_invalid("natsys_pullback")
    return system


def natsys_change_ring(D: NaturalSystem, ring: Ring) -> NaturalSystem:
    """只允许 ℤ → 𝔽_p 的约化（或不变）。"""
    if ring == D.ring:
        return D
    if D.ring.is_field:
        raise InputError(f"无法把 {D.ring} 上的自然系统换到 {ring}")
    domain = ring.domain
    post = {key: M.convert_to(domain) for key, M in D.post.items()}
    pre = {key: M.convert_to(domain) for key, M in D.pre.items()}
    return NaturalSystem(D.base, ring, D.rank, post, pre, name=D.name)


# ========== 集值预层与 D_{a,T,m,A} ==========

@dataclass(frozen=True, eq=False)
class PresheafData:
    """
    反变集值函子 T: C^op → FinSet

    sizes[x] = |T(x)|；maps[f] 是 T(f): T(tgt f) → T(src f)，长度 sizes[tgt f]。
    """

    base: FiniteCategory
    sizes: Tuple[int, ...]
    maps: Tuple[Tuple[int, ...], ...]
    name: str = ""

    def pull(self, f: int, element: int) -> int:
        return self.maps[f][element]


def validate_presheaf(T: PresheafData) -> ValidationReport:
    C = T.base
    report = ValidationReport(subject=f"预层 {T.name or '?'}")
    if len(T.sizes) != C.n_objects or len(T.maps) != C.n_morphisms:
        report.add("sizes / maps 长度与范畴不符")
        return report
    for f, mapping in enumerate(T.maps):
        if len(mapping) != T.sizes[C.tgt[f]]:
            report.add(f"T({f}) 的定义域大小错误")
        elif any(not 0 <= v < T.sizes[C.src[f]] for v in mapping):
            report.add(f"T({f}) 取值越界")
    if not report.ok:
        return report
    for x in range(C.n_objects):
        if T.maps[C.identity[x]] != tuple(range(T.sizes[x])):
            report.add(f"T(id_{x}) 不是恒等映射")
    for g in range(C.n_morphisms):
        for f in C.into[C.src[g]]:
            gf = C.table[g][f]
            expected = tuple(T.maps[f][T.maps[g][r]] for r in range(T.sizes[C.tgt[g]]))
            if T.maps[gf] != expected:
                report.add(f"T({g}∘{f}) ≠ T({f})∘T({g})")
    return report


def representable_presheaf(C: FiniteCategory, b: int) -> PresheafData:
    """T = Hom(−, b)：T(x) 按 hom(x, b) 的升序编号，T(f)(h) = h∘f。"""
    if not 0 <= b < C.n_objects:
        raise ObjectOutOfRange(f"对象 {b} 越界")
    homs = [C.hom(x, b) for x in range(C.n_objects)]
    position = [{h: i for i, h in enumerate(hs)} for hs in homs]
    maps = []
    for f in range(C.n_morphisms):
        x, y = C.src[f], C.tgt[f]
        maps.append(tuple(position[x][C.table[h][f]] for h in homs[y]))
    return PresheafData(C, tuple(len(hs) for hs in homs), tuple(maps), name=f"Hom(-,{b})")


def coproduct_presheaf(parts: Sequence[PresheafData]) -> PresheafData:
    """逐对象不交并。"""
    if not parts:
        raise InputError("余积至少需要一个预层")
    C = parts[0].base
    sizes = [sum(T.sizes[x] for T in parts) for x in range(C.n_objects)]
    maps = []
    for f in range(C.n_morphisms):
        x = C.src[f]
        mapping: List[int] = []
        src_offset = 0
        for T in parts:
            mapping.extend(src_offset + v for v in T.maps[f])
            src_offset += T.sizes[x]
        maps.append(tuple(mapping))
    return PresheafData(C, tuple(sizes), tuple(maps), name="+".join(T.name for T in parts))


def _check_element(T: PresheafData, a: int, m: int) -> None:
    if not 0 <= a < T.base.n_objects:
        raise ObjectOutOfRange(f"对象 {a} 越界")
    if not 0 <= m < T.sizes[a]:
        raise ElementNotInT(f"元素 {m} 不在 T({a}) 中（|T({a})| = {T.sizes[a]}）")


def s_set(T: PresheafData, a: int, m: int, alpha: int) -> List[Tuple[int, int]]:
    """S_{a,T,m}(α: c→d) = {(η: a→c, r ∈ T(d)) : η^*α^*r = m}，字典序。"""
    C = T.base
    c, d = C.src[alpha], C.tgt[alpha]
    return [
        (eta, r)
        for eta in C.hom(a, c)
        for r in range(T.sizes[d])
        if T.maps[eta][T.maps[alpha][r]] == m
    ]


def natsys_lemma44(T: PresheafData, a: int, m: int, coeff_rank: int, ring: Ring) -> NaturalSystem:
    """
    D_{a,T,m,A}(α) = Maps(S(α), A)，A 为秩 coeff_rank 的自由模

    ψ_* 沿 S(ψα) → S(α), (η′, r′) ↦ (η′, ψ^*r′) 预复合；
    ν^* 沿 S(αν) → S(α), (η′, r′) ↦ (νη′, r′) 预复合。
    """
    validate_presheaf(T).raise_if_invalid("natsys_lemma44")
    _check_element(T, a, m)
    C = T.base
    A = coeff_rank
    sets = [s_set(T, a, m, alpha) for alpha in range(C.n_morphisms)]
    index = [{s: i for i, s in enumerate(S)} for S in sets]

    def selection(rows: List[Tuple[int, int]], cols: Dict[Tuple[int, int], int], send) -> IntMatrix:
        dod: Dict[int, Dict[int, int]] = {}
        for i, s in enumerate(rows):
            j = cols[send(s)]
            for k in range(A):
                dod[i * A + k] = {j * A + k: 1}
        return matrix_from_dod(dod, len(rows) * A, len(cols) * A, ring)

    def post_fn(psi: int, alpha: int) -> IntMatrix:
        return selection(sets[C.table[psi][alpha]], index[alpha], lambda s: (s[0], T.maps[psi][s[1]]))

    def pre_fn(nu: int, alpha: int) -> IntMatrix:
        return selection(sets[C.table[alpha][nu]], index[alpha], lambda s: (C.table[nu][s[0]], s[1]))

    return _assemble(
        C, ring, [len(S) * A for S in sets], post_fn, pre_fn,
        f"D_{{{a},{T.name or 'T'},{m}}}",
    )


def build_category_aTm(T: PresheafData, a: int, m: int) -> FiniteCategory:
    """
    C_{a,T,m}：对象 (η: a→d, r ∈ T(d))，η^*r = m；
    态射 (η, r) → (η′, r′) 是满足 βη = η′ 且 β^*r′ = r 的 β: d→d′。

    对象标签 (η, r)，态射标签 (源对象, β, 靶对象)；(id_a, m) 是始对象。
    """
    validate_presheaf(T).raise_if_invalid("build_category_aTm")
    _check_element(T, a, m)
    C = T.base
    objects = [
        (eta, r)
        for eta in C.out_of[a]
        for r in range(T.sizes[C.tgt[eta]])
        if T.maps[eta][r] == m
    ]
    obj_pos = {o: i for i, o in enumerate(objects)}
    labels = []
    for i, (eta, r) in enumerate(objects):
        for beta in C.out_of[C.tgt[eta]]:
            eta2 = C.table[beta][eta]
            for r2 in range(T.sizes[C.tgt[beta]]):
                if T.maps[beta][r2] == r and (eta2, r2) in obj_pos:
                    labels.append((i, beta, obj_pos[(eta2, r2)]))
    label_pos = {label: k for k, label in enumerate(labels)}
    arrows = [(s, t) for s, _, t in labels]
    identity = [label_pos[(i, C.identity[C.tgt[eta]], i)] for i, (eta, _) in enumerate(objects)]

    def compose_fn(g: int, f: int) -> int:
        s, beta1, _ = labels[f]
        _, beta2, t = labels[g]
        return label_pos[(s, C.table[beta2][beta1], t)]

    return make_category(
        len(objects),
        arrows,
        identity,
        compose_fn,
        name=f"{C.name or 'C'}_{{{a},{T.name or 'T'},{m}}}",
        object_labels=objects,
        morphism_labels=labels,
    )


# ========== 自然系统之间的映射 ==========

@dataclass(frozen=True, eq=False)
class SystemMap:
    """φ: S → T，components[α] 形状 r_T(α) × r_S(α)。"""

    source: NaturalSystem
    target: NaturalSystem
    components: Tuple[IntMatrix, ...]
    name: str = ""

    def is_isomorphism(self) -> bool:
        return all(is_invertible(M, self.source.ring) for M in self.components)


def validate_system_map(phi: SystemMap) -> ValidationReport:
    report = ValidationReport(subject=f"自然系统映射 {phi.name or '?'}")
    S, T = phi.source, phi.target
    C = S.base
    if T.base.structure() != C.structure():
        report.add("源与靶的底范畴不同")
        return report
    for alpha, M in enumerate(phi.components):
        if M.shape != (T.rank[alpha], S.rank[alpha]):
            report.add(f"分量 φ_{alpha} 形状 {M.shape} 错误")
    if not report.ok:
        return report
    for (psi, alpha), M in S.post.items():
        lhs = mat_mul(T.post[(psi, alpha)], phi.components[alpha])
        rhs = mat_mul(phi.components[C.table[psi][alpha]], M)
        if not matrices_equal(lhs, rhs):
            report.add(f"与 ψ_* 不交换：ψ={psi} α={alpha}")
    for (nu, alpha), M in S.pre.items():
        lhs = mat_mul(T.pre[(nu, alpha)], phi.components[alpha])
        rhs = mat_mul(phi.components[C.table[alpha][nu]], M)
        if not matrices_equal(lhs, rhs):
            report.add(f"与 ν^* 不交换：ν={nu} α={alpha}")
    return report


# ========== 校验 ==========

def validate_natural_system(D: NaturalSystem, fc: Optional[FactorizationCategory] = None) -> ValidationReport:
    """
    穷举检查形状、恒等、ψ_* 与 ν^* 各自的函子性以及二者交换。

    传入 fc 时额外逐对检查 FC 上的复合 (ν,ψ)(ν′,ψ′) 是否被保持。
    """
    C = D.base
    report = ValidationReport(subject=f"自然系统 {D.name or '?'}")
    if len(D.rank) != C.n_morphisms:
        report.add(f"秩的个数 {len(D.rank)} ≠ 态射数 {C.n_morphisms}")
        return report
    if any(r < 0 for r in D.rank):
        report.add("存在负秩")
    for alpha in range(C.n_morphisms):
        for psi in C.out_of[C.tgt[alpha]]:
            M = D.post.get((psi, alpha))
            expected = (D.rank[C.table[psi][alpha]], D.rank[alpha])
            if M is None:
                report.add(f"缺少 post({psi}, {alpha})")
            elif M.shape != expected:
                report.add(f"post({psi}, {alpha}) 形状 {M.shape} ≠ {expected}")
        for nu in C.into[C.src[alpha]]:
            M = D.pre.get((nu, alpha))
            expected = (D.rank[C.table[alpha][nu]], D.rank[alpha])
            if M is None:
                report.add(f"缺少 pre({nu}, {alpha})")
            elif M.shape != expected:
                report.add(f"pre({nu}, {alpha}) 形状 {M.shape} ≠ {expected}")
    if not report.ok:
        return report

    for alpha in range(C.n_morphisms):
        ident = identity_matrix(D.rank[alpha], D.ring)
        if not matrices_equal(D.post[(C.identity[C.tgt[alpha]], alpha)], ident):
            report.add(f"id_* 在 α={alpha} 上不是单位阵")
        if not matrices_equal(D.pre[(C.identity[C.src[alpha]], alpha)], ident):
            report.add(f"id^* 在 α={alpha} 上不是单位阵")

    table = C.table
    for alpha in range(C.n_morphisms):
        for psi in C.out_of[C.tgt[alpha]]:
            psi_alpha = table[psi][alpha]
            first = D.post[(psi, alpha)]
            for psi2 in C.out_of[C.tgt[psi]]:
                lhs = D.post[(table[psi2][psi], alpha)]
                if not matrices_equal(lhs, mat_mul(D.post[(psi2, psi_alpha)], first)):
                    report.add(f"(ψ′ψ)_* ≠ ψ′_*ψ_*：ψ′={psi2} ψ={psi} α={alpha}")
        for nu in C.into[C.src[alpha]]:
            alpha_nu = table[alpha][nu]
            first = D.pre[(nu, alpha)]
            for nu2 in C.into[C.src[nu]]:
                lhs = D.pre[(table[nu][nu2], alpha)]
                if not matrices_equal(lhs, mat_mul(D.pre[(nu2, alpha_nu)], first)):
                    report.add(f"(νν′)^* ≠ ν′^*ν^*：ν={nu} ν′={nu2} α={alpha}")
        for nu in C.into[C.src[alpha]]:
            alpha_nu = table[alpha][nu]
            for psi in C.out_of[C.tgt[alpha]]:
                lhs = mat_mul(D.post[(psi, alpha_nu)], D.pre[(nu, alpha)])
                rhs = mat_mul(D.pre[(nu, table[psi][alpha])], D.post[(psi, alpha)])
                if not matrices_equal(lhs, rhs):
                    report.add(f"ψ_*ν^* ≠ ν^*ψ_*：ν={nu} ψ={psi} α={alpha}")

    if fc is not None and report.ok:
        FC = fc.as_category
        for g in range(FC.n_morphisms):
            _, nu2, psi2 = FC.morphism_labels[g]
            beta = FC.src[g]
            act_g = D.action(nu2, psi2, beta)
            for f in FC.into[beta]:
                alpha, nu1, psi1 = FC.morphism_labels[f]
                gf_alpha, gf_nu, gf_psi = FC.morphism_labels[FC.table[g][f]]
                composed = mat_mul(act_g, D.action(nu1, psi1, alpha))
                if not matrices_equal(D.action(gf_nu, gf_psi, gf_alpha), composed):
                    report.add(f"FC 复合未被保持：{g}∘{f}")
    if not report.ok:
        logger.debug("Catcoh：自然系统校验未通过 name=%s count=%s", D.name, len(report.violations))
    return report
