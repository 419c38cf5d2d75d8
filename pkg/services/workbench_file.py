"""
工作台文件服务 (WorkbenchFile)

JSON 文档的读取、名称解析、逐块校验与回写。

- categories：group / poset / discrete / monoid / 显式（objects, morphisms, identities, composition）
- functors、diagrams、presheaves、adjunctions 按名称互相引用
- natural_systems：constant / explicit / covariant / contravariant / lemma44，
  base 可写 "grothendieck:<diagram>"
- 自然系统按需构造并缓存；回写一律使用显式形式，重新读入得到相同结构
"""

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from core.errors import InputError, ParseError
from core.fincat import (
    NO_COMP,
    Adjunction,
    CatFunctor,
    FiniteCategory,
    build_discrete_category,
    build_group_category,
    build_monoid_category,
    build_poset_category,
    galois_adjunction,
    transitive_closure,
    validate_adjunction,
    validate_category,
    validate_functor,
)
from core.grothendieck import Diagram, GrothendieckCategory, grothendieck_construction, validate_diagram
from core.homalg import Ring, identity_matrix, matrix_from_rows, matrix_to_rows, zero_matrix
from core.natsys import (
    CONTRAVARIANT,
    COVARIANT,
    ModuleFunctor,
    NaturalSystem,
    PresheafData,
    natsys_constant,
    natsys_from_functor,
    natsys_lemma44,
    representable_presheaf,
    validate_natural_system,
    validate_presheaf,
)
from core.reports import CheckReport
from utils import logger

GROTHENDIECK_PREFIX = "grothendieck:"
SECTIONS = (
    "settings", "categories", "functors", "diagrams", "presheaves",
    "adjunctions", "natural_systems", "tasks",
)


def _require(mapping: Dict[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise ParseError(f"{where} 缺少字段 {key!r}")
    return mapping[key]


def _int_list(value: Any, where: str) -> List[int]:
    if not isinstance(value, list):
        raise ParseError(f"{where} 应为整数数组")
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where} 含非整数项") from exc


def _resolve(table: Dict[str, Any], name: Any, kind: str, where: str) -> Any:
    if not isinstance(name, str) or name not in table:
        raise ParseError(f"{where} 引用了不存在的{kind} {name!r}")
    return table[name]


# ========== 范畴 ==========

def parse_category(name: str, spec: Dict[str, Any]) -> FiniteCategory:
    where = f"categories.{name}"
    if not isinstance(spec, dict):
        raise ParseError(f"{where} 应为对象")
    kind = spec.get("kind", "explicit")
    if kind == "group":
        return build_group_category(int(_require(spec, "order", where)), name=name)
    if kind == "discrete":
        return build_discrete_category(int(_require(spec, "objects", where)), name=name)
    if kind == "monoid":
        table = [_int_list(row, f"{where}.table") for row in _require(spec, "table", where)]
        return build_monoid_category(table, name=name)
    if kind == "poset":
        n = int(_require(spec, "objects", where))
        pairs = {tuple(_int_list(pair, f"{where}.relation")) for pair in spec.get("relation", [])}
        if any(len(pair) != 2 for pair in pairs):
            raise ParseError(f"{where}.relation 的每项必须是 [x, y]")
        pairs.update((x, x) for x in range(n))
        if spec.get("close"):
            pairs = transitive_closure(pairs, n)
        return build_poset_category(n, sorted(pairs), name=name)
    if kind != "explicit":
        raise ParseError(f"{where} 的 kind {kind!r} 未知")

    n = int(_require(spec, "objects", where))
    arrows = [tuple(_int_list(arrow, f"{where}.morphisms")) for arrow in _require(spec, "morphisms", where)]
    if any(len(arrow) != 2 for arrow in arrows):
        raise ParseError(f"{where}.morphisms 的每项必须是 [src, tgt]")
    identity = _int_list(_require(spec, "identities", where), f"{where}.identities")
    n_mor = len(arrows)
    table = [[NO_COMP] * n_mor for _ in range(n_mor)]
    for triple in _require(spec, "composition", where):
        values = _int_list(triple, f"{where}.composition")
        if len(values) != 3:
            raise ParseError(f"{where}.composition 的每项必须是 [g, f, g∘f]")
        g, f, h = values
        if not (0 <= g < n_mor and 0 <= f < n_mor):
            raise ParseError(f"{where}.composition 引用越界态射 ({g}, {f})")
        table[g][f] = h
    return FiniteCategory(
        n_objects=n,
        src=tuple(a for a, _ in arrows),
        tgt=tuple(b for _, b in arrows),
        identity=tuple(identity),
        table=tuple(tuple(row) for row in table),
        name=name,
    )


def emit_category(cat: FiniteCategory) -> Dict[str, Any]:
    composition = [
        [g, f, cat.table[g][f]]
        for g in range(cat.n_morphisms)
        for f in range(cat.n_morphisms)
        if cat.table[g][f] != NO_COMP
    ]
    return {
        "objects": cat.n_objects,
        "morphisms": [[s, t] for s, t in zip(cat.src, cat.tgt)],
        "identities": list(cat.identity),
        "composition": composition,
    }


# ========== 文件对象 ==========

@dataclass
class WorkbenchFile:
    source: str = ""
    settings: Dict[str, Any] = field(default_factory=dict)
    categories: Dict[str, FiniteCategory] = field(default_factory=dict)
    functors: Dict[str, CatFunctor] = field(default_factory=dict)
    diagrams: Dict[str, Diagram] = field(default_factory=dict)
    diagram_refs: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    presheaves: Dict[str, PresheafData] = field(default_factory=dict)
    adjunctions: Dict[str, Adjunction] = field(default_factory=dict)
    system_specs: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    tasks: List[Dict[str, Any]] = field(default_factory=list)
    _systems: Dict[Tuple[str, str], NaturalSystem] = field(default_factory=dict, repr=False)
    _grothendieck: Dict[str, GrothendieckCategory] = field(default_factory=dict, repr=False)

    # ---------- 查找 ----------

    def category(self, name: str) -> FiniteCategory:
        if isinstance(name, str) and name.startswith(GROTHENDIECK_PREFIX):
            return self.grothendieck(name[len(GROTHENDIECK_PREFIX):]).category
        return _resolve(self.categories, name, "范畴", "查询")

    def diagram(self, name: str) -> Diagram:
        return _resolve(self.diagrams, name, "图表", "查询")

    def grothendieck(self, name: str) -> GrothendieckCategory:
        if name not in self._grothendieck:
            self._grothendieck[name] = grothendieck_construction(self.diagram(name))
        return self._grothendieck[name]

    def adjunction(self, name: str) -> Adjunction:
        return _resolve(self.adjunctions, name, "伴随", "查询")

    def presheaf(self, name: str) -> PresheafData:
        return _resolve(self.presheaves, name, "预层", "查询")

    def system_ring(self, name: str) -> Ring:
        spec = _resolve(self.system_specs, name, "自然系统", "查询")
        return Ring.parse(spec.get("ring", "zz"))

    def system(self, name: str, ring: Optional[Ring] = None) -> NaturalSystem:
        """构造（并缓存）自然系统；ring 给出时覆盖文件中的环。"""
        spec = _resolve(self.system_specs, name, "自然系统", "查询")
        declared = Ring.parse(spec.get("ring", "zz"))
        if ring is not None and ring != declared:
            logger.warning("Catcoh：系数环被命令行覆盖 system=%s file=%s override=%s", name, declared.tag, ring.tag)
        ring = ring or declared
        key = (name, ring.tag)
        if key not in self._systems:
            self._systems[key] = self._build_system(name, spec, ring)
        return self._systems[key]

    def _build_system(self, name: str, spec: Dict[str, Any], ring: Ring) -> NaturalSystem:
        where = f"natural_systems.{name}"
        base = self.category(spec["base"])
        kind = spec.get("kind", "explicit")
        if kind == "constant":
            return natsys_constant(base, ring, int(spec.get("rank", 1)), name=name)
        if kind in (COVARIANT, CONTRAVARIANT):
            ranks = _int_list(_require(spec, "object_ranks", where), f"{where}.object_ranks")
            if len(ranks) != base.n_objects:
                raise ParseError(f"{where}.object_ranks 长度应为 {base.n_objects}")
            actions = {}
            for entry in spec.get("actions", []):
                f = int(_require(entry, "morphism", f"{where}.actions"))
                if not 0 <= f < base.n_morphisms:
                    raise ParseError(f"{where}.actions 引用越界态射 {f}")
                s, t = ranks[base.src[f]], ranks[base.tgt[f]]
                shape = (t, s) if kind == COVARIANT else (s, t)
                actions[f] = matrix_from_rows(entry.get("matrix", []), ring, shape=shape)
            data = ModuleFunctor(kind, dict(enumerate(ranks)), actions)
            return natsys_from_functor(base, kind, data, ring, name=name)
        if kind == "lemma44":
            T = self.presheaf(spec["presheaf"])
            return natsys_lemma44(T, int(spec.get("object", 0)), int(spec.get("element", 0)),
                                  int(spec.get("coeff_rank", 1)), ring)
        if kind != "explicit":
            raise ParseError(f"{where} 的 kind {kind!r} 未知")
        return _explicit_system(name, spec, base, ring)

    # ---------- 校验 ----------

    def validate(self) -> CheckReport:
        """逐块校验；结构错误记为 fail 而不抛出。"""
        report = CheckReport(name=f"validate[{os.path.basename(self.source) or '-'}]")
        for name, cat in self.categories.items():
            _record(report, f"categories.{name}", validate_category(cat))
        if not report.ok:
            return report
        for name, F in self.functors.items():
            _record(report, f"functors.{name}", validate_functor(F))
        for name, Dg in self.diagrams.items():
            _record(report, f"diagrams.{name}", validate_diagram(Dg))
        for name, T in self.presheaves.items():
            _record(report, f"presheaves.{name}", validate_presheaf(T))
        for name, adj in self.adjunctions.items():
            _record(report, f"adjunctions.{name}", validate_adjunction(adj))
        if report.ok:
            for name in self.system_specs:
                try:
                    system = self.system(name)
                except InputError as exc:
                    report.record(f"natural_systems.{name}", False, violations=[str(exc)])
                    continue
                _record(report, f"natural_systems.{name}", validate_natural_system(system))
        for position, task in enumerate(self.tasks):
            report.record(f"tasks[{position}]", "op" in task, name=task.get("name", ""))
        return report

    # ---------- 回写 ----------

    def emit(self) -> Dict[str, Any]:
        functors = {name: _emit_functor(self, F) for name, F in self.functors.items()}
        adjunctions = {}
        for name, adj in self.adjunctions.items():
            left = self._functor_name(adj.left) or f"{name}.l"
            right = self._functor_name(adj.right) or f"{name}.r"
            functors.setdefault(left, _emit_functor(self, adj.left))
            functors.setdefault(right, _emit_functor(self, adj.right))
            adjunctions[name] = {"left": left, "right": right, "unit": list(adj.unit)}
        systems = {}
        for name, spec in self.system_specs.items():
            system = self.system(name)
            systems[name] = _emit_system(system, spec["base"])
        return {
            "settings": dict(self.settings),
            "categories": {name: emit_category(cat) for name, cat in self.categories.items()},
            "functors": functors,
            "diagrams": {name: dict(ref) for name, ref in self.diagram_refs.items()},
            "presheaves": {
                name: {"base": self._category_name(T.base), "sizes": list(T.sizes), "maps": [list(m) for m in T.maps]}
                for name, T in self.presheaves.items()
            },
            "adjunctions": adjunctions,
            "natural_systems": systems,
            "tasks": [dict(task) for task in self.tasks],
        }

    def _functor_name(self, F: CatFunctor) -> Optional[str]:
        for name, G in self.functors.items():
            if G is F:
                return name
        return None

    def _category_name(self, cat: FiniteCategory) -> str:
        for name, C in self.categories.items():
            if C is cat:
                return name
        raise InputError(f"范畴 {cat.name} 不在文件中")


def _record(report: CheckReport, label: str, validation) -> None:
    report.record(label, validation.ok, violations=list(validation.violations))


def _emit_functor(wf: WorkbenchFile, F: CatFunctor) -> Dict[str, Any]:
    return {
        "source": wf._category_name(F.source),
        "target": wf._category_name(F.target),
        "objects": list(F.obj_map),
        "morphisms": list(F.mor_map),
    }


def _explicit_system(name: str, spec: Dict[str, Any], base: FiniteCategory, ring: Ring) -> NaturalSystem:
    where = f"natural_systems.{name}"
    rank = _int_list(_require(spec, "ranks", where), f"{where}.ranks")
    if len(rank) != base.n_morphisms:
        raise ParseError(f"{where}.ranks 长度 {len(rank)} ≠ 态射数 {base.n_morphisms}")
    table = base.table
    given_post: Dict[Tuple[int, int], Any] = {}
    given_pre: Dict[Tuple[int, int], Any] = {}
    for entry in spec.get("post", []):
        given_post[(int(_require(entry, "psi", where)), int(_require(entry, "alpha", where)))] = entry.get("matrix", [])
    for entry in spec.get("pre", []):
        given_pre[(int(_require(entry, "nu", where)), int(_require(entry, "alpha", where)))] = entry.get("matrix", [])

    post = {}
    pre = {}
    for alpha in range(base.n_morphisms):
        for psi in base.out_of[base.tgt[alpha]]:
            shape = (rank[table[psi][alpha]], rank[alpha])
            post[(psi, alpha)] = _action_matrix(given_post.pop((psi, alpha), None), shape, ring,
                                                base.is_identity_morphism[psi], f"{where}.post({psi},{alpha})")
        for nu in base.into[base.src[alpha]]:
            shape = (rank[table[alpha][nu]], rank[alpha])
            pre[(nu, alpha)] = _action_matrix(given_pre.pop((nu, alpha), None), shape, ring,
                                              base.is_identity_morphism[nu], f"{where}.pre({nu},{alpha})")
    leftover = list(given_post) + list(given_pre)
    if leftover:
        raise ParseError(f"{where} 含不可复合的作用项 {leftover[:3]}")
    return NaturalSystem(base, ring, tuple(rank), post, pre, name=name)


def _action_matrix(rows, shape, ring: Ring, is_identity: bool, where: str):
    if rows is None:
        if 0 in shape:
            return zero_matrix(shape[0], shape[1], ring)
        if is_identity and shape[0] == shape[1]:
            return identity_matrix(shape[0], ring)
        raise ParseError(f"缺少作用矩阵 {where}")
    if len(rows) != shape[0] or any(len(row) != shape[1] for row in rows):
        raise ParseError(f"作用矩阵 {where} 形状应为 {shape}")
    return matrix_from_rows(rows, ring, shape=shape)


def _emit_system(system: NaturalSystem, base_name: str) -> Dict[str, Any]:
    C = system.base
    ring = system.ring
    post = [
        {"psi": psi, "alpha": alpha, "matrix": matrix_to_rows(M, ring)}
        for (psi, alpha), M in sorted(system.post.items())
        if not C.is_identity_morphism[psi] and 0 not in M.shape
    ]
    pre = [
        {"nu": nu, "alpha": alpha, "matrix": matrix_to_rows(M, ring)}
        for (nu, alpha), M in sorted(system.pre.items())
        if not C.is_identity_morphism[nu] and 0 not in M.shape
    ]
    return {"base": base_name, "ring": ring.tag, "ranks": list(system.rank), "post": post, "pre": pre}


# ========== 解析入口 ==========

def parse_workbench(data: Dict[str, Any], source: str = "") -> WorkbenchFile:
    """解析全部块并解析名称引用；悬空引用抛 ParseError。"""
    if not isinstance(data, dict):
        raise ParseError("工作台文件的顶层必须是 JSON 对象")
    unknown = [key for key in data if key not in SECTIONS]
    if unknown:
        logger.warning("Catcoh：忽略未知的顶层块 keys=%s", unknown)
    wf = WorkbenchFile(source=source, settings=dict(data.get("settings") or {}))

    for name, spec in (data.get("categories") or {}).items():
        wf.categories[name] = parse_category(name, spec)

    for name, spec in (data.get("functors") or {}).items():
        where = f"functors.{name}"
        wf.functors[name] = CatFunctor(
            _resolve(wf.categories, spec.get("source"), "范畴", where),
            _resolve(wf.categories, spec.get("target"), "范畴", where),
            tuple(_int_list(_require(spec, "objects", where), f"{where}.objects")),
            tuple(_int_list(_require(spec, "morphisms", where), f"{where}.morphisms")),
            name=name,
        )

    for name, spec in (data.get("diagrams") or {}).items():
        where = f"diagrams.{name}"
        K = _resolve(wf.categories, spec.get("base"), "范畴", where)
        fibers = tuple(_resolve(wf.categories, f, "范畴", where) for f in _require(spec, "fibers", where))
        on_mor = tuple(_resolve(wf.functors, f, "函子", where) for f in _require(spec, "on_morphisms", where))
        wf.diagrams[name] = Diagram(K, fibers, on_mor, name=name)
        wf.diagram_refs[name] = {
            "base": spec["base"], "fibers": list(spec["fibers"]), "on_morphisms": list(spec["on_morphisms"])
        }

    for name, spec in (data.get("presheaves") or {}).items():
        where = f"presheaves.{name}"
        base = _resolve(wf.categories, spec.get("base"), "范畴", where)
        if "hom_to" in spec:
            T = representable_presheaf(base, int(spec["hom_to"]))
            wf.presheaves[name] = PresheafData(base, T.sizes, T.maps, name=name)
        else:
            sizes = tuple(_int_list(_require(spec, "sizes", where), f"{where}.sizes"))
            maps = tuple(tuple(_int_list(m, f"{where}.maps")) for m in _require(spec, "maps", where))
            wf.presheaves[name] = PresheafData(base, sizes, maps, name=name)

    for name, spec in (data.get("adjunctions") or {}).items():
        where = f"adjunctions.{name}"
        if spec.get("kind") == "galois":
            A = _resolve(wf.categories, spec.get("source"), "范畴", where)
            B = _resolve(wf.categories, spec.get("target"), "范畴", where)
            wf.adjunctions[name] = galois_adjunction(
                A, B, _int_list(_require(spec, "l", where), f"{where}.l"),
                _int_list(_require(spec, "r", where), f"{where}.r"), name=name,
            )
        else:
            wf.adjunctions[name] = Adjunction(
                _resolve(wf.functors, spec.get("left"), "函子", where),
                _resolve(wf.functors, spec.get("right"), "函子", where),
                tuple(_int_list(_require(spec, "unit", where), f"{where}.unit")),
                name=name,
            )

    for name, spec in (data.get("natural_systems") or {}).items():
        where = f"natural_systems.{name}"
        if not isinstance(spec, dict):
            raise ParseError(f"{where} 应为对象")
        base = _require(spec, "base", where)
        if isinstance(base, str) and base.startswith(GROTHENDIECK_PREFIX):
            _resolve(wf.diagrams, base[len(GROTHENDIECK_PREFIX):], "图表", where)
        else:
            _resolve(wf.categories, base, "范畴", where)
        if spec.get("kind") == "lemma44":
            _resolve(wf.presheaves, spec.get("presheaf"), "预层", where)
        Ring.parse(spec.get("ring", "zz"))
        wf.system_specs[name] = dict(spec)

    tasks = data.get("tasks") or []
    if not isinstance(tasks, list):
        raise ParseError("tasks 应为数组")
    wf.tasks = [dict(task) for task in tasks]
    logger.debug(
        "Catcoh：工作台文件已解析 source=%s categories=%s systems=%s tasks=%s",
        source, len(wf.categories), len(wf.system_specs), len(wf.tasks),
    )
    return wf


def load_workbench(path: str) -> WorkbenchFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise ParseError(f"找不到文件 {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"JSON 解析失败 {path}：第 {exc.lineno} 行 {exc.msg}") from exc
    return parse_workbench(data, source=path)


def save_workbench(wf: WorkbenchFile, path: str) -> str:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(wf.emit(), f, ensure_ascii=False, indent=2, sort_keys=True)
    return path
