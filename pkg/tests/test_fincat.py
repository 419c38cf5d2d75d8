import pathlib
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core import fincat
from core.errors import NotAFunctor, NotAMonoid, RelationNotPartialOrder, ValidationError
from core.fincat import (
    NO_COMP,
    CatFunctor,
    FiniteCategory,
    ValidationReport,
    build_discrete_category,
    build_group_category,
    build_monoid_category,
    build_poset_category,
    compose_functors,
    counit,
    galois_adjunction,
    identity_adjunction,
    initial_objects,
    poset_functor,
    terminal_category,
    transitive_closure,
    under_category,
    validate_adjunction,
    validate_category,
    validate_functor,
)


def interval():
    return build_poset_category(2, [(0, 0), (0, 1), (1, 1)], name="I")


def test_interval_layout():
    I = interval()
    assert I.n_objects == 2
    assert I.n_morphisms == 3
    assert (I.src, I.tgt) == ((0, 0, 1), (0, 1, 1))
    assert I.identity == (0, 2)
    assert I.compose(1, 0) == 1
    assert I.compose(2, 1) == 1
    assert I.table[0][2] == NO_COMP
    assert validate_category(I).ok


def test_poset_rejects_non_transitive_relation():
    relation = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]
    with pytest.raises(RelationNotPartialOrder):
        build_poset_category(3, relation)
    closed = transitive_closure([(0, 1), (1, 2)], 3)
    assert (0, 2) in closed and (2, 2) in closed
    assert build_poset_category(3, sorted(closed)).n_morphisms == 6


def test_poset_rejects_cycle():
    with pytest.raises(RelationNotPartialOrder):
        build_poset_category(2, [(0, 0), (1, 1), (0, 1), (1, 0)])


def test_group_category_composition():
    Z3 = build_group_category(3)
    assert Z3.n_objects == 1
    assert Z3.compose(1, 2) == 0
    assert Z3.composite([1, 1, 2]) == 1
    assert validate_category(Z3).ok


def test_monoid_requires_associativity():
    # (2·2)·1 = 1 而 2·(2·1) = 2
    table = [[0, 1, 2], [1, 1, 1], [2, 0, 1]]
    with pytest.raises(NotAMonoid):
        build_monoid_category(table)


def test_monoid_constructor_runs_full_validation(monkeypatch):
    calls = []

    def failing(cat):
        calls.append(cat.name)
        return ValidationReport(cat.name, ["forced"])

    monkeypatch.setattr(fincat, "validate_category", failing)
    with pytest.raises(ValidationError):
        build_monoid_category([[0, 1], [1, 0]], name="Z2")
    assert calls == ["Z2"]


def test_broken_associativity_is_located():
    broken = FiniteCategory(
        n_objects=1,
        src=(0, 0, 0),
        tgt=(0, 0, 0),
        identity=(0,),
        table=((0, 1, 2), (1, 1, 1), (2, 0, 1)),
        name="broken",
    )
    report = validate_category(broken)
    assert not report.ok
    assert any("结合律" in message for message in report.violations)


def test_terminal_and_discrete():
    T = terminal_category()
    assert (T.n_objects, T.n_morphisms) == (1, 1)
    D2 = build_discrete_category(2)
    assert D2.hom(0, 1) == ()
    assert initial_objects(D2) == []
    assert initial_objects(interval()) == [0]


def test_under_category_has_initial_identity():
    Z2 = build_group_category(2)
    U = under_category(Z2, 0)
    assert U.n_objects == 2
    assert U.n_morphisms == 4
    assert validate_category(U).ok
    assert 0 in initial_objects(U)


def test_functor_validation_and_composition():
    I = interval()
    T = terminal_category()
    collapse = poset_functor(I, T, [0, 0], name="c")
    assert collapse.mor_map == (0, 0, 0)
    swap = CatFunctor(I, I, (1, 0), (2, 1, 0), name="bad")
    assert not validate_functor(swap).ok
    top = CatFunctor(T, I, (1,), (2,), name="top")
    assert compose_functors(collapse, top).mor_map == (0,)
    with pytest.raises(NotAFunctor):
        poset_functor(I, I, [1, 0])


def test_galois_connection_collapse():
    I = interval()
    T = terminal_category()
    adj = galois_adjunction(I, T, [0, 0], [1], name="collapse")
    assert adj.unit == (1, 2)
    assert validate_adjunction(adj).ok
    assert counit(adj) == (0,)


def test_not_a_galois_connection():
    I = interval()
    T = terminal_category()
    # r(•) = 0 不满足 1 ≤ r l 1
    with pytest.raises(NotAFunctor):
        galois_adjunction(I, T, [0, 0], [0])


def test_identity_adjunction_validates():
    assert validate_adjunction(identity_adjunction(build_group_category(3))).ok


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5))))
def test_closed_forward_relations_give_categories(n, edges):
    forward = {(i, j) for i, j in edges if i < j < n}
    P = build_poset_category(n, sorted(transitive_closure(forward, n)))
    assert validate_category(P).ok
    for x in range(n):
        assert P.hom(x, x) == (P.identity[x],)
