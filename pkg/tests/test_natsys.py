import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import ElementNotInT, InputError, NotAFunctor
from core.fincat import (
    build_group_category,
    build_poset_category,
    initial_objects,
    poset_functor,
    terminal_category,
    validate_category,
)
from core.homalg import ZZ_RING, Ring, identity_matrix, matrix_from_rows
from core.natsys import (
    CONTRAVARIANT,
    COVARIANT,
    ModuleFunctor,
    NaturalSystem,
    SystemMap,
    build_category_aTm,
    build_factorization_category,
    natsys_change_ring,
    natsys_constant,
    natsys_from_functor,
    natsys_lemma44,
    natsys_pullback,
    representable_presheaf,
    s_set,
    validate_natural_system,
    validate_presheaf,
    validate_system_map,
)


def interval():
    return build_poset_category(2, [(0, 0), (0, 1), (1, 1)], name="I")


def test_constant_system_validates():
    D = natsys_constant(interval(), ZZ_RING, 2)
    assert D.rank == (2, 2, 2)
    assert D.total_rank == 6
    assert validate_natural_system(D).ok
    with pytest.raises(InputError):
        natsys_constant(interval(), ZZ_RING, -1)


def test_factorization_category_of_interval():
    fc = build_factorization_category(interval())
    assert fc.as_category.n_objects == 3
    assert fc.as_category.n_morphisms == 5
    assert validate_category(fc.as_category).ok
    D = natsys_constant(interval(), ZZ_RING, 1)
    assert validate_natural_system(D, fc).ok


def test_sign_representation_is_covariant_system():
    Z2 = build_group_category(2)
    sign = ModuleFunctor(COVARIANT, {0: 1}, actions={1: matrix_from_rows([[-1]], ZZ_RING)})
    D = natsys_from_functor(Z2, COVARIANT, sign, ZZ_RING, name="sign")
    assert D.rank == (1, 1)
    assert D.post_of(1, 0).to_dod() == {0: {0: -1}}
    assert D.pre_of(1, 0).to_dod() == {0: {0: 1}}


def test_non_functorial_action_rejected():
    Z2 = build_group_category(2)
    doubling = ModuleFunctor(COVARIANT, {0: 1}, actions={1: matrix_from_rows([[2]], ZZ_RING)})
    with pytest.raises(NotAFunctor):
        natsys_from_functor(Z2, COVARIANT, doubling, ZZ_RING)
    with pytest.raises(NotAFunctor):
        natsys_from_functor(Z2, "sideways", doubling, ZZ_RING)


def test_contravariant_ranks_follow_source():
    I = interval()
    M = ModuleFunctor(CONTRAVARIANT, {0: 2, 1: 1}, actions={1: matrix_from_rows([[1], [0]], ZZ_RING)})
    D = natsys_from_functor(I, CONTRAVARIANT, M, ZZ_RING)
    assert D.rank == (2, 2, 1)


def test_broken_composite_is_located():
    Z2 = build_group_category(2)
    D = natsys_constant(Z2, ZZ_RING, 1)
    post = dict(D.post)
    post[(1, 0)] = matrix_from_rows([[2]], ZZ_RING)
    broken = NaturalSystem(Z2, ZZ_RING, D.rank, post, D.pre, name="broken")
    report = validate_natural_system(broken)
    assert not report.ok
    assert any("ψ′_*ψ_*" in message for message in report.violations)


def test_pullback_and_change_of_ring():
    I = interval()
    T = terminal_category()
    collapse = poset_functor(I, T, [0, 0], name="c")
    D = natsys_pullback(collapse, natsys_constant(T, ZZ_RING, 2))
    assert D.rank == (2, 2, 2)
    reduced = natsys_change_ring(D, Ring(3))
    assert reduced.ring == Ring(3)
    assert validate_natural_system(reduced).ok
    with pytest.raises(InputError):
        natsys_change_ring(reduced, ZZ_RING)


def test_identity_system_map():
    D = natsys_constant(interval(), ZZ_RING, 1)
    phi = SystemMap(D, D, tuple(identity_matrix(1, ZZ_RING) for _ in range(3)), name="id")
    assert validate_system_map(phi).ok
    assert phi.is_isomorphism()


def test_representable_presheaf_and_elements():
    I = interval()
    T = representable_presheaf(I, 1)
    assert T.sizes == (1, 1)
    assert validate_presheaf(T).ok
    assert [s_set(T, 0, 0, alpha) for alpha in range(3)] == [[(0, 0)], [(0, 0)], [(1, 0)]]
    D = natsys_lemma44(T, 0, 0, 2, ZZ_RING)
    assert D.rank == (2, 2, 2)
    assert validate_natural_system(D).ok
    with pytest.raises(ElementNotInT):
        natsys_lemma44(T, 0, 5, 1, ZZ_RING)


def test_category_of_elements_has_initial_object():
    T = representable_presheaf(interval(), 1)
    E = build_category_aTm(T, 0, 0)
    assert (E.n_objects, E.n_morphisms) == (2, 3)
    assert validate_category(E).ok
    assert initial_objects(E) == [0]
