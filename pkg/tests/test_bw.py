import pathlib
import random
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.bw import (
    bw_cochain,
    bw_cohomology,
    cochain_map_from_system_map,
    enumerate_strings,
    pullback_cochain_map,
)
from core.errors import InputError, NotAFunctor, RankOverflowBudget
from core.fincat import build_group_category, build_poset_category, poset_functor, terminal_category
from core.homalg import ZZ_RING, AbInvariants, Ring, is_quasi_isomorphism, matrix_from_rows
from core.natsys import COVARIANT, ModuleFunctor, SystemMap, natsys_constant, natsys_from_functor
from services.verification import random_poset, random_system_on

Z = AbInvariants(1)
ZERO = AbInvariants(0)


def interval():
    return build_poset_category(2, [(0, 0), (0, 1), (1, 1)], name="I")


def test_strings_of_interval():
    nerve = enumerate_strings(interval(), 3)
    assert [nerve.count(n) for n in range(4)] == [2, 3, 4, 5]
    assert nerve.strings[2] == ((0, 0), (1, 0), (2, 1), (2, 2))
    assert nerve.composite[2] == (0, 1, 1, 2)


def test_interval_with_constant_coefficients():
    I = interval()
    bw = bw_cochain(I, natsys_constant(I, ZZ_RING, 1), 3)
    assert bw.ranks == (2, 3, 4, 5)
    assert bw.complex.validate() == []
    assert bw_cohomology(I, natsys_constant(I, ZZ_RING, 1), 3) == [Z, ZERO, ZERO]


def test_cyclic_group_of_order_two():
    Z2 = build_group_category(2)
    D = natsys_constant(Z2, ZZ_RING, 1)
    bw = bw_cochain(Z2, D, 5)
    assert bw.ranks == (1, 2, 4, 8, 16, 32)
    table = bw_cohomology(Z2, D, 5)
    assert [value.text for value in table] == ["Z", "0", "Z/2", "0", "Z/2"]


def test_cyclic_group_of_order_three():
    Z3 = build_group_category(3)
    table = bw_cohomology(Z3, natsys_constant(Z3, ZZ_RING, 1), 4)
    assert table == [Z, ZERO, AbInvariants(0, (3,)), ZERO]


def test_field_coefficients_over_z2():
    Z2 = build_group_category(2)
    F2 = Ring(2)
    table = bw_cohomology(Z2, natsys_constant(Z2, F2, 1), 4)
    assert table == [AbInvariants(1, (), 2)] * 4


def test_sign_twisted_coefficients():
    Z2 = build_group_category(2)
    sign = ModuleFunctor(COVARIANT, {0: 1}, actions={1: matrix_from_rows([[-1]], ZZ_RING)})
    D = natsys_from_functor(Z2, COVARIANT, sign, ZZ_RING)
    assert [value.text for value in bw_cohomology(Z2, D, 4)] == ["0", "Z/2", "0", "Z/2"]


def test_budget_and_degree_guards():
    Z2 = build_group_category(2)
    D = natsys_constant(Z2, ZZ_RING, 1)
    with pytest.raises(RankOverflowBudget) as excinfo:
        bw_cochain(Z2, D, 5, budget=10)
    assert excinfo.value.budget == 10
    with pytest.raises(InputError):
        bw_cochain(Z2, D, 0)
    with pytest.raises(InputError):
        bw_cochain(interval(), D, 2)


def test_pullback_along_collapse_is_quasi_isomorphism():
    I = interval()
    T = terminal_category()
    collapse = poset_functor(I, T, [0, 0], name="c")
    f = pullback_cochain_map(collapse, natsys_constant(T, ZZ_RING, 1), 3)
    assert is_quasi_isomorphism(f)


def test_doubling_map_is_not_quasi_isomorphism():
    Z2 = build_group_category(2)
    D = natsys_constant(Z2, ZZ_RING, 1)
    doubling = SystemMap(D, D, tuple(matrix_from_rows([[2]], ZZ_RING) for _ in range(2)), name="2")
    f = cochain_map_from_system_map(Z2, doubling, 3)
    assert not is_quasi_isomorphism(f)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_coboundary_squares_to_zero(seed):
    rng = random.Random(seed)
    P = random_poset(rng, 4)
    try:
        D = random_system_on(rng, P)
    except NotAFunctor:
        D = natsys_constant(P, ZZ_RING, 1)
    bw = bw_cochain(P, D, 3)
    assert bw.complex.validate() == []
