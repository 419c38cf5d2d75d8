import itertools
import pathlib
import random
import subprocess
import sys
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import DegreeBeyondTrusted, NotAChainMap, NotAField, ParseError
from core.homalg import (
    ZZ_RING,
    AbInvariants,
    CochainComplex,
    CochainMap,
    CohomologyBasis,
    Ring,
    cohomology_at,
    cohomology_table,
    cone_acyclic,
    identity_matrix,
    induced_on_cohomology,
    invariant_factors,
    inverse_matrix,
    is_invertible,
    is_quasi_isomorphism,
    mapping_cone,
    mat_mul,
    matrices_equal,
    matrix_from_rows,
    matrix_to_rows,
    smith_normal_form,
    zero_matrix,
)

F2 = Ring(2)
F3 = Ring(3)

small_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda m: st.integers(min_value=1, max_value=5).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(min_value=-6, max_value=6), min_size=n, max_size=n),
            min_size=m,
            max_size=m,
        )
    )
)


def test_ring_parse():
    assert Ring.parse("zz") == ZZ_RING
    assert Ring.parse("fp:5").p == 5
    assert Ring.parse("fp:5").is_field
    with pytest.raises(ParseError):
        Ring.parse("fp:4")
    with pytest.raises(ParseError):
        Ring.parse("qq")


def test_known_smith_form():
    M = matrix_from_rows([[2, 4], [6, 8]], ZZ_RING)
    U, S, V = smith_normal_form(M)
    assert matrix_to_rows(S, ZZ_RING) == [[2, 0], [0, 4]]
    assert matrices_equal(mat_mul(mat_mul(U, M), V), S)
    assert invariant_factors(M) == [2, 4]


@settings(max_examples=500, deadline=None)
@given(small_matrices)
def test_smith_postconditions(rows):
    M = matrix_from_rows(rows, ZZ_RING)
    U, S, V = smith_normal_form(M)
    assert matrices_equal(mat_mul(mat_mul(U, M), V), S)
    assert is_invertible(U, ZZ_RING)
    assert is_invertible(V, ZZ_RING)
    diagonal = []
    for i, row in enumerate(matrix_to_rows(S, ZZ_RING)):
        for j, value in enumerate(row):
            if i != j:
                assert value == 0
            elif value:
                diagonal.append(value)
    assert all(d > 0 for d in diagonal)
    for a, b in zip(diagonal, diagonal[1:]):
        assert b % a == 0


def determinantal_factors(rows):
    """d_k = 所有 k 阶子式的 gcd，不变因子为 d_k / d_{k-1}。"""
    M = Matrix(rows)
    factors, previous = [], 1
    for k in range(1, min(M.shape) + 1):
        d_k = 0
        for r in itertools.combinations(range(M.rows), k):
            for c in itertools.combinations(range(M.cols), k):
                d_k = gcd(d_k, int(M.extract(list(r), list(c)).det()))
        if d_k == 0:
            break
        factors.append(d_k // previous)
        previous = d_k
    return factors


@settings(max_examples=200, deadline=None)
@given(small_matrices)
def test_invariant_factors_match_determinantal_divisors(rows):
    ours = sorted(abs(d) for d in invariant_factors(matrix_from_rows(rows, ZZ_RING)))
    assert ours == determinantal_factors(rows)


def test_invariant_factors_with_shared_unit_pivot():
    # 主元列在另一行也非零
    assert invariant_factors(matrix_from_rows([[1], [1]], ZZ_RING, (2, 1))) == [1]
    assert invariant_factors(matrix_from_rows([[1, 1], [1, 2]], ZZ_RING)) == [1, 1]
    assert invariant_factors(matrix_from_rows([[1, 1], [-1, 1]], ZZ_RING)) == [1, 2]


def multiplication_by(k):
    # 0 → ℤ --k--> ℤ → 0
    return CochainComplex(
        ZZ_RING,
        (1, 1, 0),
        (matrix_from_rows([[k]], ZZ_RING), zero_matrix(0, 1, ZZ_RING)),
    )


def test_torsion_in_cohomology():
    cx = multiplication_by(2)
    assert cx.validate() == []
    assert cohomology_table(cx) == [AbInvariants(0), AbInvariants(0, (2,))]
    assert cohomology_at(cx, 1).text == "Z/2"
    with pytest.raises(DegreeBeyondTrusted):
        cohomology_at(cx, 2)


def test_reduce_mod_two_sees_the_kernel():
    cx = multiplication_by(2).reduce_mod(2)
    assert cohomology_table(cx) == [AbInvariants(1, (), 2), AbInvariants(1, (), 2)]
    with pytest.raises(NotAField):
        cx.reduce_mod(3)


def test_bad_composite_is_reported():
    d0 = matrix_from_rows([[1]], ZZ_RING)
    d1 = matrix_from_rows([[1]], ZZ_RING)
    cx = CochainComplex(ZZ_RING, (1, 1, 1), (d0, d1))
    assert cx.validate() == ["d_1·d_0 ≠ 0"]


def _f2_rank_by_enumeration(columns, size):
    span = set()
    for coeffs in itertools.product((0, 1), repeat=len(columns)):
        vector = tuple(sum(c * col[i] for c, col in zip(coeffs, columns)) % 2 for i in range(size))
        span.add(vector)
    return len(span).bit_length() - 1


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_f2_cohomology_matches_enumeration(seed):
    rng = random.Random(seed)
    a, b, c = rng.randint(0, 3), rng.randint(1, 4), rng.randint(0, 3)
    d1_rows = [[rng.randint(0, 1) for _ in range(b)] for _ in range(c)]
    kernel = [
        v for v in itertools.product((0, 1), repeat=b)
        if all(sum(r[i] * v[i] for i in range(b)) % 2 == 0 for r in d1_rows)
    ]
    d0_cols = [rng.choice(kernel) for _ in range(a)]
    d0_rows = [[d0_cols[j][i] for j in range(a)] for i in range(b)]
    cx = CochainComplex(
        F2,
        (a, b, c),
        (matrix_from_rows(d0_rows, F2, (b, a)), matrix_from_rows(d1_rows, F2, (c, b))),
    )
    assert cx.validate() == []
    image_rank = _f2_rank_by_enumeration(d0_cols, b)
    kernel_dim = len(kernel).bit_length() - 1
    assert cohomology_at(cx, 0).free_rank == a - image_rank
    assert cohomology_at(cx, 1).free_rank == kernel_dim - image_rank


def test_identity_is_quasi_isomorphism():
    cx = multiplication_by(2)
    ident = CochainMap(cx, cx, (identity_matrix(1, ZZ_RING), identity_matrix(1, ZZ_RING), identity_matrix(0, ZZ_RING)))
    assert is_quasi_isomorphism(ident)
    cone = mapping_cone(ident)
    assert cone.start_degree == -1
    assert cone.validate() == []


def test_zero_map_cone_detects_degree_zero():
    # 0 次的 ℤ → 0：ker 落在映射锥的 −1 次
    source = CochainComplex(ZZ_RING, (1, 0), (zero_matrix(0, 1, ZZ_RING),))
    target = CochainComplex(ZZ_RING, (0, 0), (zero_matrix(0, 0, ZZ_RING),))
    f = CochainMap(source, target, (zero_matrix(0, 1, ZZ_RING), zero_matrix(0, 0, ZZ_RING)))
    verdicts = cone_acyclic(f)
    assert verdicts[-1] is False


def test_non_chain_map_rejected():
    cx = multiplication_by(2)
    bad = CochainMap(cx, cx, (identity_matrix(1, ZZ_RING), zero_matrix(1, 1, ZZ_RING), zero_matrix(0, 0, ZZ_RING)))
    with pytest.raises(NotAChainMap):
        mapping_cone(bad)


def test_induced_map_on_field_cohomology():
    # F3^2 --[1 1]--> F3：H^0 = ker d_0 为一维，交换作用为 −1
    d0 = matrix_from_rows([[1, 1]], F3)
    cx = CochainComplex(F3, (2, 1, 0), (d0, zero_matrix(0, 1, F3)))
    basis = CohomologyBasis.build(cx, 0)
    assert basis.dimension == 1
    swap = matrix_from_rows([[0, 1], [1, 0]], F3)
    f = CochainMap(cx, cx, (swap, identity_matrix(1, F3), zero_matrix(0, 0, F3)))
    assert matrix_to_rows(induced_on_cohomology(f, 0, basis, basis), F3) == [[2]]


def test_inverse_over_field_only():
    M = matrix_from_rows([[1, 1], [0, 1]], F3)
    inv = inverse_matrix(M, F3)
    assert matrices_equal(mat_mul(M, inv), identity_matrix(2, F3))
    with pytest.raises(NotAField):
        inverse_matrix(matrix_from_rows([[1]], ZZ_RING), ZZ_RING)
    assert inverse_matrix(zero_matrix(0, 0, F3), F3).shape == (0, 0)


def test_algebra_imports_without_persistence_stack():
    root = str(pathlib.Path(__file__).resolve().parents[1])
    code = (
        "import sys; sys.path.insert(0, %r); import core.homalg, core.bw, core.spectral; "
        "print('peewee' in sys.modules, 'db_manager' in sys.modules)" % root
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    assert out.split() == ["False", "False"]
