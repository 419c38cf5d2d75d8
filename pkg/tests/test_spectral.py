import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import NotAField, RankOverflowBudget
from core.homalg import cohomology_table
from core.spectral import (
    bicomplex_report,
    build_bicomplex_thm1,
    column_complex,
    e1_invariants,
    phi_map,
    row_exactness_check,
    spectral_pages,
    total_complex,
)
from services.bundled_examples import load_bundled


def bicomplex(example, diagram, system, N=3):
    wf = load_bundled(example)
    return build_bicomplex_thm1(wf.grothendieck(diagram), wf.system(system), N)


def test_bicomplex_identities_hold():
    B = bicomplex("example_b", "exB", "F2")
    assert bicomplex_report(B).ok
    assert total_complex(B).validate() == []
    assert column_complex(B, 0).validate() == []


def test_phi_is_quasi_isomorphism_and_rows_exact():
    B = bicomplex("example_c", "exC", "Z")
    _, report = phi_map(B)
    assert report.ok
    assert row_exactness_check(B).ok


def test_total_cohomology_matches_direct():
    B = bicomplex("example_a", "exA", "Z")
    assert cohomology_table(total_complex(B)) == cohomology_table(B.total_bw.complex)


def test_e1_covers_trusted_triangle():
    B = bicomplex("example_a", "exA", "Z", N=3)
    e1 = e1_invariants(B)
    assert sorted(e1) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]


def test_pages_for_cyclic_group():
    B = bicomplex("example_b", "exB", "F2")
    result = spectral_pages(B, 3)
    assert len(result.pages) == 3
    assert result.abutment == [1, 1, 1]
    assert result.page(3).r == 3
    assert 0 in result.stable_degrees


def test_pages_for_swapped_points():
    B = bicomplex("example_c", "exC", "F2")
    result = spectral_pages(B, 3)
    assert result.abutment == [1, 0, 0]


def test_pages_need_field_coefficients():
    B = bicomplex("example_c", "exC", "Z")
    with pytest.raises(NotAField):
        spectral_pages(B, 2)


def test_bicomplex_budget():
    wf = load_bundled("example_b")
    with pytest.raises(RankOverflowBudget):
        build_bicomplex_thm1(wf.grothendieck("exB"), wf.system("F2"), 4, budget=20)
