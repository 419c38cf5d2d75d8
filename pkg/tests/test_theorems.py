import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.reports import HYPOTHESIS_FAILS, PASS
from core.theorems import check_theorem1, check_theorem2, e2_identify_thm1
from services.bundled_examples import load_bundled


@pytest.fixture(scope="module")
def example_b():
    return load_bundled("example_b")


@pytest.fixture(scope="module")
def example_c():
    return load_bundled("example_c")


def test_theorem1_for_cyclic_group(example_b):
    report = check_theorem1(example_b.grothendieck("exB"), example_b.system("F2"), 3)
    assert report.status == PASS, report.failures
    assert report.data["abutment"] == [1, 1, 1]


def test_theorem1_for_swapped_points(example_c):
    report = check_theorem1(example_c.grothendieck("exC"), example_c.system("F2"), 3)
    assert report.status == PASS, report.failures
    assert report.data["abutment"] == [1, 0, 0]


def test_theorem1_over_integers_reports_e1_only(example_c):
    report = check_theorem1(example_c.grothendieck("exC"), example_c.system("Z"), 3)
    assert report.status == PASS
    assert "E_1" in report.note
    assert "pages" not in report.data


def test_fiber_cohomology_of_swapped_points(example_c):
    report = e2_identify_thm1(example_c.grothendieck("exC"), example_c.system("F2"), 3)
    assert report.ok
    assert report.data["fiber_dims"][0] == {"q": 0, "dims": [2]}
    assert report.data["fiber_dims"][1] == {"q": 1, "dims": [0]}


def test_theorem2_for_cyclic_group(example_b):
    report = check_theorem2(example_b.grothendieck("exB"), example_b.system("F2"), 3)
    assert report.status == PASS, report.failures
    assert report.data["h_local"] is True


def test_theorem2_for_swapped_points(example_c):
    report = check_theorem2(example_c.grothendieck("exC"), example_c.system("F2"), 3)
    assert report.status == PASS, report.failures


def test_theorem2_stops_when_not_h_local():
    wf = load_bundled("locality")
    report = check_theorem2(wf.grothendieck("loc"), wf.system("D"), 3)
    assert report.status == HYPOTHESIS_FAILS
    assert report.data["local"] is False
    assert report.data["failing_objects"]
