import json
import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import InputError, ParseError, RelationNotPartialOrder
from core.homalg import Ring, matrices_equal
from services.bundled_examples import bundled_names, bundled_path, load_bundled, resolve_file
from services.workbench_file import load_workbench, parse_workbench, save_workbench


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_files_validate(name):
    report = load_bundled(name).validate()
    assert report.status == "pass", report.failures


def test_round_trip_keeps_structure(tmp_path):
    wf = load_bundled("galois")
    path = save_workbench(wf, str(tmp_path / "out" / "galois.json"))
    again = load_workbench(path)

    for name, cat in wf.categories.items():
        assert again.category(name).structure() == cat.structure()
    for name, adj in wf.adjunctions.items():
        assert again.adjunction(name).unit == adj.unit
    for name in wf.system_specs:
        a, b = wf.system(name), again.system(name)
        assert a.rank == b.rank
        assert all(matrices_equal(a.post[key], b.post[key]) for key in a.post)
        assert all(matrices_equal(a.pre[key], b.pre[key]) for key in a.pre)
    assert again.tasks == wf.tasks
    assert again.validate().ok


def test_round_trip_of_system_on_integral(tmp_path):
    wf = load_bundled("locality")
    again = load_workbench(save_workbench(wf, str(tmp_path / "loc.json")))
    emitted = json.loads((tmp_path / "loc.json").read_text(encoding="utf-8"))
    assert emitted["natural_systems"]["D"]["base"] == "grothendieck:loc"
    assert again.system("D").rank == (1, 1, 1)


def test_dangling_reference_is_rejected():
    data = {
        "categories": {"T": {"kind": "discrete", "objects": 1}},
        "functors": {"F": {"source": "T", "target": "missing", "objects": [0], "morphisms": [0]}},
    }
    with pytest.raises(ParseError):
        parse_workbench(data)


def test_bad_ring_tag_is_rejected():
    data = {
        "categories": {"T": {"kind": "discrete", "objects": 1}},
        "natural_systems": {"A": {"base": "T", "ring": "fp:4", "kind": "constant"}},
    }
    with pytest.raises(ParseError):
        parse_workbench(data)


def test_cyclic_relation_is_rejected():
    data = {"categories": {"P": {"kind": "poset", "objects": 2, "relation": [[0, 1], [1, 0]]}}}
    with pytest.raises(RelationNotPartialOrder):
        parse_workbench(data)


def test_missing_action_is_reported_by_validate():
    data = {
        "categories": {"I": {"kind": "poset", "objects": 2, "relation": [[0, 1]]}},
        "natural_systems": {"B": {"base": "I", "ranks": [1, 1, 1]}},
    }
    report = parse_workbench(data).validate()
    assert report.status == "fail"
    with pytest.raises(InputError):
        parse_workbench(data).system("B")


def test_ring_override_reduces_integers():
    wf = load_bundled("example_b")
    D = wf.system("Zk", Ring(3))
    assert D.ring == Ring(3)
    assert wf.system("Zk").ring.tag == "zz"


def test_bundled_name_resolution(tmp_path):
    assert resolve_file("example_b") == bundled_path("example_b")
    own = tmp_path / "example_b"
    own.write_text("{}", encoding="utf-8")
    assert resolve_file(str(own)) == str(own)
    with pytest.raises(ParseError):
        bundled_path("nope")
    with pytest.raises(ParseError):
        load_workbench(str(tmp_path / "absent.json"))
