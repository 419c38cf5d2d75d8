import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.errors import InputError, ObjectOutOfRange
from core.fincat import build_poset_category, validate_adjunction, validate_category, validate_functor
from core.grothendieck import (
    FiberAnalysis,
    adjoint_lr,
    check_lemma_adjuntos,
    check_prop_muro,
    commutation_report,
    fiber_inclusion,
    fiber_sizes,
    h_local_verdicts,
    is_h_local,
    is_local,
    projection_functor,
    thomason_tilde,
    validate_diagram,
)
from core.homalg import ZZ_RING
from core.natsys import natsys_constant
from services.bundled_examples import load_bundled


@pytest.fixture(scope="module")
def example_c():
    return load_bundled("example_c")


@pytest.fixture(scope="module")
def galois():
    return load_bundled("galois")


def test_example_c_integral_is_connected_groupoid(example_c):
    G = example_c.grothendieck("exC")
    assert validate_diagram(G.diagram).ok
    assert (G.category.n_objects, G.category.n_morphisms) == (2, 4)
    assert validate_category(G.category).ok
    assert G.category.hom(G.obj(0, 0), G.obj(0, 1)) != ()


def test_projection_and_fiber_inclusion(example_c):
    G = example_c.grothendieck("exC")
    assert validate_functor(projection_functor(G)).ok
    j = fiber_inclusion(G, 0)
    assert validate_functor(j).ok
    assert j.obj_map == (G.obj(0, 0), G.obj(0, 1))
    with pytest.raises(ObjectOutOfRange):
        fiber_inclusion(G, 3)


def test_example_a_integral_is_a_chain():
    wf = load_bundled("example_a")
    G = wf.grothendieck("exA")
    assert G.category.n_objects == 3
    assert G.category.n_morphisms == 6
    assert [label for label in G.category.object_labels] == [(0, 0), (0, 1), (1, 0)]


def test_tilde_category_and_adjunction(example_c):
    G = example_c.grothendieck("exC")
    tilde = thomason_tilde(G.diagram, 0)
    assert tilde.category.n_objects == 4
    assert validate_category(tilde.category).ok
    adj = adjoint_lr(tilde)
    assert validate_adjunction(adj).ok
    assert adj.left.target.n_objects == 2


def test_constant_system_is_local(example_c):
    G = example_c.grothendieck("exC")
    D = example_c.system("Z")
    analysis = FiberAnalysis(G, D)
    assert is_local(G, D, analysis)
    assert is_h_local(G, D, 3, analysis=analysis)
    assert commutation_report(G, analysis).ok
    sizes = fiber_sizes(G, analysis)
    assert [row["tilde_objects"] for row in sizes] == [4]


def test_system_on_wrong_category_rejected(example_c):
    G = example_c.grothendieck("exC")
    I = build_poset_category(2, [(0, 0), (0, 1), (1, 1)])
    with pytest.raises(InputError):
        FiberAnalysis(G, natsys_constant(I, ZZ_RING, 1))


def test_locality_counterexample():
    wf = load_bundled("locality")
    G = wf.grothendieck("loc")
    D = wf.system("D")
    assert not is_local(G, D)
    verdicts = h_local_verdicts(G, D, 3)
    assert not all(all(per_degree.values()) for per_degree in verdicts.values())


def test_adjuntos_on_galois_connections(galois):
    report = check_lemma_adjuntos(galois.adjunction("collapse"), galois.system("ZT"), 4)
    assert report.status == "pass"
    report = check_lemma_adjuntos(galois.adjunction("halve"), galois.system("M2"), 4)
    assert report.status == "pass"


def test_adjuntos_fails_outside_its_scope(galois):
    # G 只在非恒等态射上非零：H^1(I, G) = ℤ，而 l^*G = 0
    report = check_lemma_adjuntos(galois.adjunction("bottom"), galois.system("G"), 3)
    assert report.status == "fail"


def test_muro_comparison_on_galois_connection(galois):
    report = check_prop_muro(galois.adjunction("halve"), galois.system("E4"), 4)
    assert report.status == "pass"
    assert any(item["check"].startswith("cone(Φ)") for item in report.checks)


def test_muro_comparison_per_fiber(example_c):
    G = example_c.grothendieck("exC")
    analysis = FiberAnalysis(G, example_c.system("Z"))
    data = analysis.fiber(0)
    assert check_prop_muro(data.adjunction, data.system, 3).ok
