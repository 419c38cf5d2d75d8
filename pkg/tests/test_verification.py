import pathlib
import random
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))

from core.fincat import initial_objects, validate_adjunction, validate_category
from core.homalg import ZZ_RING
from core.natsys import validate_natural_system
from services.verification import (
    SUITES,
    covariant_height_system,
    instance_count,
    random_galois,
    random_matrix,
    random_poset,
    run_suite,
)


def test_random_poset_with_bottom():
    rng = random.Random(7)
    for _ in range(10):
        P = random_poset(rng, 6, bottom=True)
        assert validate_category(P).ok
        assert initial_objects(P) == [0]


def test_random_galois_connections_are_adjunctions():
    rng = random.Random(11)
    for _ in range(5):
        assert validate_adjunction(random_galois(rng, 5)).ok


def test_height_systems_are_natural():
    rng = random.Random(3)
    P = random_poset(rng, 5)
    D = covariant_height_system(P, random_matrix(rng, 2, ZZ_RING), ZZ_RING)
    assert validate_natural_system(D).ok


@pytest.mark.parametrize("name", sorted(SUITES))
def test_small_suites_pass(name):
    report = run_suite(name, instances=2, seed=5, N_max=3)
    passed, total = instance_count(report)
    assert total > 0
    assert passed == total, report.failures


def test_suites_are_reproducible():
    first = run_suite("trivial", instances=3, seed=42)
    second = run_suite("trivial", instances=3, seed=42)
    assert first.checks == second.checks
