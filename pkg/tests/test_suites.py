import numpy as np
import pytest

from config import SUITE_CONFIG
from errors import InvalidInputError
from measures import check_admissible
from quadrature import make_rule
from suites import SUITES, _STREAMS, random_blaschke, random_measure, run_suite


def test_suite_registry_matches_config():
    assert set(SUITES) == set(_STREAMS) == set(SUITE_CONFIG["suites"])


def test_unknown_suite():
    with pytest.raises(InvalidInputError):
        run_suite("nonsense")


def test_random_measure_is_admissible(rng):
    mu = random_measure(rng, make_rule(2, 8))
    assert check_admissible(mu)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-10)


def test_random_blaschke_zeros_stay_inside(rng):
    f = random_blaschke(rng, 4)
    assert len(f.zeros) == 4
    assert np.all(np.abs(f.zeros) < 0.6)


def test_suites_are_seeded():
    first = run_suite("naturality", seed=7, level=8)
    second = run_suite("naturality", seed=7, level=8)
    assert first.render() == second.render()
    assert first.passed, first.render()


@pytest.mark.slow
def test_inner_suite_passes():
    report = run_suite("inner")
    assert report.passed, report.render()
