import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tasep_pgf.errors import ConfigError, SizeCapError
from tasep_pgf.pgf_model import PGFModel
from tasep_pgf.transition import (
    Configuration,
    brute_force_distribution,
    mc_distribution,
    reachable_targets,
    schutz_matrix,
    transition_probability,
)

FACTORED = PGFModel.discrete_pmf((0.42, 0.46, 0.12))


def test_configuration_validation():
    assert Configuration.parse("3, 1,-2").positions == (3, 1, -2)
    with pytest.raises(ConfigError):
        Configuration((1, 1))
    with pytest.raises(ConfigError):
        Configuration(())


@pytest.mark.parametrize("model,max_jump", [(PGFModel.bernoulli(0.5), 1), (FACTORED, 2)], ids=["bern", "pmf"])
@pytest.mark.parametrize("frm", [(0,), (1, 0), (0, -1, -2), (2, 0, -3)])
@pytest.mark.parametrize("t", [1, 2, 3])
def test_determinant_matches_enumeration(model, max_jump, frm, t):
    dist = brute_force_distribution(model, frm, t)
    for target in reachable_targets(frm, t, max_jump):
        assert transition_probability(model, frm, target, t) == pytest.approx(dist.get(target, 0.0), abs=1e-9)


def test_geometric_parallel_update_matches_determinant():
    model = PGFModel.geometric(0.3)
    frm = (0, -1)
    dist = brute_force_distribution(model, frm, 2)
    for target, p in sorted(dist.items(), key=lambda kv: -kv[1])[:20]:
        assert transition_probability(model, frm, target, 2) == pytest.approx(p, abs=1e-10)


def test_enumerated_law_is_normalized():
    dist = brute_force_distribution(FACTORED, (0, -1, -2), 3)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_determinants_sum_to_one():
    frm, t = (0, -1, -3), 2
    model = PGFModel.bernoulli(0.3)
    total = sum(transition_probability(model, frm, c, t) for c in reachable_targets(frm, t, 1))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_single_particle_matrix_is_free_law():
    model = PGFModel.continuous_poisson(1.0)
    A = schutz_matrix(model, (0,), (2,), 1.5)
    assert A.shape == (1, 1)
    assert A[0, 0] == pytest.approx(np.exp(-1.5) * 1.5**2 / 2, abs=1e-13)


def test_unreachable_target_has_zero_probability():
    assert transition_probability(PGFModel.bernoulli(0.5), (0, -1), (-1, -2), 2) == pytest.approx(0, abs=1e-13)


def test_enumeration_size_caps():
    with pytest.raises(SizeCapError):
        brute_force_distribution(PGFModel.bernoulli(0.5), (0, -1, -2, -3, -4), 1)
    with pytest.raises(SizeCapError):
        brute_force_distribution(PGFModel.bernoulli(0.5), (0,), 6)
    with pytest.raises(ConfigError):
        brute_force_distribution(PGFModel.continuous_poisson(1.0), (0,), 1)


def test_continuous_time_against_monte_carlo():
    model = PGFModel.continuous_poisson(1.0)
    frm = (0, -1)
    mc = mc_distribution(model, frm, 1.0, samples=200_000, seed=3)
    for target in [(0, -1), (1, -1), (1, 0), (2, 0)]:
        p, se = mc.estimate(target)
        assert abs(transition_probability(model, frm, target, 1.0) - p) < 4 * se + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.integers(1, 3))
def test_two_particle_probabilities_sum_to_one(p, t):
    model = PGFModel.bernoulli(p)
    frm = (0, -2)
    total = sum(transition_probability(model, frm, c, t) for c in reachable_targets(frm, t, 1))
    assert total == pytest.approx(1.0, abs=1e-10)
