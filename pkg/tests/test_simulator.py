import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tasep_pgf.errors import AssumptionError, ConfigError, DomainError
from tasep_pgf.pgf_model import PGFModel
from tasep_pgf.simulator import (
    block_rng,
    dynamics_for,
    height_event,
    height_function,
    inverse_position,
    reference_count,
    scaled_height,
    simulate,
    step_bernoulli,
    step_continuous,
    step_geometric_parallel,
)


class AlwaysJump:
    """Random source whose Bernoulli draws are all ones."""

    def random(self, shape):
        return np.zeros(shape)


def test_bernoulli_blocking_uses_new_leader_position():
    new = step_bernoulli(np.array([5, 4]), 0.5, AlwaysJump())
    assert new.tolist() == [6, 5]
    new = step_bernoulli(np.array([5, 4, 3]), 0.999999, AlwaysJump())
    assert new.tolist() == [6, 5, 4]


def test_parallel_update_blocks_by_old_position():
    class Ones:
        def geometric(self, p, size):
            return np.full(size, 2)

    assert step_geometric_parallel(np.array([5, 4]), 0.3, Ones()).tolist() == [6, 4]


def test_zero_duration_is_identity():
    rng = np.random.default_rng(0)
    assert step_continuous(np.array([3, 1, 0]), 1.0, 0.0, rng).tolist() == [3, 1, 0]


def test_dynamics_decomposition():
    assert [s.rule for s in dynamics_for(PGFModel.geometric(0.4))] == ["parallel"]
    subs = dynamics_for(PGFModel.discrete_pmf((0.42, 0.46, 0.12)))
    assert sorted(s.param for s in subs) == pytest.approx([0.3, 0.4])
    with pytest.raises(AssumptionError):
        dynamics_for(PGFModel.discrete_pmf((0.5, 0.0, 0.5)))


@pytest.mark.parametrize(
    "model,t,oracle",
    [
        (PGFModel.bernoulli(0.5), 4, lambda x: stats.binom.pmf(x, 4, 0.5)),
        (PGFModel.geometric(0.4), 3, lambda x: stats.nbinom.pmf(x, 3, 0.6)),
        (PGFModel.continuous_poisson(1.0), 2.0, lambda x: stats.poisson.pmf(x, 2.0)),
    ],
    ids=["bernoulli", "geometric", "poisson"],
)
def test_leading_particle_is_free(model, t, oracle):
    n = 200_000
    ens = simulate(model, (0, -1, -2), t, samples=n, seed=11)
    disp = ens.particle(1)
    for x in range(6):
        p = oracle(x)
        emp = np.mean(disp == x)
        assert abs(emp - p) < 4 * np.sqrt(p * (1 - p) / n) + 1e-12


def test_trailing_particle_does_not_affect_leader():
    model = PGFModel.continuous_poisson(1.0)
    a = simulate(model, (0,), 1.5, samples=100_000, seed=1).particle(1)
    b = simulate(model, (0, -1), 1.5, samples=100_000, seed=2).particle(1)
    se = np.sqrt(a.var() / a.size + b.var() / b.size)
    assert abs(a.mean() - b.mean()) < 4 * se


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["bernoulli", "geometric", "poisson", "pmf"]), st.integers(0, 2**32 - 1))
def test_order_is_preserved(kind, seed):
    model = {"bernoulli": PGFModel.bernoulli(0.7), "geometric": PGFModel.geometric(0.6),
             "poisson": PGFModel.continuous_poisson(2.0), "pmf": PGFModel.discrete_pmf((0.42, 0.46, 0.12))}[kind]
    ens = simulate(model, (0, -1, -2, -5), samples=64, seed=seed, times=(1, 2, 3, 5))
    assert np.all(np.diff(ens.positions, axis=2) < 0)


def test_determinism_and_worker_independence():
    model = PGFModel.geometric(0.4)
    a = simulate(model, (0, -1, -2), 3, samples=1000, seed=5, block_size=256)
    b = simulate(model, (0, -1, -2), 3, samples=1000, seed=5, block_size=256, workers=2)
    c = simulate(model, (0, -1, -2), 3, samples=1000, seed=6, block_size=256)
    assert np.array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


def test_block_streams_are_distinct():
    assert block_rng(1, 0).random() != block_rng(1, 1).random()
    assert block_rng(1, 0).random() == block_rng(1, 0).random()


def test_simulate_validation():
    with pytest.raises(ConfigError):
        simulate(PGFModel.bernoulli(0.5), (0, 1), 1)
    with pytest.raises(DomainError):
        simulate(PGFModel.bernoulli(0.5), (1, 0), 1.5)


def test_initial_height_is_pinned():
    step = tuple(-j for j in range(1, 30))
    h = height_function(step, reference_count(step))
    assert h.at_int(0) == 0
    assert [h.at_int(z) for z in range(-3, 4)] == [-3, -2, -1, 0, -1, -2, -3]


def test_height_increments_and_packed_region():
    ens = simulate(PGFModel.bernoulli(0.5), tuple(-j for j in range(1, 40)), 10, samples=20, seed=4)
    ref = reference_count(tuple(-j for j in range(1, 40)))
    for row in ens.positions[-1]:
        h = height_function(row, ref)
        w = h.window(-20, 10)
        assert set(np.diff(w).tolist()) <= {-1, 1}
    packed = height_function(tuple(range(10, -10, -1)), 1)
    assert np.all(np.diff(packed.window(-5, 5)) == 1)


def test_height_interpolates_half_integers():
    h = height_function((0, -2, -3), 1)
    assert h(-0.5) == pytest.approx(0.5 * (h.at_int(-1) + h.at_int(0)))


def test_height_window_outside_known_particles():
    with pytest.raises(DomainError):
        height_function((0, -1), 1).at_int(-5)


def test_height_position_duality_pathwise():
    initial = tuple(-2 * j for j in range(1, 40))
    ref = reference_count(initial)
    ens = simulate(PGFModel.geometric(0.4), initial, 6, samples=50, seed=9)
    rng = np.random.default_rng(0)
    for row in ens.positions[-1]:
        h = height_function(row, ref)
        for _ in range(20):
            z = int(rng.integers(-15, 10))
            s = int(rng.integers(-12, 12))
            n, m = height_event(z, s, ref)
            lhs = h.at_int(z) <= s
            rhs = True if n <= 0 else row[n - 1] >= m
            assert lhs == rhs


def test_scaled_height_at_time_zero():
    initial = tuple(-j for j in range(1, 400))
    h = height_function(initial, reference_count(initial))
    eps = 0.04
    f = scaled_height(PGFModel.continuous_poisson(1.0), h, eps, 0.0)
    for x in (-0.3, 0.0, 0.2):
        assert f(x) == pytest.approx(np.sqrt(eps) * h(2 * x / eps))


def test_inverse_position():
    assert inverse_position((5, 3, 0), 3) == 2
    assert inverse_position((5, 3, 0), 10) == 1
