import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tasep_pgf.coeffx import Sbar_kernel
from tasep_pgf.errors import ConfigError
from tasep_pgf.pathkernel import (
    InitialCondition,
    Q_pow,
    Sbar_epi,
    assemble_Kt,
    event_probability,
    joint_probability,
    rw_hitting_law,
)
from tasep_pgf.pgf_model import PGFModel
from tasep_pgf.transition import brute_force_distribution

EVENTS = [((1,), (-1,)), ((3,), (-3,)), ((1, 3), (0, -3)), ((2, 3), (-2, -4)), ((1, 2), (1, -1))]


def test_initial_condition_constructors():
    assert InitialCondition.step(3).positions == (-1, -2, -3)
    assert InitialCondition.half_flat(2).positions == (-2, -4)
    assert InitialCondition.step(2).X0(0) == math.inf
    with pytest.raises(ConfigError):
        InitialCondition((0, 0))
    with pytest.raises(ConfigError):
        InitialCondition.step(2).X0(3)
    with pytest.raises(ConfigError):
        InitialCondition.wedge(0.25, 3.0, 5)


def test_wedge_barrier_profile():
    eps, slope = 0.01, 1.0
    ic = InitialCondition.wedge(eps, slope, 200)
    for m in (10, 50, 150):
        g = math.sqrt(eps) * (ic.X0(m + 1) + 2 * m + 1)
        assert g == pytest.approx(slope * eps * m, abs=math.sqrt(eps))


def test_Q_pow_matches_matrix_power():
    size = 30
    Q = np.array([[2.0 ** -(x - y) if x > y else 0.0 for y in range(size)] for x in range(size)])
    Q3 = np.linalg.matrix_power(Q, 3)
    for x in range(0, size, 7):
        for y in range(0, size, 5):
            assert Q_pow(3, x, y) == pytest.approx(Q3[x, y], abs=1e-15)


def test_hitting_law_against_simulation():
    ic = InitialCondition((0, -3, -6, -10, -15, -20))
    law = rw_hitting_law(ic, -1, 5)
    assert len(law.entries()) > 4
    rng = np.random.default_rng(1)
    n = 200_000
    counts = {}
    pos = np.full(n, -1)
    alive = np.ones(n, bool)
    for m in range(5):
        hit = alive & (pos > ic.X0(m + 1))
        for y in np.unique(pos[hit]):
            counts[(m, int(y))] = counts.get((m, int(y)), 0) + int(np.sum(hit & (pos == y)))
        alive &= ~hit
        pos = pos - rng.geometric(0.5, size=n)
    for m, y, p in law.entries():
        emp = counts.get((m, y), 0) / n
        assert abs(emp - p) < 4 * math.sqrt(p * (1 - p) / n) + 1e-12
    # mass below the exact floor can never hit; everything is accounted for
    assert law.total + law.survival + law.lost == pytest.approx(1.0, abs=1e-14)
    assert sum(counts.values()) / n == pytest.approx(law.total, abs=4 * math.sqrt(law.total / n))


def test_step_initial_data_never_hits_from_below():
    ic = InitialCondition.step(5)
    assert rw_hitting_law(ic, -2, 2).total == 0.0
    law = rw_hitting_law(ic, 0, 3)
    assert law.entries() == [(0, 0, 1.0)]


@pytest.mark.parametrize("y", [-3, -1, 0, 2])
def test_step_hitting_kernel_is_indicator_times_sbar(y):
    model = PGFModel.bernoulli(0.5)
    ic = InitialCondition.step(10)
    want = Sbar_kernel(model, 4, 6, y, 1) if y >= 0 else 0.0
    assert Sbar_epi(model, ic, 4, 6, y, 1) == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize("model", [PGFModel.bernoulli(0.5), PGFModel.discrete_pmf((0.42, 0.46, 0.12))],
                         ids=["bern", "pmf"])
@pytest.mark.parametrize("frm", [(-1, -2, -3), (0, -2, -5)])
@pytest.mark.parametrize("t", [1, 2, 3])
def test_fredholm_matches_enumeration(model, frm, t):
    dist = brute_force_distribution(model, frm, t)
    ic = InitialCondition(frm)
    for ns, a in EVENTS:
        res = joint_probability(model, ic, t, ns, a)
        assert res.raw == pytest.approx(event_probability(dist, ns, a), abs=1e-7)
        assert -1e-8 <= res.raw <= 1 + 1e-8
        assert res.depth_report["difference"] < 1e-8


def test_fredholm_geometric_model():
    model = PGFModel.geometric(0.3)
    frm = (0, -1, -3)
    dist = brute_force_distribution(model, frm, 2)
    for ns, a in [((1,), (1,)), ((1, 3), (0, -2))]:
        assert joint_probability(model, InitialCondition(frm), 2, ns, a).raw == pytest.approx(
            event_probability(dist, ns, a), abs=1e-9)


def test_kernel_depth_beyond_exact_range_changes_nothing():
    model = PGFModel.bernoulli(0.5)
    ic = InitialCondition((-1, -2, -3))
    base = joint_probability(model, ic, 2, (1, 3), (0, -3))
    deeper = joint_probability(model, ic, 2, (1, 3), (0, -3), depth=base.depth_report["exact_depth"] - 10)
    assert deeper.raw == pytest.approx(base.raw, abs=1e-13)


def test_joint_probability_validation():
    model = PGFModel.bernoulli(0.5)
    ic = InitialCondition((-1, -2, -3))
    with pytest.raises(ConfigError):
        joint_probability(model, ic, 1, (3, 1), (0, 0))
    with pytest.raises(ConfigError):
        joint_probability(model, ic, 1, (1, 5), (0, 0))
    with pytest.raises(ConfigError):
        joint_probability(model, ic, 1, (1,), (0, 0))


@settings(max_examples=15, deadline=None)
@given(st.integers(-4, 2), st.integers(-6, 0))
def test_joint_probability_is_monotone_in_threshold(a1, a3):
    model = PGFModel.bernoulli(0.5)
    ic = InitialCondition((-1, -2, -3))
    lo = joint_probability(model, ic, 2, (1, 3), (a1, a3)).raw
    hi = joint_probability(model, ic, 2, (1, 3), (a1 - 1, a3)).raw
    assert hi >= lo - 1e-12
