import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tasep_pgf.errors import AssumptionError, ConfigError, DomainError
from tasep_pgf.pgf_model import (
    PGFModel,
    bernoulli_factors,
    check_assumption_imas,
    check_assumption_limcon,
    condi10,
    eval_gamma,
    eval_M,
    gamma_derivs,
    load_model,
    model_from_dict,
    model_report,
    moment_gamma_derivs,
    scaling_coeffs,
    series_coefficients,
)


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0, 5.0])
def test_poisson_gamma_derivatives(beta):
    gd = gamma_derivs(PGFModel.continuous_poisson(beta))
    assert gd.g1 == pytest.approx(-beta / 2, abs=1e-12)
    assert gd.g2 == pytest.approx(beta**2 / 4, abs=1e-12)
    assert gd.g3 == pytest.approx(-(beta**3) / 8, abs=1e-12)
    assert gd.denom == pytest.approx(beta, abs=1e-12)


@pytest.mark.parametrize("beta", [0.25, 1.0, 2.0, 5.0])
def test_poisson_scaling_coefficients(beta):
    sc = scaling_coeffs(PGFModel.continuous_poisson(beta))
    assert sc.D == pytest.approx(2 / beta, abs=1e-12)
    assert sc.E == pytest.approx(0.5, abs=1e-12)
    assert sc.F == pytest.approx(0.5, abs=1e-12)
    assert sc.drift == pytest.approx(1.0, abs=1e-12)


def test_closed_forms_match_factorial_moments():
    for model in (PGFModel.bernoulli(0.3), PGFModel.geometric(0.4), PGFModel.continuous_poisson(1.7)):
        a, b = gamma_derivs(model), moment_gamma_derivs(model)
        assert (a.g1, a.g2, a.g3) == pytest.approx((b.g1, b.g2, b.g3), abs=1e-11)


def test_gamma_derivatives_by_finite_differences():
    model = PGFModel.geometric(0.3)
    h = 1e-3
    f = lambda x: float(np.real(eval_gamma(model, x)))
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h) - 2 * f(0) + f(-h)) / h**2
    gd = gamma_derivs(model)
    assert d1 == pytest.approx(gd.g1, rel=1e-5)
    assert d2 == pytest.approx(gd.g2, rel=1e-5)


@pytest.mark.parametrize("p", np.arange(1, 10) / 10)
def test_w4_cubic_combination_closed_form(p):
    m_half = 1 - p + p / 16
    want = p * (1 - p) * (23 * p - 16) / (16 * m_half**3)
    assert gamma_derivs(PGFModel.discrete_pmf((1 - p, 0, 0, 0, p))).denom == pytest.approx(want, abs=1e-12)


def test_w4_sign_change_and_rejection():
    lo = PGFModel.discrete_pmf((1 - (16 / 23 - 1e-4), 0, 0, 0, 16 / 23 - 1e-4))
    hi = PGFModel.discrete_pmf((1 - (16 / 23 + 1e-4), 0, 0, 0, 16 / 23 + 1e-4))
    assert not check_assumption_imas(lo).passed
    assert check_assumption_imas(hi).passed
    with pytest.raises(AssumptionError):
        scaling_coeffs(lo)


def test_series_coefficients_match_scipy():
    c = series_coefficients(PGFModel.continuous_poisson(2.0)).coeffs
    assert np.allclose(c, stats.poisson.pmf(np.arange(len(c)), 2.0), atol=1e-14)
    assert 1 - c.sum() < 1e-13
    c = series_coefficients(PGFModel.geometric(0.4)).coeffs
    assert np.allclose(c, stats.geom.pmf(np.arange(len(c)) + 1, 0.6), atol=1e-14)
    assert series_coefficients(PGFModel.bernoulli(0.3)).coeffs == pytest.approx([0.7, 0.3])


def test_compound_poisson_series():
    # jumps of size 1 or 2 with equal weight, total rate 2
    model = PGFModel.continuous_poisson(2.0, (0.0, 0.5, 0.5))
    c = series_coefficients(model).coeffs
    w = 0.37
    assert np.sum(c * w ** np.arange(len(c))) == pytest.approx(math.exp(2 * (0.5 * w + 0.5 * w * w - 1)))


@given(st.floats(0.01, 0.99))
def test_scaling_identities_bernoulli(p):
    gd = gamma_derivs(PGFModel.bernoulli(p))
    sc = scaling_coeffs(PGFModel.bernoulli(p))
    assert sc.E + sc.F == pytest.approx(-gd.g1 * sc.D, abs=1e-9)
    assert sc.G == pytest.approx(sc.F - sc.E, abs=1e-9)
    assert gd.curvature >= -1e-12


@given(st.floats(0.01, 0.95))
def test_scaling_identities_geometric(alpha):
    sc = scaling_coeffs(PGFModel.geometric(alpha))
    assert sc.D > 0
    assert sc.drift == pytest.approx(2 * sc.E)


def test_geometric_pgf_and_domain():
    model = PGFModel.geometric(0.4)
    assert complex(eval_M(model, 0.5)) == pytest.approx(0.6 / 0.8)
    assert model.radius == pytest.approx(2.5)
    with pytest.raises(DomainError):
        eval_M(model, 3.0)


def test_condi10_at_pi_for_unit_poisson():
    # E log 3 + D log|M(-1/2)/M(1/2)| = log(3)/2 + 2 * (-1)
    got = float(condi10(PGFModel.continuous_poisson(1.0), math.pi))
    assert got == pytest.approx(0.5 * math.log(3) - 2, abs=1e-12)


def test_contour_conditions_hold_for_builtin_models(builtin_model):
    rep = check_assumption_limcon(builtin_model, 512)
    assert rep.passed
    assert rep.max_condi10 < -1e-3 and rep.max_condi11 < -1e-3


def test_contour_conditions_rejects_small_grid():
    with pytest.raises(ConfigError):
        check_assumption_limcon(PGFModel.bernoulli(0.5), 16)


def test_bernoulli_factors_of_product():
    qs = bernoulli_factors(PGFModel.discrete_pmf((0.42, 0.46, 0.12)))
    assert sorted(qs) == pytest.approx([0.3, 0.4])
    # complex roots: cannot be realized by Bernoulli substeps
    assert bernoulli_factors(PGFModel.discrete_pmf((0.5, 0.0, 0.5))) is None


def test_model_schema_round_trip(tmp_path):
    for model in (PGFModel.continuous_poisson(1.5), PGFModel.bernoulli(0.2), PGFModel.geometric(0.3),
                  PGFModel.discrete_pmf((0.2, 0.3, 0.5))):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(model.to_dict()))
        assert load_model(path) == model
    with pytest.raises(ConfigError):
        model_from_dict({"kind": "bernoulli", "params": {"p": 1.5}})
    with pytest.raises(ConfigError):
        model_from_dict({"kind": "geometric"})


def test_unnormalized_pmf_rejected():
    with pytest.raises(ConfigError):
        PGFModel.discrete_pmf((0.5, 0.6))


def test_model_report_for_unit_poisson():
    rep = model_report(PGFModel.continuous_poisson(1.0))
    assert rep["gamma_derivs"]["denom"] == pytest.approx(1.0)
    assert rep["cubic_positivity"]["passed"] and rep["contour_conditions"]["passed"]
    assert rep["normalization"]["sum"] == pytest.approx(1.0, abs=1e-12)
