import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hetcov.model import (
    CLOSED,
    ConnectivityModel,
    CoverageReport,
    FadingDistribution,
    HetNetScenario,
    ScenarioError,
    TierConfig,
    average_power_biases,
    db_to_linear,
    fading_moment,
    gamma_factor,
    linear_to_db,
    require_valid,
    validate_scenario,
)

from conftest import two_tier


def quad_moment(dist, s):
    """E[psi^s] by direct quadrature of the density."""
    if dist.kind == "exponential":
        m = dist.param
        f = lambda x: x ** s * math.exp(-x / m) / m
        return integrate.quad(f, 0, math.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    if dist.kind == "lognormal_db":
        sg = dist.param * math.log(10) / 10
        f = lambda x: math.exp(s * sg * x - x * x / 2) / math.sqrt(2 * math.pi)
        return integrate.quad(f, -40, 40, epsabs=0, epsrel=1e-12, limit=200)[0]
    return dist.param ** s


def test_exponential_moment_value():
    assert fading_moment(FadingDistribution.exponential(1.0), 2 / 3) == pytest.approx(0.9027453, abs=1e-7)


def test_constant_moment_is_one():
    for s in (0.1, 0.5, 1.0):
        assert fading_moment(FadingDistribution.constant(1.0), s) == 1.0


def test_lognormal_moment_value():
    # exp(s^2 sigma_ln^2 / 2) with sigma_ln = 6 ln(10) / 10
    expected = math.exp((4 / 9) * 1.381551 ** 2 / 2)
    assert fading_moment(FadingDistribution.lognormal_db(6), 2 / 3) == pytest.approx(expected, rel=1e-6)
    assert expected == pytest.approx(1.5283, abs=1e-4)


def test_exp230_does_not_match_lognormal6():
    ln = fading_moment(FadingDistribution.lognormal_db(6), 2 / 3)
    ex = fading_moment(FadingDistribution.exponential(230), 2 / 3)
    assert ex == pytest.approx(33.9, abs=0.05)
    assert ex / ln > 20


@pytest.mark.parametrize("dist", [
    FadingDistribution.exponential(1.0),
    FadingDistribution.exponential(3.5),
    FadingDistribution.lognormal_db(6),
    FadingDistribution.lognormal_db(0),
    FadingDistribution.constant(2.0),
])
@pytest.mark.parametrize("s", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_moment_matches_quadrature(dist, s):
    assert fading_moment(dist, s) == pytest.approx(quad_moment(dist, s), rel=1e-8)


@pytest.mark.parametrize("s", [0.0, -0.1, 1.01])
def test_moment_domain(s):
    with pytest.raises(ValueError):
        fading_moment(FadingDistribution.exponential(), s)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.05, 1.0))
def test_moment_scales_with_mean(m, c, s):
    a = fading_moment(FadingDistribution.exponential(m * c), s)
    b = fading_moment(FadingDistribution.exponential(m), s)
    assert a == pytest.approx(c ** s * b, rel=1e-12)


@pytest.mark.parametrize("kind,param", [("exponential", 0), ("exponential", -1), ("constant", 0),
                                        ("lognormal_db", -1), ("rayleigh", 1)])
def test_bad_fading_rejected(kind, param):
    with pytest.raises(ValueError):
        FadingDistribution(kind, param)


def test_gamma_factor():
    assert gamma_factor(1) == 2
    assert gamma_factor(0.5) == 3
    assert gamma_factor(1e12) == pytest.approx(1.0)
    for bad in (0, -1):
        with pytest.raises(ValueError):
            gamma_factor(bad)


def test_db_round_trip():
    assert db_to_linear(10) == pytest.approx(10)
    assert linear_to_db(100) == pytest.approx(20)
    assert db_to_linear(1) == pytest.approx(1.2589254)


def test_valid_two_tier():
    assert validate_scenario(two_tier()) == []


def test_pathloss_two_rejected():
    sc = HetNetScenario((TierConfig(1, 1, 2.0),))
    assert "pathloss_exp must exceed 2" in " ".join(validate_scenario(sc))
    with pytest.raises(ScenarioError):
        require_valid(sc)


def test_no_open_tier():
    msgs = validate_scenario(HetNetScenario(()))
    assert any("at least one open tier" in m for m in msgs)


def test_collects_all_violations():
    sc = HetNetScenario((TierConfig(-1, 0, 1.5),), (), -1)
    assert len(validate_scenario(sc)) >= 4


def test_closed_tier_access_flag():
    sc = HetNetScenario((TierConfig(1, 1, 4),), (TierConfig(1, 1, 4, access=CLOSED),))
    assert validate_scenario(sc) == []


def test_mbrp_bias_length():
    m = ConnectivityModel.mbrp([1.0])
    with pytest.raises(ValueError):
        m.check_against(two_tier())
    with pytest.raises(ValueError):
        ConnectivityModel.mbrp([0.0])
    with pytest.raises(ValueError):
        ConnectivityModel("strongest")


def test_average_power_biases():
    sc = two_tier()
    assert average_power_biases(sc) == pytest.approx((1 / 25, 1.0))


def test_report_bounds():
    with pytest.raises(ValueError):
        CoverageReport(1.2, "analytic")
    with pytest.raises(ValueError):
        CoverageReport(0.5, "analytic", stderr=-1)
    r = CoverageReport(0.5, "analytic", tier_serving_prob=[0.2, 0.3])
    assert isinstance(r.probability, float)


def test_scenario_is_hashable_value():
    a, b = two_tier(), two_tier()
    assert a == b and hash(a) == hash(b)
