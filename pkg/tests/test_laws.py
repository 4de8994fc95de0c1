import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzinet import laws
from mzinet.errors import AllocationError


def test_loss_model_total_efficiency():
    model = laws.LossModel(eta_dis=0.99, eta_mzi=0.89, eta_m=0.9999, K=5)
    assert model.eta_total == pytest.approx(0.99 * 0.89 * 0.9999**9, rel=1e-14)
    assert model.Lambda == pytest.approx(1 / model.eta_total - 1, rel=1e-14)


def test_loss_model_lambda_zero_iff_lossless():
    assert laws.LossModel().Lambda == 0.0
    assert laws.LossModel(eta_dis=0.999).Lambda > 0.0


def test_squeezed_resource_identity():
    res = laws.SqueezedResource(0.75)
    n_s = res.n_s
    assert res.var_q == pytest.approx(1 + 2 * n_s - 2 * math.sqrt(n_s + n_s**2),
                                      abs=1e-12)
    assert res.var_q * res.var_p == pytest.approx(1.0, rel=1e-12)


def test_squeezed_resource_from_photons_round_trip():
    res = laws.SqueezedResource.from_photons(0.68)
    assert res.n_s == pytest.approx(0.68, rel=1e-12)
    assert res.r == pytest.approx(laws.ns_to_r(0.68), rel=1e-14)


@given(st.floats(1e-9, 1e6))
@settings(deadline=None, max_examples=80)
def test_varq_identity_across_scales(n_s):
    r = laws.ns_to_r(n_s)
    assert abs(laws.varq_from_ns(n_s) - math.exp(-2 * r)) <= 1e-12


@given(st.floats(0.0, 15.0))
@settings(deadline=None, max_examples=80)
def test_ns_r_round_trip(r):
    assert laws.ns_to_r(laws.r_to_ns(r)) == pytest.approx(r, abs=1e-12)


def test_ns_to_r_known_point():
    assert laws.ns_to_r(0.68) == pytest.approx(0.7518, abs=1e-4)
    assert laws.ns_to_r(0.0) == 0.0
    assert laws.r_to_ns(0.75) == pytest.approx(math.sinh(0.75) ** 2, rel=1e-14)


def test_ns_to_r_rejects_negative():
    with pytest.raises(ValueError):
        laws.ns_to_r(-0.1)
    with pytest.raises(ValueError):
        laws.r_to_ns(-0.1)


def test_optimized_variance_squeezed_lossless():
    assert laws.optimized_variance(100, 0.75) == pytest.approx(
        math.exp(-1.5) / 100, rel=1e-12)


def test_optimized_variance_recovers_shot_noise():
    for k in (1, 2, 5):
        assert laws.optimized_variance(50, 0.0, Lambda=0.0, K=k) == pytest.approx(
            1 / (k * 50), rel=1e-12)


def test_optimized_variance_high_intensity_point():
    # K = 5 multipass at n_c = 2.7e16, caption efficiencies
    loss = laws.LossModel(0.99, 0.89, 0.9999, K=5)
    var = laws.optimized_variance(2.7e16, 0.75, Lambda=loss.Lambda, K=5)
    assert math.sqrt(var) == pytest.approx(1.63e-9, abs=0.005e-9)
    assert math.sqrt(var) / 1.4e-9 < 1.2


def test_optimized_variance_carries_weight_factor():
    nu = np.array([0.25, -0.25, 0.25, -0.25])
    assert laws.optimized_variance(100, 0.3, nu=nu) == pytest.approx(
        laws.optimized_variance(100, 0.3), rel=1e-12)


def test_optimized_variance_warns_on_unnormalized_weights():
    with pytest.warns(UserWarning):
        laws.optimized_variance(100, 0.3, nu=[1.0, 1.0])


def test_variance_vs_ns_no_squeezing():
    assert laws.variance_vs_ns(10, 0.0, Lambda=0.2, K=2) == pytest.approx(
        1.2 / 20, rel=1e-12)


def test_variance_vs_ns_half_split():
    value = laws.variance_vs_ns(100, 50)
    expected = (101 - 2 * math.sqrt(2550)) / 50
    assert value == pytest.approx(expected, rel=1e-12)
    # Heisenberg neighborhood: within a percent of 1/n_T^2
    assert value == pytest.approx(1e-4, rel=0.01)


def test_variance_vs_ns_rejects_exhausted_budget():
    with pytest.raises(AllocationError):
        laws.variance_vs_ns(10, 10)
    with pytest.raises(AllocationError):
        laws.variance_vs_ns(10, 12)


def test_min_variance_over_r_lossless():
    result = laws.min_variance_over_r(100)
    assert result.variance_asymptotic == pytest.approx(1e-4, rel=1e-12)
    assert result.n_s_asymptotic == pytest.approx(50, rel=1e-12)
    assert result.n_s_opt == pytest.approx(50, abs=0.5)
    assert result.variance <= result.variance_asymptotic + 1e-15


def test_min_variance_over_r_lossy_point():
    result = laws.min_variance_over_r(10, Lambda=0.1)
    assert result.variance_asymptotic == pytest.approx(
        (1 + math.sqrt(5)) ** 2 / 400, rel=1e-12)
    assert result.variance <= result.variance_asymptotic


def test_min_variance_over_r_small_budget():
    result = laws.min_variance_over_r(1e-3, Lambda=0.1)
    assert result.variance == pytest.approx(1.1 / 1e-3, rel=2e-3)
    assert result.n_s_opt == pytest.approx((1e-3 / 1.1) ** 2, rel=0.05)


def test_regime_limits_branches():
    limits = laws.regime_limits(0.01, Lambda=0.14, K=5)
    assert limits.low_n == pytest.approx(1.14 / 0.05, rel=1e-12)
    assert limits.active == "low-n"

    limits = laws.regime_limits(1e4, Lambda=1e-3)
    assert limits.loss_floor == pytest.approx(1e-7, rel=1e-12)
    assert limits.heisenberg == pytest.approx(1e-8, rel=1e-12)
    # crossover region: the numeric minimum lies between the two branches
    numeric = laws.min_variance_over_r(1e4, Lambda=1e-3).variance
    assert limits.heisenberg < numeric < limits.low_n


def test_regime_limits_lossless_has_no_floor():
    limits = laws.regime_limits(1e4, Lambda=0.0)
    assert limits.loss_floor == 0.0
    assert limits.active == "heisenberg"


def test_regime_consistency_with_numeric_minimum():
    # low-photon branch
    numeric = laws.min_variance_over_r(1e-3, Lambda=0.14).variance
    assert numeric == pytest.approx(laws.regime_limits(1e-3, 0.14).low_n, rel=0.02)
    # Heisenberg branch, lossless
    numeric = laws.min_variance_over_r(100, Lambda=0.0).variance
    assert numeric == pytest.approx(laws.regime_limits(100, 0.0).heisenberg, rel=0.02)
    # loss floor
    lam = 1e-3
    numeric = laws.min_variance_over_r(1e3 / lam, Lambda=lam).variance
    assert numeric == pytest.approx(
        laws.regime_limits(1e3 / lam, lam).loss_floor, rel=0.05)


def test_qcrb_values():
    assert laws.qcrb(100, 0.0) == pytest.approx(0.01, rel=1e-12)
    expected = 1 / (1e6 * math.exp(1.5) + math.sinh(0.75) ** 2)
    assert laws.qcrb(1e6, 0.75) == pytest.approx(expected, rel=1e-14)
    assert laws.qcrb(0.0, 0.75, K=2) == pytest.approx(
        1 / (2 * math.sinh(0.75) ** 2), rel=1e-14)


def test_qcrb_rejects_empty_probe():
    with pytest.raises(ValueError):
        laws.qcrb(0.0, 0.0)


@given(
    n_c=st.floats(1.0, 1e8),
    r=st.floats(0.0, 2.0),
    lam=st.floats(0.0, 1.0),
)
@settings(deadline=None, max_examples=100)
def test_bound_ordering(n_c, r, lam):
    assert laws.optimized_variance(n_c, r, Lambda=lam) >= laws.qcrb(n_c, r) - 1e-12


def test_qcrb_saturation_rate():
    for n_c in (1e4, 1e6, 1e8):
        for r in (0.2, 0.75, 1.0):
            ratio = laws.optimized_variance(n_c, r) / laws.qcrb(n_c, r)
            margin = 10 * math.sinh(r) ** 2 * math.exp(-2 * r) / n_c
            assert ratio - 1 < margin


def test_gain_average_weights_equals_d():
    for d in range(1, 65):
        nu = np.full(d, 1.0 / d)
        assert laws.gain(nu, "low") == pytest.approx(d, rel=1e-12)


def test_gain_single_phase_is_one():
    assert laws.gain([1.0, 0.0, 0.0], "low") == pytest.approx(1.0)
    assert laws.gain([0.3, -0.2], "high") == 1.0


def test_gain_two_node_example():
    assert laws.gain([0.5, 0.5], "low") == pytest.approx(2.0, rel=1e-12)


def test_gain_scale_invariant():
    nu = np.array([0.6, -0.3, 0.1])
    assert laws.gain(nu, "low") == pytest.approx(laws.gain(nu * 7.3, "low"), rel=1e-12)


def test_gain_rejects_zero_weights():
    with pytest.raises(ValueError):
        laws.gain([0.0, 0.0])


def test_scaling_with_d():
    v6 = laws.scaling_with_d(4.5e15, 6, 0.75, Lambda=0.14, K=5)
    assert v6 == pytest.approx(2.69e-18, rel=2e-3)
    v3 = laws.scaling_with_d(4.5e15, 3, 0.75, Lambda=0.14, K=5)
    assert v3 / v6 == pytest.approx(2.0, rel=1e-12)
    assert math.sqrt(v3 / v6) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert laws.scaling_with_d(100, 1, 0.3, Lambda=0.1) == pytest.approx(
        laws.optimized_variance(100, 0.3, Lambda=0.1), rel=1e-12)


def test_db_below_sql_values():
    assert laws.db_below_sql(0.0, 0.0) == 0.0
    assert laws.db_below_sql(0.75, 0.136) == pytest.approx(
        -10 * math.log10(math.exp(-1.5) + 0.136), rel=1e-12)
    # caption efficiencies land inside the reported band
    lam = laws.LossModel(0.99, 0.89, 0.9999, K=1).Lambda
    db = laws.db_below_sql(0.75, lam)
    assert 4.36 - 0.35 <= db <= 4.36 + 0.35


@given(st.floats(0.01, 3.0))
@settings(deadline=None, max_examples=60)
def test_db_break_even_loss(r):
    assert abs(laws.db_below_sql(r, 1 - math.exp(-2 * r))) <= 1e-12


def test_sensitivity_report_consistency():
    report = laws.SensitivityReport.build(
        variance=2e-4, sql=1e-2, qcrb_value=1e-4, regime="heisenberg")
    assert report.std == pytest.approx(math.sqrt(2e-4))
    assert report.db_vs_sql == pytest.approx(10 * math.log10(50), abs=1e-9)
    assert report.variance >= report.qcrb - 1e-12
