import math
from fractions import Fraction

import numpy as np
import pytest

from analysis import (
    achievable_rate_formula,
    converse_dof,
    desk_secrecy_rate,
    dof_slope,
    main_term_dof,
    per_user_dof,
    positive_rate_threshold,
    rate_grid,
    secrecy_rate_bound,
)
from errors import InvalidArgument, InvalidConfiguration


class TestConverse:
    @pytest.mark.parametrize("K,expected", [(2, Fraction(2, 3)), (3, Fraction(6, 5)), (4, Fraction(12, 7))])
    def test_values(self, K, expected):
        assert converse_dof(K) == expected

    def test_rejects_single_user(self):
        with pytest.raises(InvalidConfiguration):
            converse_dof(1)


class TestAchievableRate:
    @pytest.mark.parametrize("K", range(2, 11))
    def test_limit_reaches_converse(self, K):
        report = achievable_rate_formula(K, 10**6, 1e-6, 1e4)
        assert report.dof_coefficient == pytest.approx(float(converse_dof(K)), rel=1e-4)

    def test_named_limits(self):
        assert achievable_rate_formula(2, 10**6, 1e-6, 1e4).dof_coefficient == pytest.approx(2 / 3, rel=1e-4)
        assert achievable_rate_formula(3, 10**6, 1e-6, 1e4).dof_coefficient == pytest.approx(1.2, rel=1e-4)

    @pytest.mark.parametrize("K", [2, 3, 5])
    def test_never_exceeds_converse(self, K):
        for report in rate_grid(K, [1, 2, 3, 5, 10, 100, 1000, 10**6], 1e-6, [1e2, 1e4, 1e8]):
            assert report.dof_coefficient <= report.converse_dof + 1e-12

    def test_rate_scales_with_log_power(self):
        low = achievable_rate_formula(3, 100, 0.01, 1e4)
        high = achievable_rate_formula(3, 100, 0.01, 1e8)
        assert high.per_user_rate_bits == pytest.approx(2 * low.per_user_rate_bits)
        assert low.sum_rate_bits == pytest.approx(3 * low.per_user_rate_bits)

    def test_increasing_in_m(self):
        coefficients = [r.dof_coefficient for r in rate_grid(3, [1, 10, 100, 1000], 0.01, [1e4])]
        assert coefficients == sorted(coefficients)
        assert coefficients[-1] < 1.2

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_shrinking_delta_closes_the_gap(self, K):
        # delta = 1/m along a geometric grid of m
        converse = float(converse_dof(K))
        gaps = [
            converse - achievable_rate_formula(K, m, 1 / m, 1e4).dof_coefficient
            for m in (10, 100, 10**3, 10**4, 10**5, 10**6)
        ]
        assert all(gap >= -1e-12 for gap in gaps)
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[-1] < 1e-3 * converse

    def test_floored_at_zero(self):
        report = achievable_rate_formula(2, 2, 0.0, 1e4)
        assert per_user_dof(2, 2, 0.0) < 0
        assert report.per_user_rate_bits == 0.0

    def test_main_term(self):
        K, m = 2, 1
        assert main_term_dof(K, m, 0.0) == pytest.approx((K - 1) / (K - 1 + K * 2 ** (K * K + 1)))

    @pytest.mark.parametrize("kwargs", [dict(K=1, m=1), dict(K=2, m=0), dict(K=2, m=1, delta=1.0), dict(K=2, m=1, P=1.0)])
    def test_invalid(self, kwargs):
        args = dict(K=2, m=1, delta=0.1, P=100.0)
        args.update(kwargs)
        with pytest.raises(InvalidConfiguration):
            achievable_rate_formula(**args)


class TestThreshold:
    def test_two_users(self):
        assert positive_rate_threshold(2) == 4

    @pytest.mark.parametrize("K", [2, 3, 4, 6])
    def test_threshold_separates_sign(self, K):
        m = positive_rate_threshold(K)
        assert per_user_dof(K, m, 0.0) > 0
        if m > 1:
            assert per_user_dof(K, m - 1, 0.0) <= 0


class TestSecrecyRate:
    def test_subtracts_worst_leak(self):
        assert secrecy_rate_bound(5.0, [1.0, 2.5, 0.5]) == pytest.approx(2.5)

    def test_clamped(self):
        assert secrecy_rate_bound(1.0, [3.0]) == 0.0

    def test_negative_input(self):
        with pytest.raises(InvalidArgument):
            secrecy_rate_bound(-1.0, [0.0])

    def test_desk_rate_two_users(self):
        rate = desk_secrecy_rate(2, 1, 1, message=1)
        # H(V_1) = log2 3, Fano drops 1 bit, receiver 2 learns log2 3
        assert rate.mi_main_bits == pytest.approx(math.log2(3) - 1)
        assert rate.leakage_bits[2] == pytest.approx(math.log2(3))
        assert rate.leakage_bits[0] == pytest.approx(math.log2(3))
        assert rate.secrecy_rate_bits == 0.0
        # equal leaks: the lowest observer index is reported
        assert rate.worst_observer == 0

    def test_desk_rate_reuses_leaks(self):
        rate = desk_secrecy_rate(2, 1, 2, message=1, leaks={0: 0.1, 2: 0.2})
        assert rate.secrecy_rate_bits == pytest.approx(max(0.0, math.log2(5) - 1 - 0.2))

    @pytest.mark.parametrize(
        "model,observers",
        [("ee", [0]), ("cm", [2]), ("cm-ee", [0, 2])],
    )
    def test_desk_rate_per_model(self, model, observers):
        rate = desk_secrecy_rate(2, 2, 1, message=1, model=model)
        assert sorted(rate.leakage_bits) == observers
        worst = max(rate.leakage_bits.values())
        assert rate.secrecy_rate_bits == pytest.approx(max(0.0, rate.mi_main_bits - worst))

    def test_cm_model_ignores_eavesdropper_leak(self):
        rate = desk_secrecy_rate(2, 1, 2, message=1, leaks={0: 5.0, 2: 0.2}, model="cm")
        assert rate.leakage_bits == {2: 0.2}
        assert rate.secrecy_rate_bits == pytest.approx(max(0.0, math.log2(5) - 1 - 0.2))

    def test_measured_error_rate(self):
        rate = desk_secrecy_rate(2, 1, 1, message=2, rng=np.random.default_rng(0), trials=20)
        assert rate.pe == 0.0
        assert rate.mi_main_bits == pytest.approx(math.log2(3) - 1)
        assert desk_secrecy_rate(2, 1, 1, message=1, pe=0.5).pe == 0.5


class TestSlope:
    def test_linear_samples(self):
        samples = [(p, 0.8 * 0.5 * math.log2(p) + 1.0) for p in (1e2, 1e3, 1e4, 1e5)]
        assert dof_slope(samples) == pytest.approx(0.8)

    def test_needs_three_points(self):
        with pytest.raises(InvalidArgument):
            dof_slope([(10.0, 1.0), (100.0, 2.0)])

    def test_duplicate_powers(self):
        with pytest.raises(InvalidArgument):
            dof_slope([(10.0, 1.0), (10.0, 2.0), (100.0, 3.0)])
