"""Metric aggregation tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copolicy import ReplicationRecord, classify_bias, summarize
from copolicy.errors import EmptyInput, InvalidConfig, MixedTruths


def rec(est, truth, se=0.1, ci=None, p=0.5):
    lo, hi = ci if ci else (est - 1.0, est + 1.0)
    return ReplicationRecord(estimate=est, se=se, ci_low=lo, ci_high=hi, p_value=p, truth=truth)


class TestSummarize:
    def test_hand_arithmetic_example(self):
        records = [rec(-1.2, -1.0), rec(-0.8, -1.0)]
        m = summarize(records, truth_is_null=False)
        assert m.bias == pytest.approx(0.0, abs=1e-15)
        assert m.rel_bias_pct == pytest.approx(0.0, abs=1e-13)
        assert m.rmse == pytest.approx(np.sqrt((0.04 + 0.04) / 2))
        assert m.rmse == pytest.approx(0.2)

    def test_full_coverage_when_cis_contain_truth(self):
        records = [rec(e, -1.0, ci=(-2.0, 0.0)) for e in (-1.2, -0.9, -1.0)]
        assert summarize(records, truth_is_null=False).coverage == 1.0

    def test_type_s_one_in_hundred(self):
        records = [rec(-1.0, -1.0, ci=(-1.5, -0.5)) for _ in range(99)]
        records.append(rec(1.0, -1.0, ci=(0.5, 1.5)))
        m = summarize(records, truth_is_null=False)
        assert m.typeS_rate == pytest.approx(0.01)

    def test_type1_counts_small_p(self):
        records = [rec(0.1, 0.0, p=0.2), rec(-0.1, 0.0, p=0.01),
                   rec(0.0, 0.0, p=0.04), rec(0.2, 0.0, p=0.9)]
        m = summarize(records, truth_is_null=True, sd_scale=2.0)
        assert m.type1_rate == pytest.approx(0.5)
        assert m.typeS_rate is None
        assert m.rel_bias_pct is None

    def test_std_bias_scale(self):
        records = [rec(0.5, 0.0), rec(0.3, 0.0)]
        m = summarize(records, truth_is_null=True, sd_scale=2.0)
        assert m.std_bias == pytest.approx(0.2)
        assert m.bias == pytest.approx(0.4)

    def test_rel_bias_sign_convention(self):
        # truth -1, mean estimate -1.2: overestimated in the truth's
        # direction -> positive relative bias.
        records = [rec(-1.2, -1.0), rec(-1.2, -1.0)]
        m = summarize(records, truth_is_null=False)
        assert m.rel_bias_pct == pytest.approx(20.0)

    def test_exact_estimates_zero_error(self):
        records = [rec(-1.0, -1.0, ci=(-1.5, -0.5)) for _ in range(5)]
        m = summarize(records, truth_is_null=False)
        assert m.bias == 0.0 and m.rmse == 0.0 and m.coverage == 1.0

    def test_rmse_identity(self):
        rng = np.random.default_rng(2)
        records = [rec(e, -1.0) for e in rng.normal(-1.1, 0.4, size=501)]
        m = summarize(records, truth_is_null=False)
        n = m.n_reps
        assert m.rmse**2 == pytest.approx(m.var_empirical * (n - 1) / n + m.bias**2, abs=1e-10)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        records = [rec(e, -1.0, se=s, p=p) for e, s, p in
                   zip(rng.normal(-1, 0.3, 100), rng.uniform(0.05, 0.5, 100), rng.uniform(0, 1, 100))]
        m1 = summarize(records, truth_is_null=False)
        m2 = summarize(list(reversed(records)), truth_is_null=False)
        assert m1 == m2

    def test_exact_rational_rates(self):
        records = [rec(0.0, 0.0, p=0.01 if i < 3 else 0.5) for i in range(8)]
        m = summarize(records, truth_is_null=True, sd_scale=1.0)
        assert m.type1_rate == 3 / 8

    def test_var_model_is_mean_squared_se(self):
        records = [rec(-1.0, -1.0, se=0.1), rec(-1.0, -1.0, se=0.3)]
        m = summarize(records, truth_is_null=False)
        assert m.var_model == pytest.approx((0.01 + 0.09) / 2)

    def test_errors(self):
        with pytest.raises(EmptyInput):
            summarize([], truth_is_null=False)
        with pytest.raises(EmptyInput):
            summarize([rec(0.0, 0.0)], truth_is_null=True, sd_scale=1.0)
        with pytest.raises(MixedTruths):
            summarize([rec(-1.0, -1.0), rec(-1.0, -2.0)], truth_is_null=False)
        with pytest.raises(InvalidConfig):
            summarize([rec(0.0, 0.0), rec(0.0, 0.0)], truth_is_null=True)  # no sd_scale

    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=200))
    @settings(max_examples=100, deadline=None)
    def test_rmse_identity_property(self, ests):
        records = [rec(e, -1.0) for e in ests]
        m = summarize(records, truth_is_null=False)
        n = len(ests)
        assert abs(m.rmse**2 - (m.var_empirical * (n - 1) / n + m.bias**2)) < 1e-10
        assert 0.0 <= m.coverage <= 1.0
        assert 0.0 <= m.typeS_rate <= 1.0


class TestClassifyBias:
    @pytest.mark.parametrize("value,label", [
        (82.3, "large"), (-7.0, "small"), (0.0, "none"), (4.99, "none"),
        (5.0, "small"), (10.0, "moderate"), (20.0, "large"), (-20.0, "large"),
        (19.99, "moderate"),
    ])
    def test_non_null_bands(self, value, label):
        assert classify_bias(value, "non_null") == label

    @pytest.mark.parametrize("value,label", [
        (0.0, "none"), (0.19, "none"), (0.2, "moderate"), (0.39, "moderate"),
        (0.4, "large"), (-0.5, "large"),
    ])
    def test_null_bands(self, value, label):
        assert classify_bias(value, "null") == label

    def test_unknown_regime(self):
        with pytest.raises(InvalidConfig):
            classify_bias(1.0, "weird")
