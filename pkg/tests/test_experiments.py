import math

import numpy as np
import pytest

from dimensions import closed_form_sizes
from errors import InvalidConfiguration
from experiments import (
    chunk_sizes,
    derive_rng,
    distinctness_checks,
    leakage_sweep,
    operating_points,
    simulate_error_rate,
    simulate_pam_rate,
)


class TestSeeding:
    def test_same_key_same_stream(self):
        assert derive_rng(5, 1, 2).integers(0, 10**9) == derive_rng(5, 1, 2).integers(0, 10**9)

    def test_keys_are_independent(self):
        draws = {derive_rng(5, p, c).integers(0, 2**62) for p in range(3) for c in range(3)}
        assert len(draws) == 9

    def test_chunk_sizes(self):
        assert chunk_sizes(2500, 1000) == [1000, 1000, 500]
        assert chunk_sizes(1000, 1000) == [1000]
        with pytest.raises(InvalidConfiguration):
            chunk_sizes(0)


class TestSimulateErrorRate:
    def test_rows_and_parameters(self):
        rows, points = simulate_error_rate(2, 1, [1e2, 1e4], trials=300, seed=3, Q=1)
        assert [r["P"] for r in rows] == [1e2, 1e4]
        assert all(r["trials"] == 300 for r in rows)
        assert all(r["d_min_mode"] == "exact" for r in rows)
        assert points[1].a == pytest.approx(points[0].a * 10)
        desired = closed_form_sizes(2, 1).M
        for row in rows:
            assert row["pe_estimate"] == pytest.approx(row["symbol_errors"] / (300 * desired))

    def test_noiseless_decoding_is_exact(self):
        rows, _ = simulate_error_rate(2, 1, [10.0], trials=200, seed=1, Q=1, noise_std=0.0)
        assert rows[0]["symbol_errors"] == 0

    def test_worker_count_does_not_change_results(self):
        kwargs = dict(K=2, m=1, P_grid=[1e2, 1e3], trials=2500, seed=11, Q=1)
        serial, _ = simulate_error_rate(**kwargs, workers=1)
        parallel, _ = simulate_error_rate(**kwargs, workers=3)
        assert serial == parallel

    def test_derived_q(self):
        points = operating_points(2, 1, True, 0, [1e6], delta=0.1)
        L = closed_form_sizes(2, 1).M_R
        assert points[0].Q == max(1, math.floor(1e6 ** (0.9 / (2 * (L + 0.1)))))

    def test_needs_exactly_one_of_q_and_delta(self):
        with pytest.raises(InvalidConfiguration):
            simulate_error_rate(2, 1, [1e2], trials=10, seed=0, Q=1, delta=0.1)

    @pytest.mark.slow
    def test_error_rate_falls_with_power(self):
        rows, _ = simulate_error_rate(2, 1, [1e2, 1e3, 1e4], trials=10**4, seed=2024, Q=1)
        pe = [r["pe_estimate"] for r in rows]
        n = 10**4 * closed_form_sizes(2, 1).M
        for current, following in zip(pe, pe[1:]):
            sigma = math.sqrt(max(current * (1 - current), 1e-12) / n)
            assert following <= current + 2 * sigma
        assert pe[0] >= pe[-1]


class TestPam:
    def test_rows(self):
        rows, slope = simulate_pam_rate([1e2, 1e4], 0.2, trials=500, seed=1)
        assert slope is None
        assert [r["Q"] for r in rows] == [math.floor(1e2**0.4), math.floor(1e4**0.4)]
        assert all(0 <= r["pe_estimate"] <= 1 for r in rows)

    @pytest.mark.slow
    def test_reliable_rate_slope(self):
        delta = 0.2
        _, slope = simulate_pam_rate([1e2, 1e3, 1e4, 1e5, 1e6], delta, trials=10**4, seed=7)
        assert slope >= 0.9 * (1 - delta)


class TestSweep:
    def test_rows(self):
        leak_rows, rate_rows = leakage_sweep(2, [1, 2], [1])
        # two messages, two observers each (other receiver and eavesdropper)
        assert len(leak_rows) == 2 * 2 * 2
        assert len(rate_rows) == 2 * 2
        first = leak_rows[0]
        assert (first["m"], first["Q"], first["message"], first["observer"]) == (1, 1, 1, 0)
        for row in leak_rows:
            assert row["leakage_bits"] <= row["bound_bits"] + 1e-9

    def test_rate_uses_worst_observer(self):
        leak_rows, rate_rows = leakage_sweep(2, [1], [1])
        for rate in rate_rows:
            leaks = [r["leakage_bits"] for r in leak_rows if r["message"] == rate["message"]]
            assert rate["max_leakage_bits"] == pytest.approx(max(leaks))
            assert rate["secrecy_rate_bits"] == pytest.approx(max(0.0, rate["mi_main_bits"] - max(leaks)))
            assert np.isfinite(rate["mi_main_bits"])

    def test_receiver_union_is_distinct(self):
        assert distinctness_checks(2, [1, 2], seed=5) == {1: True, 2: True}

    @pytest.mark.parametrize("model,observers", [("ee", {0}), ("cm", {1, 2}), ("cm-ee", {0, 1, 2})])
    def test_model_selects_observers(self, model, observers):
        leak_rows, rate_rows = leakage_sweep(2, [1], [1], model=model)
        assert {row["observer"] for row in leak_rows} == observers
        assert {row["worst_observer"] for row in rate_rows} <= observers

    def test_seed_measures_error_rate(self):
        _, unseeded = leakage_sweep(2, [1], [0, 1])
        _, seeded = leakage_sweep(2, [1], [0, 1], seed=3)
        assert all(row["pe_estimate"] == 0.0 for row in unseeded + seeded)
        # exact recovery never errs
        assert [r["secrecy_rate_bits"] for r in seeded] == [r["secrecy_rate_bits"] for r in unseeded]
