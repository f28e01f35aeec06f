import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel import (
    ChannelGains,
    GainKind,
    GainSymbol,
    LinkConfig,
    apply_channel,
    apply_channel_batch,
    draw_gain_values,
    gain_for_link,
    sample_gains,
    symbol_universe,
)
from errors import InvalidArgument, InvalidConfiguration


class TestGainSymbol:
    def test_names(self):
        assert str(GainSymbol.direct(1)) == "h11"
        assert str(GainSymbol.cross(1, 2)) == "h12"
        assert str(GainSymbol.eave(3)) == "g3"

    def test_cross_needs_distinct_indices(self):
        with pytest.raises(InvalidArgument):
            GainSymbol.cross(2, 2)

    def test_indices_start_at_one(self):
        with pytest.raises(InvalidArgument):
            GainSymbol.direct(0)

    def test_link_gain(self):
        assert gain_for_link(2, 2) == GainSymbol.direct(2)
        assert gain_for_link(1, 3) == GainSymbol.cross(1, 3)
        assert gain_for_link(2, 0) == GainSymbol.eave(2)


class TestUniverse:
    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_size(self, K):
        assert len(symbol_universe(K, True)) == K * K + K
        assert len(symbol_universe(K, False)) == K * K

    def test_canonical_order(self):
        universe = symbol_universe(2, True)
        assert [str(s) for s in universe] == ["h11", "h22", "h12", "h21", "g1", "g2"]
        assert [s.kind for s in universe][:2] == [GainKind.DIRECT, GainKind.DIRECT]


class TestSampleGains:
    def test_deterministic(self):
        first = sample_gains(3, True, seed=7)
        second = sample_gains(3, True, seed=7)
        assert first.to_record() == second.to_record()

    def test_seed_changes_draw(self):
        assert sample_gains(2, True, 1).to_record() != sample_gains(2, True, 2).to_record()

    def test_magnitudes_in_range(self):
        values = np.abs(np.array(list(sample_gains(4, True, 3).values.values())))
        assert np.all(values >= 0.5) and np.all(values <= 2.0)

    def test_rejects_single_user(self):
        with pytest.raises(InvalidConfiguration):
            sample_gains(1, True, 0)

    def test_missing_symbol_rejected(self):
        values = dict(sample_gains(2, False, 0).values)
        values.pop(GainSymbol.cross(1, 2))
        with pytest.raises(InvalidConfiguration):
            ChannelGains(2, False, values)

    def test_zero_gain_rejected(self):
        values = dict(sample_gains(2, False, 0).values)
        values[GainSymbol.direct(1)] = 0.0
        with pytest.raises(InvalidConfiguration):
            ChannelGains(2, False, values)

    def test_unknown_symbol_lookup(self):
        gains = sample_gains(2, False, 0)
        with pytest.raises(InvalidArgument):
            gains[GainSymbol.eave(1)]

    def test_million_draws_bounded_away_from_zero(self):
        values = draw_gain_values(10**6, np.random.default_rng(11))
        assert np.all(np.isfinite(values))
        assert np.abs(values).min() >= 0.5
        assert np.abs(values).max() <= 2.0
        # both signs, in roughly equal shares
        assert abs(np.mean(values > 0) - 0.5) < 0.005


class TestApplyChannel:
    def test_noiseless_outputs(self):
        gains = sample_gains(2, True, 5)
        cfg = LinkConfig(P=10.0, noise_std=0.0)
        out = apply_channel(gains, [1.0, -2.0], cfg, np.random.default_rng(0))
        h = gains.values
        expected = [
            h[GainSymbol.direct(1)] - 2 * h[GainSymbol.cross(2, 1)],
            h[GainSymbol.cross(1, 2)] - 2 * h[GainSymbol.direct(2)],
            h[GainSymbol.eave(1)] - 2 * h[GainSymbol.eave(2)],
        ]
        assert_allclose(out, expected)

    def test_noiseless_channel_is_linear(self):
        gains = sample_gains(3, True, 8)
        cfg = LinkConfig(P=1.0, noise_std=0.0)
        rng = np.random.default_rng(4)
        x, y = rng.normal(size=(2, 50, 3))
        alpha, beta = 1.7, -0.3
        combined = apply_channel_batch(gains, alpha * x + beta * y, cfg, rng)
        separate = alpha * apply_channel_batch(gains, x, cfg, rng) + beta * apply_channel_batch(gains, y, cfg, rng)
        assert_allclose(combined, separate, rtol=1e-12, atol=1e-12)

    def test_no_eavesdropper_output(self):
        gains = sample_gains(3, False, 5)
        out = apply_channel(gains, [0.0, 0.0, 0.0], LinkConfig(1.0, 0.0), np.random.default_rng(0))
        assert out == [0.0, 0.0, 0.0]

    def test_batch_noise_statistics(self):
        gains = sample_gains(2, True, 5)
        zeros = np.zeros((20000, 2))
        out = apply_channel_batch(gains, zeros, LinkConfig(1.0, 1.0), np.random.default_rng(1))
        assert out.shape == (20000, 3)
        assert out.std() == pytest.approx(1.0, abs=0.03)

    def test_wrong_input_length(self):
        gains = sample_gains(2, True, 5)
        with pytest.raises(InvalidArgument):
            apply_channel(gains, [1.0], LinkConfig(1.0), np.random.default_rng(0))

    def test_invalid_power(self):
        with pytest.raises(InvalidConfiguration):
            LinkConfig(P=0.0)
