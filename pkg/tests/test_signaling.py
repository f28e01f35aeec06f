import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from channel import sample_gains
from dimensions import BlockId, build_T, closed_form_sizes
from errors import InvalidArgument, InvalidConfiguration
from signaling import (
    PamConstellation,
    SymbolVector,
    build_layout,
    coefficient_mass,
    constellation_size,
    encode,
    encode_batch,
    pam_demodulate,
    pam_parameters,
    random_symbol_batch,
    random_symbols,
    select_parameters,
)


class TestPamConstellation:
    def test_points_and_distance(self):
        pam = PamConstellation(a=0.5, Q=2)
        assert_array_equal(pam.points, [-1.0, -0.5, 0.0, 0.5, 1.0])
        assert pam.min_distance == 0.5
        assert pam.rate_bits == pytest.approx(math.log2(5))

    def test_average_power(self):
        pam = PamConstellation(a=2.0, Q=3)
        assert pam.average_power == pytest.approx(np.mean(pam.points**2))

    @pytest.mark.parametrize("a,Q", [(0.0, 1), (1.0, 0)])
    def test_invalid(self, a, Q):
        with pytest.raises(InvalidConfiguration):
            PamConstellation(a=a, Q=Q)


class TestLayout:
    def test_blocks_and_size(self):
        layout = build_layout(3, 2, 2)
        M = closed_form_sizes(3, 2).M
        assert [b for b, _ in layout.blocks] == [BlockId(2, 1), BlockId(2, 3), BlockId(2)]
        assert layout.size == 3 * M

    def test_message_blocks_ride_on_destination_set(self):
        layout = build_layout(2, 2, 1)
        (v12, dims_v), (u1, dims_u) = layout.blocks
        assert_array_equal(dims_v.exponents, build_T(2, 2, 2).exponents)
        assert_array_equal(dims_u.exponents, build_T(2, 2, 1).exponents)

    def test_block_slices(self):
        layout = build_layout(2, 1, 1)
        assert [(str(b), s.start, s.stop) for b, s in layout.block_slices()] == [("v12", 0, 1), ("u1", 1, 2)]


class TestParameterSelection:
    def test_constellation_size(self):
        assert constellation_size(1e6, 0.5, 1) == math.floor(1e6 ** (0.5 / 3))
        assert constellation_size(10.0, 0.1, 100) == 1

    def test_power_constraint(self):
        K, m, P = 2, 1, 1e8
        gains = sample_gains(K, True, 0)
        layouts = [build_layout(K, m, i) for i in range(1, K + 1)]
        params = select_parameters(P, 0.1, closed_form_sizes(K, m).M_R, gains, layouts)
        assert params.gamma == pytest.approx(min(1 / coefficient_mass(l, gains) for l in layouts))
        assert params.a == pytest.approx(params.gamma * math.sqrt(P) / params.Q)
        # |x_i| <= a Q sum|t| <= sqrt(P)
        for layout in layouts:
            assert params.a * params.Q * coefficient_mass(layout, gains) <= math.sqrt(P) * (1 + 1e-12)

    @pytest.mark.parametrize("P,delta", [(0.0, 0.1), (10.0, 0.0), (10.0, 1.0)])
    def test_invalid(self, P, delta):
        gains = sample_gains(2, True, 0)
        with pytest.raises(InvalidConfiguration):
            select_parameters(P, delta, 10, gains, [build_layout(2, 1, 1)])

    def test_pam_parameters(self):
        params = pam_parameters(1e4, 0.2)
        assert params.Q == math.floor(1e4**0.4)
        assert params.a == pytest.approx(1e4**0.1)


class TestEncoding:
    def test_encode_matches_dot_product(self):
        gains = sample_gains(2, True, 2)
        layout = build_layout(2, 2, 1)
        symbols = random_symbols(layout, 3, np.random.default_rng(0))
        expected = 0.25 * float(np.dot(symbols.symbols, layout.values(gains)))
        assert encode(symbols, layout, 0.25, gains) == pytest.approx(expected)

    def test_encode_rejects_foreign_symbols(self):
        gains = sample_gains(2, True, 2)
        layout = build_layout(2, 1, 1)
        with pytest.raises(InvalidArgument):
            encode(SymbolVector(2, 1, np.zeros(2)), layout, 1.0, gains)

    def test_symbols_out_of_range(self):
        with pytest.raises(InvalidArgument):
            SymbolVector(1, 1, np.array([0, 2]))

    def test_block_view(self):
        layout = build_layout(2, 1, 1)
        vector = SymbolVector(1, 1, np.array([1, -1]))
        assert_array_equal(vector.block(layout, BlockId(1)), [-1])

    def test_demodulate_clips_to_constellation(self):
        assert_array_equal(pam_demodulate(np.array([0.26, -0.74, 9.0, -9.0]), 0.5, 2), [1, -1, 2, -2])

    def test_batch_matches_single(self):
        gains = sample_gains(3, True, 6)
        layout = build_layout(3, 1, 2)
        rng = np.random.default_rng(5)
        batch = random_symbol_batch(layout, 2, rng, 40)
        values = encode_batch(batch, layout, 0.7, gains)
        for row, value in zip(batch, values):
            assert encode(SymbolVector(2, 2, row), layout, 0.7, gains) == pytest.approx(value, rel=1e-12)

    def test_batch_shape_checked(self):
        gains = sample_gains(2, True, 0)
        with pytest.raises(InvalidArgument):
            encode_batch(np.zeros((4, 3)), build_layout(2, 1, 1), 1.0, gains)

    def test_encode_is_linear(self):
        gains = sample_gains(2, True, 12)
        layout = build_layout(2, 2, 1)
        rng = np.random.default_rng(8)
        b1, b2 = random_symbol_batch(layout, 3, rng, 2)
        a = 0.4
        combined = encode_batch(np.stack([2 * b1 - b2]), layout, a, gains)[0]
        parts = 2 * encode_batch(b1[np.newaxis], layout, a, gains)[0] - encode_batch(b2[np.newaxis], layout, a, gains)[0]
        assert combined == pytest.approx(parts, rel=1e-12, abs=1e-12)
        assert encode_batch(b1[np.newaxis], layout, 2 * a, gains)[0] == pytest.approx(
            2 * encode_batch(b1[np.newaxis], layout, a, gains)[0]
        )

    def test_distinct_symbols_never_collide(self):
        gains = sample_gains(2, True, 0)
        layout = build_layout(2, 1, 1)
        rng = np.random.default_rng(21)
        first = random_symbol_batch(layout, 2, rng, 10**4)
        second = random_symbol_batch(layout, 2, rng, 10**4)
        distinct = np.any(first != second, axis=1)
        gaps = np.abs(encode_batch(first, layout, 1.0, gains) - encode_batch(second, layout, 1.0, gains))
        assert np.count_nonzero(gaps[distinct] <= 1e-9) == 0


class TestRandomSymbols:
    def test_levels_uniform(self):
        Q, n = 2, 5 * 10**4
        layout = build_layout(2, 1, 1)
        draws = random_symbol_batch(layout, Q, np.random.default_rng(31), n).ravel()
        total = draws.size
        p = 1 / (2 * Q + 1)
        sigma = math.sqrt(total * p * (1 - p))
        counts = np.bincount(draws + Q, minlength=2 * Q + 1)
        assert counts.size == 2 * Q + 1
        assert np.all(np.abs(counts - total * p) <= 3 * sigma)

    def test_single_vector_in_range(self):
        layout = build_layout(3, 2, 3)
        vector = random_symbols(layout, 1, np.random.default_rng(0))
        assert len(vector) == layout.size and vector.tx == 3
        assert np.abs(vector.symbols).max() <= 1

    def test_needs_positive_q(self):
        with pytest.raises(InvalidConfiguration):
            random_symbols(build_layout(2, 1, 1), 0, np.random.default_rng(0))
