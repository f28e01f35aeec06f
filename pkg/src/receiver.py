# src/receiver.py
"""
Receiver side of the alignment scheme.

Responsible for:
- exact noiseless received points over the monomial basis (CoefficientVector)
- reading desired symbols off their private dimensions, and the measured
  error rate of doing so
- minimum distance of a receiver constellation (exact or sampled)
- brute-force nearest-point decoding for tiny configurations
"""

import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from channel import ChannelGains
from config import DECODE_BUDGET, DISTINCTNESS_TOL, SAMPLING_PAIRS
from dimensions import BlockId, Monomial, OccupancyMap, receiver_occupancy
from errors import CorruptedInput, Infeasible, InvalidArgument
from signaling import SymbolVector, build_layout, random_symbols

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """
    Integer coefficient of every occupied dimension at one observer;
    values[d] belongs to occupancy.dimensions row d.
    """

    occupancy: OccupancyMap
    values: np.ndarray

    @property
    def receiver(self) -> int:
        return self.occupancy.receiver

    @property
    def coeffs(self) -> Dict[Monomial, int]:
        nonzero = np.flatnonzero(self.values)
        return {self.occupancy.dimensions.monomial(d): int(self.values[d]) for d in nonzero}

    def received_value(self, gains: ChannelGains, a: float) -> float:
        """a * sum_d coeff_d * value_d: the received signal minus noise."""
        return float(a * (self.values @ self.occupancy.dimensions.values(gains)))


@dataclass
class DecodeResult:
    recovered: Dict[BlockId, np.ndarray]
    success: bool = True
    errors: int = 0


class MinimumDistance(NamedTuple):
    value: float
    mode: str


def noiseless_point(all_symbols: Sequence[SymbolVector], occupancy: OccupancyMap) -> CoefficientVector:
    if len(all_symbols) != occupancy.K:
        raise InvalidArgument(f"expected {occupancy.K} symbol vectors, got {len(all_symbols)}")

    values = np.zeros(len(occupancy.dimensions), dtype=np.int64)
    for tx, vector in enumerate(all_symbols, start=1):
        if vector.tx != tx:
            raise InvalidArgument(f"symbol vector {tx} belongs to transmitter {vector.tx}")
        dims = occupancy.tx_dims(tx)
        if len(vector) != len(dims):
            raise InvalidArgument(f"transmitter {tx} needs {len(dims)} symbols, got {len(vector)}")
        # one stream per dimension per transmitter, so plain fancy-index add is exact
        values[dims] += vector.symbols
    return CoefficientVector(occupancy, values)


def count_symbol_errors(recovered: Dict[BlockId, np.ndarray], truth: SymbolVector, occupancy: OccupancyMap) -> int:
    layout = build_layout(occupancy.K, occupancy.m, truth.tx, occupancy.eavesdropper)
    return int(sum(np.count_nonzero(symbols != truth.block(layout, block)) for block, symbols in recovered.items()))


def _scored(recovered, truth, occupancy) -> DecodeResult:
    if truth is None:
        return DecodeResult(recovered)
    errors = count_symbol_errors(recovered, truth, occupancy)
    return DecodeResult(recovered, success=errors == 0, errors=errors)


def exact_recover(point: CoefficientVector, Q: int, truth: Optional[SymbolVector] = None) -> DecodeResult:
    """
    Read every desired symbol v_jk of receiver j off the dimension it holds alone.
    """
    occupancy = point.occupancy
    if occupancy.receiver == 0:
        raise InvalidArgument("the eavesdropper has no desired blocks")

    load = occupancy.load()
    recovered = {}
    for block in occupancy.desired_blocks():
        dims = occupancy.block_dims(block)
        if np.any(load[dims] != 1):
            raise InvalidArgument(f"{block} shares dimensions at receiver {occupancy.receiver}")
        symbols = point.values[dims]
        if symbols.size and np.abs(symbols).max() > Q:
            raise CorruptedInput(f"coefficient outside -{Q}..{Q} on a private dimension of {block}")
        recovered[block] = symbols.copy()
    return _scored(recovered, truth, occupancy)


def exact_error_rate(
    K: int, m: int, j: int, Q: int, trials: int, rng: np.random.Generator, eavesdropper: bool = True
) -> float:
    """Fraction of receiver j's desired symbols exact_recover gets wrong over random noiseless points."""
    if trials < 1:
        raise InvalidArgument(f"trials must be >= 1, got {trials}")
    occupancy = receiver_occupancy(K, m, j, eavesdropper)
    layouts = [build_layout(K, m, i, eavesdropper) for i in range(1, K + 1)]
    desired = sum(len(occupancy.block_dims(block)) for block in occupancy.desired_blocks())

    errors = 0
    for _ in range(trials):
        vectors = [random_symbols(layout, Q, rng) for layout in layouts]
        errors += exact_recover(noiseless_point(vectors, occupancy), Q, truth=vectors[j - 1]).errors
    return errors / (trials * desired)


# ======================================================
# Minimum distance
# ======================================================

def _enumeration_size(n_streams: int, Q: int) -> int:
    return (2 * Q + 1) ** n_streams


def _grid_values(weights: np.ndarray, loads: np.ndarray, a: float, Q: int) -> np.ndarray:
    # lexicographic over per-dimension coefficients, first dimension slowest
    values = np.zeros(1)
    for w, n in zip(weights, loads):
        if n == 0:
            continue
        coefficients = np.arange(-n * Q, n * Q + 1)
        values = (values[:, np.newaxis] + a * w * coefficients[np.newaxis, :]).ravel()
    return values


def _smallest_gap(values: np.ndarray, tol: float) -> float:
    # gaps at or below tol are one received value reached twice
    gaps = np.diff(np.sort(values))
    gaps = gaps[gaps > tol]
    return float(gaps.min()) if gaps.size else float("inf")


def constellation_min_distance(
    weights: np.ndarray,
    loads: np.ndarray,
    a: float,
    Q: int,
    budget: int = DECODE_BUDGET,
    sampling: bool = False,
    rng: Optional[np.random.Generator] = None,
    pairs: int = SAMPLING_PAIRS,
) -> MinimumDistance:
    """
    Minimum gap between distinct noiseless values a * sum_d c_d w_d, where c_d
    is the sum of loads[d] symbols from -Q..Q. Coefficient vectors that land on
    the same value count once.
    """
    weights = np.asarray(weights, dtype=float)
    loads = np.asarray(loads, dtype=np.int64)
    n_streams = int(loads.sum())
    if n_streams == 0 or Q == 0:
        return MinimumDistance(float("inf"), "exact")
    tol = DISTINCTNESS_TOL * a * Q * float(np.abs(weights) @ loads)

    if _enumeration_size(n_streams, Q) <= budget:
        return MinimumDistance(_smallest_gap(_grid_values(weights, loads, a, Q), tol), "exact")
    if not sampling:
        raise Infeasible(
            f"(2Q+1)^{n_streams} points exceed the budget of {budget}; pass sampling=True"
        )
    if rng is None:
        raise InvalidArgument("sampling mode needs a random generator")

    active = loads > 0
    starts = np.concatenate([[0], np.cumsum(loads[active])[:-1]])
    w = weights[active]
    chunk = max(1, min(pairs, 2**22 // n_streams))
    best, drawn = float("inf"), 0
    while drawn < pairs:
        first = rng.integers(-Q, Q + 1, size=(chunk, n_streams))
        second = rng.integers(-Q, Q + 1, size=(chunk, n_streams))
        diff = np.add.reduceat(first - second, starts, axis=1)
        gaps = np.abs(a * (diff @ w))
        gaps = gaps[gaps > tol]
        if gaps.size:
            best = min(best, float(gaps.min()))
        drawn += chunk
    logger.debug("Sampled %d pairs over %d streams: d_min <= %g", drawn, n_streams, best)
    return MinimumDistance(best, "sampled")


def min_distance(
    occupancy: OccupancyMap,
    gains: ChannelGains,
    a: float,
    Q: int,
    budget: int = DECODE_BUDGET,
    sampling: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> MinimumDistance:
    return constellation_min_distance(
        occupancy.dimensions.values(gains), occupancy.load(), a, Q, budget, sampling, rng
    )


# ======================================================
# Nearest-point decoding
# ======================================================

class NearestPointDecoder:
    """
    Exhaustive minimum-distance decoder over every reachable coefficient vector
    of one receiver. Ties go to the lexicographically smallest coefficient tuple.
    """

    def __init__(self, occupancy: OccupancyMap, gains: ChannelGains, a: float, Q: int, budget: int = DECODE_BUDGET):
        if occupancy.receiver == 0:
            raise InvalidArgument("the eavesdropper has no desired blocks")
        if Q < 1:
            raise InvalidArgument(f"Q must be >= 1, got {Q}")
        size = _enumeration_size(occupancy.n_streams, Q)
        if size > budget:
            raise Infeasible(f"nearest-point decoding needs {size} candidates, budget is {budget}")

        self.occupancy = occupancy
        self.Q = Q
        loads = occupancy.load()
        self._offsets = loads * Q
        self._shape = tuple(int(s) for s in 2 * loads * Q + 1)
        values = _grid_values(occupancy.dimensions.values(gains), loads, a, Q)
        self._order = np.argsort(values, kind="stable")
        self._sorted = values[self._order]
        self._desired = {b: occupancy.block_dims(b) for b in occupancy.desired_blocks()}
        logger.debug("Nearest-point decoder at receiver %d: %d candidates", occupancy.receiver, len(values))

    def nearest_indices(self, ys: np.ndarray) -> np.ndarray:
        """Grid index of the nearest candidate for every y."""
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        last = len(self._sorted) - 1
        pos = np.searchsorted(self._sorted, ys)
        right = np.clip(pos, 0, last)
        left = np.clip(pos - 1, 0, last)
        # leftmost member of the lower run holds the smallest grid index (stable sort)
        left = np.searchsorted(self._sorted, self._sorted[left])

        d_left = np.abs(ys - self._sorted[left])
        d_right = np.abs(self._sorted[right] - ys)
        g_left, g_right = self._order[left], self._order[right]
        return np.where(d_left < d_right, g_left, np.where(d_right < d_left, g_right, np.minimum(g_left, g_right)))

    def coefficients(self, indices: np.ndarray) -> np.ndarray:
        return np.stack(np.unravel_index(indices, self._shape), axis=-1) - self._offsets

    def decode_desired(self, ys: np.ndarray) -> np.ndarray:
        """(n, (K-1)M) desired symbols, blocks in stacking order."""
        coefficients = self.coefficients(self.nearest_indices(ys))
        return np.concatenate([coefficients[:, dims] for dims in self._desired.values()], axis=1)

    def decode(self, y: float, truth: Optional[SymbolVector] = None) -> DecodeResult:
        coefficients = self.coefficients(self.nearest_indices(np.array([y])))[0]
        recovered = {block: coefficients[dims].copy() for block, dims in self._desired.items()}
        return _scored(recovered, truth, self.occupancy)


def nearest_point_decode(
    y: float,
    occupancy: OccupancyMap,
    gains: ChannelGains,
    a: float,
    Q: int,
    budget: int = DECODE_BUDGET,
    truth: Optional[SymbolVector] = None,
) -> DecodeResult:
    return NearestPointDecoder(occupancy, gains, a, Q, budget).decode(y, truth)
