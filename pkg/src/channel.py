# src/channel.py
"""
K-user Gaussian interference channel with an optional external eavesdropper.

Responsible for:
- naming channel gains (h_ii, h_jk, g_j) as GainSymbol values
- sampling generic gains from a continuous distribution, deterministically
- applying the channel to real-valued transmit signals

Receiver i observes Y_i = sum_j h_ji x_j + N_i, the eavesdropper
Z = sum_j g_j x_j + N_Z. Outputs are ordered Y_1..Y_K, then Z.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from config import DEFAULT_NOISE_STD, GAIN_MAGNITUDE_RANGE
from errors import InvalidArgument, InvalidConfiguration

logger = logging.getLogger(__name__)


class GainKind(Enum):
    DIRECT = 0
    CROSS = 1
    EAVE = 2


@dataclass(frozen=True)
class GainSymbol:
    """
    One channel gain: Direct(i) = h_ii, Cross(j, k) = h_jk (j != k), Eave(j) = g_j.
    """

    kind: GainKind
    j: int
    k: int = 0

    def __post_init__(self):
        if self.j < 1:
            raise InvalidArgument(f"gain indices start at 1, got {self.j}")
        if self.kind is GainKind.CROSS:
            if self.k < 1:
                raise InvalidArgument(f"gain indices start at 1, got {self.k}")
            if self.j == self.k:
                raise InvalidArgument(f"Cross({self.j},{self.k}) needs distinct indices")
        elif self.k != 0:
            raise InvalidArgument(f"{self.kind.name} gains carry a single index")

    @classmethod
    def direct(cls, i: int) -> "GainSymbol":
        return cls(GainKind.DIRECT, i)

    @classmethod
    def cross(cls, j: int, k: int) -> "GainSymbol":
        return cls(GainKind.CROSS, j, k)

    @classmethod
    def eave(cls, j: int) -> "GainSymbol":
        return cls(GainKind.EAVE, j)

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.kind.value, self.j, self.k)

    def __lt__(self, other: "GainSymbol") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        if self.kind is GainKind.EAVE:
            return f"g{self.j}"
        if self.kind is GainKind.DIRECT:
            return f"h{self.j}{self.j}"
        return f"h{self.j}{self.k}"


def symbol_universe(K: int, eavesdropper: bool) -> Tuple[GainSymbol, ...]:
    """
    All gain symbols of a K-user system in canonical order:
    Direct(1..K), Cross pairs sorted by (j, k), then Eave(1..K).
    """
    symbols = [GainSymbol.direct(i) for i in range(1, K + 1)]
    symbols += [GainSymbol.cross(j, k) for j in range(1, K + 1) for k in range(1, K + 1) if j != k]
    if eavesdropper:
        symbols += [GainSymbol.eave(j) for j in range(1, K + 1)]
    return tuple(symbols)


def gain_for_link(i: int, j: int) -> GainSymbol:
    """Gain carrying transmitter i to observer j (0 = eavesdropper)."""
    if j == 0:
        return GainSymbol.eave(i)
    if i == j:
        return GainSymbol.direct(i)
    return GainSymbol.cross(i, j)


@dataclass(frozen=True)
class ChannelGains:
    K: int
    eavesdropper: bool
    values: Mapping[GainSymbol, float]

    def __post_init__(self):
        values = dict(self.values)
        expected = set(symbol_universe(self.K, self.eavesdropper))
        missing = expected - set(values)
        extra = set(values) - expected
        if missing or extra:
            raise InvalidConfiguration(
                f"gain table mismatch: missing {sorted(map(str, missing))}, "
                f"unexpected {sorted(map(str, extra))}"
            )
        for symbol, value in values.items():
            if not np.isfinite(value) or value == 0:
                raise InvalidConfiguration(f"gain {symbol} must be finite and nonzero, got {value}")
        object.__setattr__(self, "values", MappingProxyType({s: float(values[s]) for s in sorted(values)}))

    def __getitem__(self, symbol: GainSymbol) -> float:
        try:
            return self.values[symbol]
        except KeyError:
            raise InvalidArgument(f"gain {symbol} is not part of this system") from None

    @property
    def universe(self) -> Tuple[GainSymbol, ...]:
        return symbol_universe(self.K, self.eavesdropper)

    def vector(self, universe: Sequence[GainSymbol]) -> np.ndarray:
        """Gain values laid out along `universe`."""
        return np.array([self[s] for s in universe], dtype=float)

    def link_matrix(self) -> np.ndarray:
        """(K, observers) matrix; column j-1 is receiver j, last column the eavesdropper."""
        observers = list(range(1, self.K + 1)) + ([0] if self.eavesdropper else [])
        return np.array(
            [[self[gain_for_link(i, j)] for j in observers] for i in range(1, self.K + 1)]
        )

    def to_record(self) -> Dict[str, float]:
        return {str(s): v for s, v in self.values.items()}


@dataclass(frozen=True)
class LinkConfig:
    P: float
    noise_std: float = DEFAULT_NOISE_STD
    seed: int = 0

    def __post_init__(self):
        if not self.P > 0:
            raise InvalidConfiguration(f"P must be > 0, got {self.P}")
        if self.noise_std < 0:
            raise InvalidConfiguration(f"noise_std must be >= 0, got {self.noise_std}")


def draw_gain_values(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. gains: a Uniform(0.5, 2.0) magnitude with a random sign."""
    low, high = GAIN_MAGNITUDE_RANGE
    magnitudes = rng.uniform(low, high, size=n)
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    return magnitudes * signs


def sample_gains(K: int, eavesdropper: bool, seed: int) -> ChannelGains:
    """Gains of every symbol in the universe, reproducible from the seed."""
    if K < 2:
        raise InvalidConfiguration(f"K must be >= 2, got {K}")

    universe = symbol_universe(K, eavesdropper)
    values = draw_gain_values(len(universe), np.random.default_rng(seed))

    logger.debug("Sampled %d gains for K=%d (seed=%d)", len(universe), K, seed)
    return ChannelGains(K, eavesdropper, dict(zip(universe, values)))


def apply_channel_batch(
    gains: ChannelGains,
    inputs: np.ndarray,
    cfg: LinkConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Apply the channel to a (n, K) batch of inputs; returns (n, K [+1]) outputs.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != gains.K:
        raise InvalidArgument(f"expected inputs of shape (n, {gains.K}), got {inputs.shape}")

    outputs = inputs @ gains.link_matrix()
    if cfg.noise_std > 0:
        outputs = outputs + rng.normal(0.0, cfg.noise_std, size=outputs.shape)
    return outputs


def apply_channel(
    gains: ChannelGains,
    inputs: Sequence[float],
    cfg: LinkConfig,
    rng: np.random.Generator,
) -> List[float]:
    if len(inputs) != gains.K:
        raise InvalidArgument(f"expected {gains.K} inputs, got {len(inputs)}")
    return apply_channel_batch(gains, np.asarray([inputs], dtype=float), cfg, rng)[0].tolist()
