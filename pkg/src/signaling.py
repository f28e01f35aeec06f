# src/signaling.py
"""
PAM signaling over alignment dimensions.

Responsible for:
- the PAM constellation C(a, Q) = a * {-Q..Q}
- picking (Q, a, gamma) for a power budget P
- stream layouts b_i (which monomial carries which symbol)
- synthesizing transmit signals x_i = a * sum_t symbol_t * t
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from channel import ChannelGains
from dimensions import BlockId, DimensionSet, block_dimensions, transmit_blocks
from errors import InvalidArgument, InvalidConfiguration


@dataclass(frozen=True)
class PamConstellation:
    a: float
    Q: int

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidConfiguration(f"spacing a must be > 0, got {self.a}")
        if self.Q < 1:
            raise InvalidConfiguration(f"Q must be >= 1, got {self.Q}")

    @property
    def points(self) -> np.ndarray:
        return self.a * np.arange(-self.Q, self.Q + 1)

    @property
    def min_distance(self) -> float:
        return self.a

    @property
    def rate_bits(self) -> float:
        return math.log2(2 * self.Q + 1)

    @property
    def average_power(self) -> float:
        # E[b^2] for b uniform on -Q..Q
        return self.a**2 * self.Q * (self.Q + 1) / 3


@dataclass(frozen=True, eq=False)
class StreamLayout:
    """b_i for one transmitter: (block, dimensions) pairs in stacking order."""

    tx: int
    blocks: Tuple[Tuple[BlockId, DimensionSet], ...]

    @property
    def size(self) -> int:
        return sum(len(dims) for _, dims in self.blocks)

    def block_slices(self) -> Tuple[Tuple[BlockId, slice], ...]:
        out, start = [], 0
        for block, dims in self.blocks:
            out.append((block, slice(start, start + len(dims))))
            start += len(dims)
        return tuple(out)

    def values(self, gains: ChannelGains) -> np.ndarray:
        """Numeric value of every position of b_i."""
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([dims.values(gains) for _, dims in self.blocks])


def build_layout(K: int, m: int, i: int, eavesdropper: bool = True) -> StreamLayout:
    """b_i = [t_i1, ..., t_iK (no t_ii), t_(i)]; total length K * M."""
    return StreamLayout(
        tx=i,
        blocks=tuple((block, block_dimensions(K, m, block, eavesdropper)) for block in transmit_blocks(K, i)),
    )


@dataclass(frozen=True, eq=False)
class SymbolVector:
    tx: int
    Q: int
    symbols: np.ndarray

    def __post_init__(self):
        symbols = np.asarray(self.symbols, dtype=np.int64)
        if symbols.ndim != 1:
            raise InvalidArgument("symbols must be a flat vector")
        if symbols.size and np.abs(symbols).max() > self.Q:
            raise InvalidArgument(f"symbols outside -{self.Q}..{self.Q}")
        symbols.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def block(self, layout: StreamLayout, block: BlockId) -> np.ndarray:
        for candidate, window in layout.block_slices():
            if candidate == block:
                return self.symbols[window]
        raise InvalidArgument(f"{block} is not a block of transmitter {layout.tx}")


class SignalingParameters(NamedTuple):
    Q: int
    a: float
    gamma: float


def coefficient_mass(layout: StreamLayout, gains: ChannelGains) -> float:
    """sum over t in b_i of |t|."""
    return float(np.abs(layout.values(gains)).sum())


def select_parameters(
    P: float,
    delta: float,
    L: int,
    gains: ChannelGains,
    layouts: Sequence[StreamLayout],
) -> SignalingParameters:
    """
    Q = floor(P^((1-delta) / (2(L+delta)))) (at least 1), gamma = min_i 1/sum|t|,
    a = gamma sqrt(P) / Q.
    """
    Q = constellation_size(P, delta, L)
    return SignalingParameters(Q, *spacing_for(P, Q, gains, layouts))


def constellation_size(P: float, delta: float, L: int) -> int:
    if not P > 0:
        raise InvalidConfiguration(f"P must be > 0, got {P}")
    if not 0 < delta < 1:
        raise InvalidConfiguration(f"delta must lie in (0, 1), got {delta}")
    if L < 1:
        raise InvalidConfiguration(f"L must be >= 1, got {L}")
    return max(1, math.floor(P ** ((1 - delta) / (2 * (L + delta)))))


def spacing_for(P: float, Q: int, gains: ChannelGains, layouts: Sequence[StreamLayout]) -> Tuple[float, float]:
    """(a, gamma) for an already fixed Q."""
    if not layouts:
        raise InvalidArgument("at least one stream layout is needed")
    if Q < 1:
        raise InvalidConfiguration(f"Q must be >= 1, got {Q}")
    gamma = min(1.0 / coefficient_mass(layout, gains) for layout in layouts)
    return gamma * math.sqrt(P) / Q, gamma


def pam_parameters(P: float, delta: float, gamma: float = 1.0) -> SignalingParameters:
    """
    Scalar point-to-point choice: Q = floor(P^((1-delta)/2)), a = gamma P^(delta/2).
    """
    if not P > 0:
        raise InvalidConfiguration(f"P must be > 0, got {P}")
    if not 0 < delta < 1:
        raise InvalidConfiguration(f"delta must lie in (0, 1), got {delta}")
    Q = max(1, math.floor(P ** ((1 - delta) / 2)))
    return SignalingParameters(Q, gamma * P ** (delta / 2), gamma)


def pam_demodulate(y: np.ndarray, a: float, Q: int) -> np.ndarray:
    """Nearest point of C(a, Q) for every received value."""
    return np.clip(np.rint(np.asarray(y, dtype=float) / a), -Q, Q).astype(np.int64)


def encode_batch(symbols: np.ndarray, layout: StreamLayout, a: float, gains: ChannelGains) -> np.ndarray:
    """Transmit value of every row of an (n, layout.size) symbol matrix."""
    symbols = np.asarray(symbols)
    if symbols.ndim != 2 or symbols.shape[1] != layout.size:
        raise InvalidArgument(f"expected an (n, {layout.size}) symbol matrix, got shape {symbols.shape}")
    return a * (symbols @ layout.values(gains))


def encode(symbols: SymbolVector, layout: StreamLayout, a: float, gains: ChannelGains) -> float:
    if symbols.tx != layout.tx:
        raise InvalidArgument(f"symbols of transmitter {symbols.tx} do not match layout {layout.tx}")
    if len(symbols) != layout.size:
        raise InvalidArgument(f"expected {layout.size} symbols, got {len(symbols)}")
    return float(encode_batch(symbols.symbols[np.newaxis, :], layout, a, gains)[0])


def random_symbol_batch(layout: StreamLayout, Q: int, rng: np.random.Generator, n: int) -> np.ndarray:
    """n independent uniform symbol rows over -Q..Q for one transmitter."""
    if Q < 1:
        raise InvalidConfiguration(f"Q must be >= 1, got {Q}")
    return rng.integers(-Q, Q + 1, size=(n, layout.size))


def random_symbols(layout: StreamLayout, Q: int, rng: np.random.Generator) -> SymbolVector:
    return SymbolVector(layout.tx, Q, random_symbol_batch(layout, Q, rng, 1)[0])
