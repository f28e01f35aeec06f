# src/dimensions.py
"""
Symbolic algebra of alignment "dimensions".

Responsible for:
- Monomial: an exponent vector over channel-gain symbols
- DimensionSet: finite monomial families (T_i, extended T_i, received copies)
- receiver occupancy: which transmitted stream lands on which received dimension
- alignment cardinalities (M, M_delta, M_R) by actual enumeration

Dimensions are compared by exponent vectors, never by floating-point value.
A DimensionSet stores its members as rows of a uint8 exponent matrix laid out
along a fixed symbol universe; rows are unique and kept in lexicographic order,
which is also the enumeration order used to pair streams with dimensions.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from channel import ChannelGains, GainKind, GainSymbol, gain_for_link, symbol_universe
from config import DIMENSION_BUDGET, DISTINCTNESS_TOL
from errors import Infeasible, InvalidArgument, InvalidConfiguration

logger = logging.getLogger(__name__)

EXPONENT_DTYPE = np.uint8
MAX_EXPONENT = np.iinfo(EXPONENT_DTYPE).max


# ======================================================
# Monomial
# ======================================================

@dataclass(frozen=True)
class Monomial:
    """Product of gain symbols; canonical: sorted by symbol, no zero exponents."""

    exponents: Tuple[Tuple[GainSymbol, int], ...] = ()

    def __post_init__(self):
        merged: Dict[GainSymbol, int] = {}
        for symbol, power in self.exponents:
            if power < 0:
                raise InvalidArgument(f"negative exponent for {symbol}")
            merged[symbol] = merged.get(symbol, 0) + int(power)
        canonical = tuple((s, merged[s]) for s in sorted(merged) if merged[s])
        object.__setattr__(self, "exponents", canonical)

    @classmethod
    def from_mapping(cls, mapping: Mapping[GainSymbol, int]) -> "Monomial":
        return cls(tuple(mapping.items()))

    def exponent(self, symbol: GainSymbol) -> int:
        return dict(self.exponents).get(symbol, 0)

    def times(self, symbol: GainSymbol) -> "Monomial":
        return Monomial(self.exponents + ((symbol, 1),))

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.exponents + other.exponents)

    def as_dict(self) -> Dict[GainSymbol, int]:
        return dict(self.exponents)

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.exponents)

    def __str__(self) -> str:
        if not self.exponents:
            return "1"
        return "*".join(str(s) if p == 1 else f"{s}^{p}" for s, p in self.exponents)


def evaluate_monomial(mono: Monomial, gains: ChannelGains) -> float:
    value = 1.0
    for symbol, power in mono.exponents:
        value *= gains[symbol] ** power
    return value


# ======================================================
# Row keys
# ======================================================

def _row_keys(rows: np.ndarray, base: int) -> np.ndarray:
    # first column most significant, so ascending keys = lexicographic rows
    width = rows.shape[1]
    if width * np.log2(max(base, 2)) >= 63:
        raise Infeasible(f"exponent rows of width {width} in base {base} overflow int64 keys")
    weights = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return rows.astype(np.int64) @ weights


def _common_base(*arrays: np.ndarray) -> int:
    return max((int(a.max()) for a in arrays if a.size), default=0) + 1


# ======================================================
# DimensionSet
# ======================================================

@dataclass(frozen=True, eq=False)
class DimensionSet:
    """
    A finite set of monomials over `universe`.

    `exponents` has one row per member, one column per universe symbol; rows
    must be unique and lexicographically sorted (use from_rows otherwise).
    """

    K: int
    m: int
    owner: str
    universe: Tuple[GainSymbol, ...]
    exponents: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(self.exponents, dtype=EXPONENT_DTYPE)
        if rows.ndim != 2 or rows.shape[1] != len(self.universe):
            raise InvalidArgument(
                f"exponent matrix must have {len(self.universe)} columns, got shape {rows.shape}"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "exponents", rows)

    @classmethod
    def from_rows(cls, K: int, m: int, owner: str, universe: Sequence[GainSymbol], rows) -> "DimensionSet":
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, len(universe))
        if rows.size and (rows.min() < 0 or rows.max() > MAX_EXPONENT):
            raise InvalidArgument(f"exponents must lie in 0..{MAX_EXPONENT}")
        if len(rows):
            rows = np.unique(rows, axis=0)
        return cls(K, m, owner, tuple(universe), rows.astype(EXPONENT_DTYPE))

    @classmethod
    def from_monomials(
        cls, K: int, m: int, owner: str, universe: Sequence[GainSymbol], monomials: Iterable[Monomial]
    ) -> "DimensionSet":
        column = {s: c for c, s in enumerate(universe)}
        rows = []
        for mono in monomials:
            row = [0] * len(universe)
            for symbol, power in mono.exponents:
                if symbol not in column:
                    raise InvalidArgument(f"{symbol} is outside the symbol universe")
                row[column[symbol]] = power
            rows.append(row)
        return cls.from_rows(K, m, owner, universe, rows)

    def __len__(self) -> int:
        return self.exponents.shape[0]

    def monomial(self, index: int) -> Monomial:
        row = self.exponents[index]
        return Monomial(tuple((s, int(p)) for s, p in zip(self.universe, row) if p))

    def __iter__(self) -> Iterator[Monomial]:
        return (self.monomial(r) for r in range(len(self)))

    @property
    def members(self) -> FrozenSet[Monomial]:
        return frozenset(self)

    def row_of(self, mono: Monomial) -> Optional[np.ndarray]:
        column = {s: c for c, s in enumerate(self.universe)}
        row = np.zeros(len(self.universe), dtype=np.int64)
        for symbol, power in mono.exponents:
            if symbol not in column:
                return None
            row[column[symbol]] = power
        return row

    def __contains__(self, mono: Monomial) -> bool:
        row = self.row_of(mono)
        if row is None or not len(self):
            return False
        return bool(np.any(np.all(self.exponents == row, axis=1)))

    def _keys_against(self, other: "DimensionSet") -> Tuple[np.ndarray, np.ndarray]:
        if self.universe != other.universe:
            raise InvalidArgument(f"{self.owner} and {other.owner} use different symbol universes")
        base = _common_base(self.exponents, other.exponents)
        return _row_keys(self.exponents, base), _row_keys(other.exponents, base)

    def intersection(self, other: "DimensionSet") -> "DimensionSet":
        mine, theirs = self._keys_against(other)
        rows = self.exponents[np.isin(mine, theirs)]
        return DimensionSet(self.K, self.m, f"{self.owner}&{other.owner}", self.universe, rows)

    def union(self, other: "DimensionSet") -> "DimensionSet":
        mine, theirs = self._keys_against(other)
        rows = np.concatenate([self.exponents, other.exponents])
        _, first = np.unique(np.concatenate([mine, theirs]), return_index=True)
        return DimensionSet(self.K, self.m, f"{self.owner}|{other.owner}", self.universe, rows[first])

    def issubset(self, other: "DimensionSet") -> bool:
        mine, theirs = self._keys_against(other)
        return bool(np.all(np.isin(mine, theirs)))

    def isdisjoint(self, other: "DimensionSet") -> bool:
        mine, theirs = self._keys_against(other)
        return not np.any(np.isin(mine, theirs))

    __and__ = intersection
    __or__ = union
    __le__ = issubset

    def shifted(self, symbol: GainSymbol) -> "DimensionSet":
        try:
            column = self.universe.index(symbol)
        except ValueError:
            raise InvalidArgument(f"{symbol} is outside the symbol universe of {self.owner}") from None
        if len(self) and self.exponents[:, column].max() >= MAX_EXPONENT:
            raise InvalidArgument(f"exponent of {symbol} would exceed {MAX_EXPONENT}")
        rows = self.exponents.copy()
        rows[:, column] += 1
        return DimensionSet(self.K, self.m, f"{symbol}*{self.owner}", self.universe, rows)

    def values(self, gains: ChannelGains) -> np.ndarray:
        """Numeric realization of every member, in row order."""
        base = gains.vector(self.universe)
        return np.prod(base[np.newaxis, :] ** self.exponents.astype(np.int64), axis=1)


# ======================================================
# T_i and friends
# ======================================================

def _check_indices(K: int, m: int, i: int) -> None:
    if K < 2:
        raise InvalidConfiguration(f"K must be >= 2, got {K}")
    if m < 1:
        raise InvalidConfiguration(f"m must be >= 1, got {m}")
    if not 1 <= i <= K:
        raise InvalidConfiguration(f"index {i} outside 1..{K}")


def generators_of(K: int, i: int, eavesdropper: bool) -> Tuple[GainSymbol, ...]:
    """Direct(i), every Cross(j, k), and every Eave(j) when an eavesdropper exists."""
    return (GainSymbol.direct(i),) + tuple(
        s for s in symbol_universe(K, eavesdropper) if s.kind is not GainKind.DIRECT
    )


def build_dimension_set(
    K: int,
    m: int,
    generators: Sequence[GainSymbol],
    top: int,
    owner: str,
    eavesdropper: bool,
) -> DimensionSet:
    """
    All monomials whose generator exponents range over 1..top, other symbols 0.
    """
    universe = symbol_universe(K, eavesdropper)
    columns = [universe.index(g) for g in generators]
    if top > MAX_EXPONENT:
        raise InvalidConfiguration(f"exponent range 1..{top} exceeds {MAX_EXPONENT}")
    size = top ** len(generators)
    if size > DIMENSION_BUDGET:
        raise Infeasible(f"{owner} needs {size} monomials, budget is {DIMENSION_BUDGET}")

    grid = np.indices((top,) * len(generators), dtype=EXPONENT_DTYPE).reshape(len(generators), -1).T + 1
    rows = np.zeros((grid.shape[0], len(universe)), dtype=EXPONENT_DTYPE)
    rows[:, columns] = grid
    if columns != sorted(columns):
        rows = np.unique(rows, axis=0)

    logger.debug("Built %s: %d monomials over %d generators", owner, len(rows), len(generators))
    return DimensionSet(K, m, owner, universe, rows)


@lru_cache(maxsize=64)
def build_T(K: int, m: int, i: int, eavesdropper: bool = True) -> DimensionSet:
    _check_indices(K, m, i)
    return build_dimension_set(K, m, generators_of(K, i, eavesdropper), m, f"T{i}", eavesdropper)


@lru_cache(maxsize=64)
def build_T_extended(K: int, m: int, i: int, eavesdropper: bool = True) -> DimensionSet:
    _check_indices(K, m, i)
    return build_dimension_set(K, m, generators_of(K, i, eavesdropper), m + 1, f"T~{i}", eavesdropper)


def alignment_example_set(m: int) -> DimensionSet:
    """
    Reduced 3-user example: h11^r1 h21^r2 h13^r3 h23^r4 with every r in 1..m.
    """
    if m < 1:
        raise InvalidConfiguration(f"m must be >= 1, got {m}")
    generators = (
        GainSymbol.direct(1),
        GainSymbol.cross(1, 3),
        GainSymbol.cross(2, 1),
        GainSymbol.cross(2, 3),
    )
    return build_dimension_set(3, m, generators, m, "T1(example)", eavesdropper=False)


def shift(dims: DimensionSet, g: GainSymbol) -> DimensionSet:
    return dims.shifted(g)


def intersection_count(K: int, m: int, i: int, k: int, j: int, eavesdropper: bool = True) -> int:
    """
    |gain(i->j) T_k  intersect  gain(k->j) T_k|, by enumeration.
    """
    if i == k:
        raise InvalidArgument("transmitter i and set index k must differ")
    if j == 0:
        if not eavesdropper:
            raise InvalidArgument("observer 0 needs an eavesdropper")
    elif j in (i, k):
        raise InvalidArgument(f"receiver {j} clashes with indices i={i}, k={k}")
    for index in (i, k) + ((j,) if j else ()):
        _check_indices(K, m, index)

    base = build_T(K, m, k, eavesdropper)
    return len(shift(base, gain_for_link(i, j)) & shift(base, gain_for_link(k, j)))


class DimensionSizes(NamedTuple):
    M: int
    M_delta: int
    M_R: int


def closed_form_sizes(K: int, m: int, eavesdropper: bool = True) -> DimensionSizes:
    exponent = 1 + K * (K - 1) + (K if eavesdropper else 0)
    return DimensionSizes(
        M=m**exponent,
        M_delta=m ** (exponent - 2) * (m - 1) ** 2,
        M_R=(K - 1) * m**exponent + K * (m + 1) ** exponent,
    )


def receiver_union(K: int, m: int, j: int, eavesdropper: bool = True) -> DimensionSet:
    """R_j: every Direct(j) T_k (k != j) together with every extended T_k."""
    _check_indices(K, m, j)
    union = build_T_extended(K, m, 1, eavesdropper)
    for k in range(2, K + 1):
        union = union | build_T_extended(K, m, k, eavesdropper)
    for k in range(1, K + 1):
        if k != j:
            union = union | shift(build_T(K, m, k, eavesdropper), GainSymbol.direct(j))
    return union


def numeric_distinctness(dims: DimensionSet, gains: ChannelGains, tol: float = DISTINCTNESS_TOL) -> bool:
    """True iff evaluated members are pairwise separated by more than tol * max|value|."""
    if not tol > 0:
        raise InvalidArgument(f"tol must be > 0, got {tol}")
    if len(dims) < 2:
        return True
    values = np.sort(dims.values(gains))
    gaps = np.diff(values)
    return bool(gaps.min() > tol * np.abs(values).max())


# ======================================================
# Stream blocks and receiver occupancy
# ======================================================

@dataclass(frozen=True)
class BlockId:
    """Block of transmitter `tx`: message block v_{tx,dest}, or jamming u_tx when dest == 0."""

    tx: int
    dest: int = 0

    @property
    def is_jamming(self) -> bool:
        return self.dest == 0

    def __str__(self) -> str:
        return f"u{self.tx}" if self.is_jamming else f"v{self.tx}{self.dest}"


class StreamId(NamedTuple):
    block: BlockId
    index: int


def transmit_blocks(K: int, i: int) -> Tuple[BlockId, ...]:
    """Blocks of transmitter i in stacking order: v_i1..v_iK (without v_ii), then u_i."""
    return tuple(BlockId(i, k) for k in range(1, K + 1) if k != i) + (BlockId(i),)


def block_dimensions(K: int, m: int, block: BlockId, eavesdropper: bool = True) -> DimensionSet:
    """v_ik rides on T_k, u_i rides on T_i."""
    return build_T(K, m, block.tx if block.is_jamming else block.dest, eavesdropper)


@dataclass(frozen=True, eq=False)
class OccupancyMap:
    """
    Received dimensions at observer `receiver` (0 = eavesdropper) and the
    streams on each. stream_dims[b][t] is the index, into `dimensions`, of the
    dimension occupied by stream t of blocks[b].
    """

    receiver: int
    K: int
    m: int
    eavesdropper: bool
    dimensions: DimensionSet
    blocks: Tuple[BlockId, ...]
    stream_dims: Tuple[np.ndarray, ...]

    @property
    def n_streams(self) -> int:
        return sum(len(d) for d in self.stream_dims)

    def block_dims(self, block: BlockId) -> np.ndarray:
        return self.stream_dims[self.blocks.index(block)]

    def tx_dims(self, tx: int) -> np.ndarray:
        """Dimension index of every stream of transmitter tx, in stacking order."""
        return np.concatenate([self.block_dims(b) for b in transmit_blocks(self.K, tx)])

    def load(self, blocks: Optional[Iterable[BlockId]] = None) -> np.ndarray:
        """Number of streams (from `blocks`, default all) on every dimension."""
        chosen = self.blocks if blocks is None else tuple(blocks)
        counts = np.zeros(len(self.dimensions), dtype=np.int64)
        for block in chosen:
            counts += np.bincount(self.block_dims(block), minlength=len(self.dimensions))
        return counts

    @property
    def entries(self) -> Dict[Monomial, List[StreamId]]:
        table: Dict[int, List[StreamId]] = {}
        for block, dims in zip(self.blocks, self.stream_dims):
            for t, d in enumerate(dims.tolist()):
                table.setdefault(d, []).append(StreamId(block, t))
        return {self.dimensions.monomial(d): table[d] for d in sorted(table)}

    def desired_blocks(self) -> Tuple[BlockId, ...]:
        if self.receiver == 0:
            return ()
        return tuple(b for b in transmit_blocks(self.K, self.receiver) if not b.is_jamming)

    def validate(self) -> None:
        total = self.load()
        if total.sum() != self.n_streams or np.any(total == 0):
            raise InvalidArgument("occupancy bookkeeping is inconsistent")
        for tx in range(1, self.K + 1):
            dims = self.tx_dims(tx)
            if len(np.unique(dims)) != len(dims):
                raise InvalidArgument(f"transmitter {tx} puts two streams on one dimension")


@lru_cache(maxsize=32)
def receiver_occupancy(K: int, m: int, j: int, eavesdropper: bool = True) -> OccupancyMap:
    """
    Transmitter i's block v_ik arrives on gain(i->j) T_k, u_i on gain(i->j) T_i.
    """
    if j == 0 and not eavesdropper:
        raise InvalidArgument("observer 0 needs an eavesdropper")
    if j != 0:
        _check_indices(K, m, j)
    _check_indices(K, m, 1)

    blocks: List[BlockId] = []
    received: List[np.ndarray] = []
    for i in range(1, K + 1):
        for block in transmit_blocks(K, i):
            blocks.append(block)
            received.append(shift(block_dimensions(K, m, block, eavesdropper), gain_for_link(i, j)).exponents)

    base = _common_base(*received)
    keys = [_row_keys(rows, base) for rows in received]
    unique_keys, first = np.unique(np.concatenate(keys), return_index=True)
    all_rows = np.concatenate(received)[first]
    stream_dims = tuple(np.searchsorted(unique_keys, k) for k in keys)
    for dims in stream_dims:
        dims.setflags(write=False)

    universe = symbol_universe(K, eavesdropper)
    occupancy = OccupancyMap(
        receiver=j,
        K=K,
        m=m,
        eavesdropper=eavesdropper,
        dimensions=DimensionSet(K, m, f"occupied@{j}", universe, all_rows),
        blocks=tuple(blocks),
        stream_dims=stream_dims,
    )
    logger.debug(
        "Occupancy at observer %d: %d streams on %d dimensions", j, occupancy.n_streams, len(all_rows)
    )
    return occupancy


def separability(K: int, m: int, j: int, eavesdropper: bool = True) -> Dict[str, bool]:
    """
    Set-level check that receiver j's desired blocks Direct(j) T_k (k != j) are
    pairwise disjoint and disjoint from every other received block.
    """
    _check_indices(K, m, j)
    desired = [shift(build_T(K, m, k, eavesdropper), GainSymbol.direct(j)) for k in range(1, K + 1) if k != j]
    others = [
        shift(block_dimensions(K, m, block, eavesdropper), gain_for_link(i, j))
        for i in range(1, K + 1)
        for block in transmit_blocks(K, i)
        if not (i == j and not block.is_jamming)
    ]

    pairwise = all(
        desired[a].isdisjoint(desired[b]) for a in range(len(desired)) for b in range(a + 1, len(desired))
    )
    versus_rest = all(d.isdisjoint(o) for d in desired for o in others)
    occupancy = receiver_occupancy(K, m, j, eavesdropper)
    desired_dims = np.concatenate([occupancy.block_dims(b) for b in occupancy.desired_blocks()])
    private = bool(np.all(occupancy.load()[desired_dims] == 1))
    return {
        "desired_pairwise_disjoint": pairwise,
        "desired_disjoint_from_rest": versus_rest,
        "desired_streams_private": private,
    }
