# src/secrecy.py
"""
Information leakage of the cooperative-jamming alignment scheme.

Responsible for:
- per-dimension coefficient distributions under a conditioning set
- exact discrete conditional entropies H(sum_k gain_kj x_k | V)
- leakage I(V_i; observer j | V_-i) as a difference of those entropies
- a brute-force enumeration oracle for small systems
- closed-form leakage bounds and the Fano lower bound

Every stream occupies exactly one received dimension and streams are
independent, so per-dimension coefficients are independent: the conditional
entropy is the sum over dimensions of the entropy of the convolution of the
unconditioned streams there. Rationally independent dimension values make
the received point a bijection of the coefficient vector.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Optional, Sequence

import numpy as np
from scipy.stats import entropy

from config import ORACLE_BUDGET, SecrecyModel
from dimensions import BlockId, Monomial, OccupancyMap, closed_form_sizes, receiver_occupancy, transmit_blocks
from errors import Infeasible, InvalidArgument, InvalidConfiguration

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConditioningSet:
    """Message blocks whose symbols are known; jamming blocks never are."""

    known_blocks: FrozenSet[BlockId]

    def __post_init__(self):
        blocks = frozenset(self.known_blocks)
        jamming = sorted(str(b) for b in blocks if b.is_jamming)
        if jamming:
            raise InvalidArgument(f"jamming blocks cannot be conditioned on: {', '.join(jamming)}")
        object.__setattr__(self, "known_blocks", blocks)

    @classmethod
    def messages_of(cls, K: int, transmitters: Iterable[int]) -> "ConditioningSet":
        return cls(frozenset(b for i in transmitters for b in transmit_blocks(K, i) if not b.is_jamming))

    @classmethod
    def all_messages(cls, K: int) -> "ConditioningSet":
        """V_1^K."""
        return cls.messages_of(K, range(1, K + 1))

    @classmethod
    def all_messages_except(cls, K: int, i: int) -> "ConditioningSet":
        """V_-i."""
        return cls.messages_of(K, (k for k in range(1, K + 1) if k != i))

    def __contains__(self, block: BlockId) -> bool:
        return block in self.known_blocks


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Distribution on the integers start, start+1, ..."""

    start: int
    probabilities: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.probabilities))

    def entropy_bits(self) -> float:
        return float(entropy(self.probabilities, base=2)) if len(self.probabilities) > 1 else 0.0


@lru_cache(maxsize=256)
def uniform_sum_weights(n: int, Q: int) -> tuple:
    """Integer weights of the sum of n independent uniform{-Q..Q} variables."""
    weights = np.ones(1, dtype=np.int64)
    for _ in range(n):
        weights = np.convolve(weights, np.ones(2 * Q + 1, dtype=np.int64))
    return tuple(int(w) for w in weights)


def uniform_sum_distribution(n: int, Q: int) -> DiscreteDistribution:
    weights = np.array(uniform_sum_weights(n, Q), dtype=float)
    return DiscreteDistribution(-n * Q, weights / weights.sum())


@lru_cache(maxsize=256)
def uniform_sum_entropy(n: int, Q: int) -> float:
    return uniform_sum_distribution(n, Q).entropy_bits()


def unconditioned_load(occupancy: OccupancyMap, cond: ConditioningSet) -> np.ndarray:
    """Streams outside `cond` on every dimension."""
    return occupancy.load(b for b in occupancy.blocks if b not in cond)


def per_dimension_distributions(
    occupancy: OccupancyMap, cond: ConditioningSet, Q: int
) -> Dict[Monomial, DiscreteDistribution]:
    """
    Coefficient distribution of every occupied dimension given `cond`. Known
    streams only shift the coefficient, so they are left out.
    """
    load = unconditioned_load(occupancy, cond)
    return {
        occupancy.dimensions.monomial(d): uniform_sum_distribution(int(n), Q)
        for d, n in enumerate(load.tolist())
    }


def exact_conditional_entropy(occupancy: OccupancyMap, cond: ConditioningSet, Q: int) -> float:
    if Q < 0:
        raise InvalidConfiguration(f"Q must be >= 0, got {Q}")
    histogram = np.bincount(unconditioned_load(occupancy, cond))
    # fixed ascending order keeps the floating-point sum reproducible
    return math.fsum(int(count) * uniform_sum_entropy(n, Q) for n, count in enumerate(histogram) if count and n)


@dataclass(frozen=True)
class LeakageReport:
    i: int
    j: int
    H_cond_minus_i: float
    H_cond_all: float
    leakage_bits: float
    bound_bits: float
    engine: str
    dof_fraction: Optional[float] = None

    def to_record(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "H_cond_minus_i": self.H_cond_minus_i,
            "H_cond_all": self.H_cond_all,
            "leakage_bits": self.leakage_bits,
            "bound_bits": self.bound_bits,
            "engine": self.engine,
            "dof_fraction": self.dof_fraction,
        }


def _check_pair(i: int, j: int, K: int, eavesdropper: bool) -> None:
    if not 1 <= i <= K:
        raise InvalidArgument(f"message index {i} outside 1..{K}")
    if not 0 <= j <= K:
        raise InvalidArgument(f"observer index {j} outside 0..{K}")
    if i == j:
        raise InvalidArgument("a message does not leak to its own receiver")
    if j == 0 and not eavesdropper:
        raise InvalidArgument("observer 0 needs an eavesdropper")


def leakage_bound_bits(K: int, m: int, Q: int, eavesdropper: bool = True) -> float:
    """
    log2[(2Q+1)^M (4Q+1)^((K-1)M_delta) (2Q+1)^(2(K-1)(M-M_delta))] - K M log2(2Q+1).
    """
    M, M_delta, _ = closed_form_sizes(K, m, eavesdropper)
    plain = math.log2(2 * Q + 1)
    return (M + 2 * (K - 1) * (M - M_delta) - K * M) * plain + (K - 1) * M_delta * math.log2(4 * Q + 1)


def leakage_dof_fraction(leakage_bits: float, P: float) -> float:
    """leakage_bits / ((1/2) log2 P)."""
    if not P > 1:
        raise InvalidConfiguration(f"P must be > 1 for a d.o.f. fraction, got {P}")
    return leakage_bits / (0.5 * math.log2(P))


def _report(i, j, K, m, Q, eavesdropper, h_minus_i, h_all, engine, P) -> LeakageReport:
    leak = max(0.0, h_minus_i - h_all)
    return LeakageReport(
        i=i,
        j=j,
        H_cond_minus_i=h_minus_i,
        H_cond_all=h_all,
        leakage_bits=leak,
        bound_bits=leakage_bound_bits(K, m, Q, eavesdropper),
        engine=engine,
        dof_fraction=None if P is None else leakage_dof_fraction(leak, P),
    )


def leakage_exact(
    i: int, j: int, K: int, m: int, Q: int, eavesdropper: bool = True, P: Optional[float] = None
) -> LeakageReport:
    """I(V_i; noiseless observation at j | V_-i) = H(.|V_-i) - H(.|V_1^K)."""
    _check_pair(i, j, K, eavesdropper)
    occupancy = receiver_occupancy(K, m, j, eavesdropper)
    h_minus_i = exact_conditional_entropy(occupancy, ConditioningSet.all_messages_except(K, i), Q)
    h_all = exact_conditional_entropy(occupancy, ConditioningSet.all_messages(K), Q)
    logger.debug("Leakage of message %d at observer %d: %.6f bits", i, j, h_minus_i - h_all)
    return _report(i, j, K, m, Q, eavesdropper, h_minus_i, h_all, "exact", P)


# ======================================================
# Brute-force oracle
# ======================================================

def _counts_entropy(rows: np.ndarray) -> float:
    _, counts = np.unique(rows, axis=0, return_counts=True)
    return float(entropy(counts, base=2))


def brute_force_oracle(
    i: int,
    j: int,
    K: int,
    m: int,
    Q: int,
    cond: Optional[ConditioningSet] = None,
    eavesdropper: bool = True,
    budget: int = ORACLE_BUDGET,
) -> float:
    """
    H(observation at j | cond) by enumerating every joint symbol tuple.
    `cond` defaults to V_-i.
    """
    _check_pair(i, j, K, eavesdropper)
    if Q < 0:
        raise InvalidConfiguration(f"Q must be >= 0, got {Q}")
    occupancy = receiver_occupancy(K, m, j, eavesdropper)
    cond = ConditioningSet.all_messages_except(K, i) if cond is None else cond

    n_streams = occupancy.n_streams
    outcomes = (2 * Q + 1) ** n_streams
    if outcomes > budget:
        raise Infeasible(f"{outcomes} joint outcomes exceed the oracle budget of {budget}")
    logger.debug("Oracle enumerating %d outcomes at observer %d", outcomes, j)

    # every joint tuple once, so counts are proportional to probabilities
    tuples = np.indices((2 * Q + 1,) * n_streams, dtype=np.int8).reshape(n_streams, -1).T - Q
    stream_dims = np.concatenate(occupancy.stream_dims)
    coefficients = np.zeros((tuples.shape[0], len(occupancy.dimensions)), dtype=np.int16)
    for column, d in enumerate(stream_dims.tolist()):
        coefficients[:, d] += tuples[:, column]

    offsets = np.cumsum([0] + [len(d) for d in occupancy.stream_dims])
    known = [
        np.arange(offsets[b], offsets[b + 1]) for b, block in enumerate(occupancy.blocks) if block in cond
    ]
    if not known:
        return _counts_entropy(coefficients)
    condition = tuples[:, np.concatenate(known)]
    joint = np.concatenate([coefficients, condition.astype(np.int16)], axis=1)
    return _counts_entropy(joint) - _counts_entropy(condition)


def leakage_oracle(
    i: int, j: int, K: int, m: int, Q: int, eavesdropper: bool = True, budget: int = ORACLE_BUDGET
) -> LeakageReport:
    h_minus_i = brute_force_oracle(i, j, K, m, Q, ConditioningSet.all_messages_except(K, i), eavesdropper, budget)
    h_all = brute_force_oracle(i, j, K, m, Q, ConditioningSet.all_messages(K), eavesdropper, budget)
    return _report(i, j, K, m, Q, eavesdropper, h_minus_i, h_all, "oracle", None)


# ======================================================
# Closed forms
# ======================================================

def alignment_denominator(K: int, m: int, delta: float) -> float:
    # K - 1 + K (1 + 1/m)^(K^2+1) + delta / m^(K^2+1), in log space to avoid overflow
    exponent = K * K + 1
    return K - 1 + K * math.exp(exponent * math.log1p(1 / m)) + delta * math.exp(-exponent * math.log(m))


def leakage_bound_dof(K: int, m: int, delta: float) -> float:
    """Coefficient of (1/2) log P bounding the leakage of one message at one observer."""
    if K < 2 or m < 1:
        raise InvalidConfiguration(f"need K >= 2 and m >= 1, got K={K}, m={m}")
    if not 0 <= delta < 1:
        raise InvalidConfiguration(f"delta must lie in [0, 1), got {delta}")
    return K * (2 * m - 1) / m**2 * (1 - delta) / alignment_denominator(K, m, delta)


def fano_mi_lower_bound(H_V: float, pe: float, alphabet_log: float) -> float:
    """I(V; Y) >= H(V) - 1 - pe * log|V|, floored at 0."""
    if not 0 <= pe <= 1:
        raise InvalidArgument(f"pe must lie in [0, 1], got {pe}")
    return max(0.0, H_V - 1 - pe * alphabet_log)


def all_observers(
    K: int, i: int, eavesdropper: bool = True, model: Optional[str] = None
) -> Sequence[int]:
    """
    Observers that must not learn message i under the secrecy model.

    ee keeps it from the eavesdropper (0) only, cm from the other receivers,
    cm-ee from both. Without a model, cm-ee when an eavesdropper exists and
    cm otherwise.
    """
    return SecrecyModel.resolve(model, eavesdropper).observers(K, i)


def leakage_table(
    K: int, m: int, Q: int, eavesdropper: bool = True, model: Optional[str] = None
) -> Dict[tuple, LeakageReport]:
    """leakage_exact for every (message, observer) pair, keyed by (i, j)."""
    return {
        (i, j): leakage_exact(i, j, K, m, Q, eavesdropper)
        for i in range(1, K + 1)
        for j in all_observers(K, i, eavesdropper, model)
    }

