# src/analysis.py
"""
Analysis module for the secure alignment lab.

Responsible for:
- the closed-form achievable secrecy rate and its d.o.f. coefficient
- the converse sum secure d.o.f. K(K-1)/(2K-1), as an exact fraction
- assembling secrecy rates from a main-link term and leakage terms
- least-squares d.o.f. slopes from (P, rate) samples
"""

import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from config import DESK_TRIALS, O_LOG_P_NOTE
from dimensions import closed_form_sizes
from errors import InvalidArgument, InvalidConfiguration
from receiver import exact_error_rate
from secrecy import alignment_denominator, all_observers, fano_mi_lower_bound, leakage_bound_dof, leakage_exact

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateReport:
    K: int
    m: int
    delta: float
    P: float
    per_user_rate_bits: float
    sum_rate_bits: float
    dof_coefficient: float
    converse_dof: float
    note: str = O_LOG_P_NOTE

    def to_record(self) -> Dict[str, float]:
        return asdict(self)


def converse_dof(K: int) -> Fraction:
    if K < 2:
        raise InvalidConfiguration(f"K must be >= 2, got {K}")
    return Fraction(K * (K - 1), 2 * K - 1)


def main_term_dof(K: int, m: int, delta: float) -> float:
    """Fano coefficient of (1/2) log P in I(V_i; Y_i)."""
    return (K - 1) * (1 - delta) / alignment_denominator(K, m, delta)


def per_user_dof(K: int, m: int, delta: float) -> float:
    """[(K-1) - K(2m-1)/m^2](1-delta) / denominator, before flooring."""
    return main_term_dof(K, m, delta) - leakage_bound_dof(K, m, delta)


def achievable_rate_formula(K: int, m: int, delta: float, P: float) -> RateReport:
    if K < 2 or m < 1:
        raise InvalidConfiguration(f"need K >= 2 and m >= 1, got K={K}, m={m}")
    if not 0 <= delta < 1:
        raise InvalidConfiguration(f"delta must lie in [0, 1), got {delta}")
    if not P > 1:
        raise InvalidConfiguration(f"P must be > 1, got {P}")

    per_user = max(0.0, per_user_dof(K, m, delta))
    half_log_p = 0.5 * math.log2(P)
    return RateReport(
        K=K,
        m=m,
        delta=delta,
        P=P,
        per_user_rate_bits=per_user * half_log_p,
        sum_rate_bits=K * per_user * half_log_p,
        dof_coefficient=K * per_user,
        converse_dof=float(converse_dof(K)),
    )


def positive_rate_threshold(K: int) -> int:
    """Smallest m with (K-1) > K(2m-1)/m^2."""
    if K < 2:
        raise InvalidConfiguration(f"K must be >= 2, got {K}")
    m = 1
    while not (K - 1) * m * m > K * (2 * m - 1):
        m += 1
    return m


def secrecy_rate_bound(mi_main: float, mi_leak_list: Sequence[float]) -> float:
    """max(0, I(V_i; Y_i) - max_j I(V_i; Y_j | V_-i))."""
    if mi_main < 0 or any(leak < 0 for leak in mi_leak_list):
        raise InvalidArgument("mutual informations must be nonnegative")
    if not mi_leak_list:
        return mi_main
    return max(0.0, mi_main - max(mi_leak_list))


def dof_slope(samples: Iterable[Tuple[float, float]]) -> float:
    """Least-squares slope of rate (bits) against (1/2) log2 P."""
    samples = list(samples)
    if len(samples) < 3:
        raise InvalidArgument(f"need at least 3 samples, got {len(samples)}")
    powers = [p for p, _ in samples]
    if any(p <= 1 for p in powers) or len(set(powers)) != len(powers):
        raise InvalidArgument("P values must be distinct and > 1")
    fit = linregress([0.5 * math.log2(p) for p in powers], [r for _, r in samples])
    return float(fit.slope)


@dataclass(frozen=True)
class DeskRate:
    message: int
    mi_main_bits: float
    leakage_bits: Dict[int, float]
    secrecy_rate_bits: float
    pe: float = 0.0

    @property
    def worst_observer(self) -> int:
        return max(self.leakage_bits, key=lambda j: (self.leakage_bits[j], -j))


def desk_secrecy_rate(
    K: int,
    m: int,
    Q: int,
    message: int,
    eavesdropper: bool = True,
    pe: Optional[float] = None,
    leaks: Optional[Mapping[int, float]] = None,
    model: Optional[str] = None,
    rng: Optional[np.random.Generator] = None,
    trials: int = DESK_TRIALS,
) -> DeskRate:
    """
    Secrecy rate of one message at desk scale: Fano on the exact receiver
    minus the worst exact leakage over the observers of the secrecy model.

    pe is measured with exact_recover over `trials` noiseless points when
    `rng` is given and pe is not; otherwise it defaults to 0. Precomputed
    `leaks` (observer -> bits) skip the entropy engine.
    """
    if pe is None:
        pe = exact_error_rate(K, m, message, Q, trials, rng, eavesdropper) if rng is not None and Q >= 1 else 0.0
    M = closed_form_sizes(K, m, eavesdropper).M
    h_v = (K - 1) * M * math.log2(2 * Q + 1)
    mi_main = fano_mi_lower_bound(h_v, pe, h_v)
    observers = all_observers(K, message, eavesdropper, model)
    if leaks is None:
        leaks = {j: leakage_exact(message, j, K, m, Q, eavesdropper).leakage_bits for j in observers}
    else:
        leaks = {j: leaks[j] for j in observers}
    rate = secrecy_rate_bound(mi_main, list(leaks.values()))
    logger.debug("Desk rate K=%d m=%d Q=%d message %d: %.4f bits (pe %.3g)", K, m, Q, message, rate, pe)
    return DeskRate(message, mi_main, leaks, rate, pe)


def rate_grid(K: int, m_grid: Sequence[int], delta: float, P_grid: Sequence[float]) -> List[RateReport]:
    return [achievable_rate_formula(K, m, delta, P) for m in m_grid for P in P_grid]
