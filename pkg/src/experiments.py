# src/experiments.py
"""
Experiment orchestration for the CLI subcommands.

Responsible for:
- deterministic per-chunk random generators derived from (seed, point, chunk)
- Monte Carlo symbol error rates of nearest-point decoding at receiver 1
- the point-to-point PAM reliable-rate experiment and its d.o.f. slope
- exact leakage sweeps and desk-scale secrecy rates over (m, Q) grids

Every experiment returns plain row dictionaries; writing them out is the
pipeline's job.
"""

import logging
import math
from functools import lru_cache
from multiprocessing import Pool
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from analysis import desk_secrecy_rate, dof_slope
from channel import LinkConfig, apply_channel_batch, sample_gains
from config import CHUNK_SIZE, DECODE_BUDGET, DEFAULT_NOISE_STD
from dimensions import closed_form_sizes, numeric_distinctness, receiver_occupancy, receiver_union
from errors import InvalidConfiguration
from receiver import NearestPointDecoder, min_distance
from secrecy import fano_mi_lower_bound, leakage_table
from signaling import (
    build_layout,
    encode_batch,
    pam_demodulate,
    pam_parameters,
    random_symbol_batch,
    select_parameters,
    spacing_for,
)

logger = logging.getLogger(__name__)


def derive_rng(seed: int, point: int, chunk: int) -> np.random.Generator:
    """Generator for chunk `chunk` of grid point `point`; independent of worker layout."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, chunk)))


def chunk_sizes(trials: int, chunk_size: int = CHUNK_SIZE) -> List[int]:
    if trials < 1:
        raise InvalidConfiguration(f"trials must be >= 1, got {trials}")
    full, rest = divmod(trials, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _run_chunks(worker, tasks: Sequence[tuple], workers: int) -> list:
    # results come back in task order whatever the pool does
    if workers <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with Pool(min(workers, len(tasks))) as pool:
        return pool.map(worker, tasks)


# ======================================================
# Interference-channel Monte Carlo
# ======================================================

class OperatingPoint(NamedTuple):
    P: float
    Q: int
    a: float
    gamma: float


@lru_cache(maxsize=8)
def _decoder(K: int, m: int, eavesdropper: bool, gain_seed: int, a: float, Q: int, budget: int) -> NearestPointDecoder:
    gains = sample_gains(K, eavesdropper, gain_seed)
    return NearestPointDecoder(receiver_occupancy(K, m, 1, eavesdropper), gains, a, Q, budget)


def operating_points(
    K: int, m: int, eavesdropper: bool, gain_seed: int, P_grid: Sequence[float], Q=None, delta=None
) -> List[OperatingPoint]:
    """(Q, a, gamma) per power: explicit Q, or Q derived with L = M_R."""
    gains = sample_gains(K, eavesdropper, gain_seed)
    layouts = [build_layout(K, m, i, eavesdropper) for i in range(1, K + 1)]
    points = []
    for P in P_grid:
        if Q is not None:
            a, gamma = spacing_for(P, Q, gains, layouts)
            points.append(OperatingPoint(P, Q, a, gamma))
        else:
            L = closed_form_sizes(K, m, eavesdropper).M_R
            points.append(OperatingPoint(P, *select_parameters(P, delta, L, gains, layouts)))
    return points


def _simulate_chunk(task: tuple) -> int:
    K, m, eavesdropper, seed, point, chunk, n, P, Q, a, noise_std, budget = task
    rng = derive_rng(seed, point, chunk)
    gains = sample_gains(K, eavesdropper, seed)
    decoder = _decoder(K, m, eavesdropper, seed, a, Q, budget)

    inputs = np.empty((n, K))
    truth = None
    for i in range(1, K + 1):
        layout = build_layout(K, m, i, eavesdropper)
        symbols = random_symbol_batch(layout, Q, rng, n)
        inputs[:, i - 1] = encode_batch(symbols, layout, a, gains)
        if i == 1:
            # v_1k blocks lead the stack, u_1 closes it
            truth = symbols[:, : layout.size - len(layout.blocks[-1][1])]

    outputs = apply_channel_batch(gains, inputs, LinkConfig(P, noise_std, seed), rng)
    decoded = decoder.decode_desired(outputs[:, 0])
    return int(np.count_nonzero(decoded != truth))


def simulate_error_rate(
    K: int,
    m: int,
    P_grid: Sequence[float],
    trials: int,
    seed: int,
    Q=None,
    delta=None,
    eavesdropper: bool = True,
    noise_std: float = DEFAULT_NOISE_STD,
    budget: int = DECODE_BUDGET,
    workers: int = 1,
) -> Tuple[List[Dict], List[OperatingPoint]]:
    """
    Symbol error rate of receiver 1 over its (K-1)M desired symbols, per P.
    """
    if (Q is None) == (delta is None):
        raise InvalidConfiguration("set exactly one of Q or delta")

    points = operating_points(K, m, eavesdropper, seed, P_grid, Q, delta)
    gains = sample_gains(K, eavesdropper, seed)
    occupancy = receiver_occupancy(K, m, 1, eavesdropper)
    desired = (K - 1) * closed_form_sizes(K, m, eavesdropper).M
    sizes = chunk_sizes(trials)

    rows = []
    for p, point in enumerate(points):
        logger.info("simulate: P=%g, Q=%d, a=%.6g over %d chunks", point.P, point.Q, point.a, len(sizes))
        tasks = [
            (K, m, eavesdropper, seed, p, c, n, point.P, point.Q, point.a, noise_std, budget)
            for c, n in enumerate(sizes)
        ]
        errors = sum(_run_chunks(_simulate_chunk, tasks, workers))
        d_min = min_distance(
            occupancy, gains, point.a, point.Q, budget, sampling=True, rng=derive_rng(seed, p, len(sizes))
        )
        rows.append(
            {
                "P": point.P,
                "trials": trials,
                "symbol_errors": errors,
                "pe_estimate": errors / (trials * desired),
                "d_min_mode": d_min.mode,
                "d_min": d_min.value,
            }
        )
    return rows, points


# ======================================================
# Point-to-point PAM
# ======================================================

def _pam_chunk(task: tuple) -> int:
    seed, point, chunk, n, Q, a, noise_std = task
    rng = derive_rng(seed, point, chunk)
    sent = rng.integers(-Q, Q + 1, size=n)
    received = a * sent + rng.normal(0.0, noise_std, size=n)
    return int(np.count_nonzero(pam_demodulate(received, a, Q) != sent))


def simulate_pam_rate(
    P_grid: Sequence[float],
    delta: float,
    trials: int,
    seed: int,
    noise_std: float = DEFAULT_NOISE_STD,
    workers: int = 1,
) -> Tuple[List[Dict], Optional[float]]:
    """
    Reliable rate of uncoded PAM with Q = P^((1-delta)/2), a = P^(delta/2):
    Fano bound log2(2Q+1) - 1 - pe log2(2Q+1) per power, plus the fitted slope.
    """
    sizes = chunk_sizes(trials)
    rows = []
    for p, P in enumerate(P_grid):
        Q, a, _ = pam_parameters(P, delta)
        tasks = [(seed, p, c, n, Q, a, noise_std) for c, n in enumerate(sizes)]
        errors = sum(_run_chunks(_pam_chunk, tasks, workers))
        pe = errors / trials
        alphabet = math.log2(2 * Q + 1)
        rows.append(
            {
                "P": P,
                "Q": Q,
                "a": a,
                "trials": trials,
                "symbol_errors": errors,
                "pe_estimate": pe,
                "rate_bits": fano_mi_lower_bound(alphabet, pe, alphabet),
            }
        )
        logger.info("pam: P=%g, Q=%d, pe=%.4g", P, Q, pe)

    slope = dof_slope((row["P"], row["rate_bits"]) for row in rows) if len(rows) >= 3 else None
    return rows, slope


# ======================================================
# Exact sweeps
# ======================================================

def leakage_sweep(
    K: int,
    m_grid: Sequence[int],
    Q_grid: Sequence[int],
    eavesdropper: bool = True,
    model: Optional[str] = None,
    seed: Optional[int] = None,
) -> Tuple[List[Dict], List[Dict]]:
    """
    Leakage rows per (m, Q, message, observer) and secrecy-rate rows per (m, Q, message).

    With a seed, every rate row carries the exact-recovery error rate
    measured over DESK_TRIALS noiseless points; without one pe is 0.
    """
    leak_rows, rate_rows = [], []
    for point, (m, Q) in enumerate((m, Q) for m in m_grid for Q in Q_grid):
        table = leakage_table(K, m, Q, eavesdropper, model)
        for (i, j), report in table.items():
            leak_rows.append(
                {
                    "K": K,
                    "m": m,
                    "Q": Q,
                    "message": i,
                    "observer": j,
                    "H_cond_minus_i": report.H_cond_minus_i,
                    "H_cond_all": report.H_cond_all,
                    "leakage_bits": report.leakage_bits,
                    "bound_bits": report.bound_bits,
                }
            )
        for i in range(1, K + 1):
            leaks = {j: r.leakage_bits for (msg, j), r in table.items() if msg == i}
            rng = derive_rng(seed, point, i) if seed is not None else None
            rate = desk_secrecy_rate(K, m, Q, i, eavesdropper, leaks=leaks, model=model, rng=rng)
            rate_rows.append(
                {
                    "K": K,
                    "m": m,
                    "Q": Q,
                    "message": i,
                    "pe_estimate": rate.pe,
                    "mi_main_bits": rate.mi_main_bits,
                    "max_leakage_bits": rate.leakage_bits[rate.worst_observer],
                    "worst_observer": rate.worst_observer,
                    "secrecy_rate_bits": rate.secrecy_rate_bits,
                }
            )
        logger.info("sweep: m=%d, Q=%d done (%d pairs)", m, Q, len(table))
    return leak_rows, rate_rows


def distinctness_checks(K: int, m_grid: Sequence[int], seed: int, eavesdropper: bool = True) -> Dict[int, bool]:
    """Numeric distinctness of receiver 1's union R_1 under the sampled gains, per m."""
    gains = sample_gains(K, eavesdropper, seed)
    return {m: numeric_distinctness(receiver_union(K, m, 1, eavesdropper), gains) for m in m_grid}
