# src/main.py
"""
Main entry point for the secure alignment lab.

Subcommands: dims, leakage, rates, simulate, sweep, pam, report.
Every CLI flag overrides the field of the same name in --config.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from analysis import converse_dof, positive_rate_threshold, rate_grid
from channel import GainSymbol, sample_gains
from config import (
    CLOSED_FORM_NOTE,
    COMMANDS,
    O_LOG_P_NOTE,
    ORACLE_BUDGET,
    PAM_NOTE,
    SPACING_NOTE,
    ExperimentConfig,
    SecrecyModel,
)
from dimensions import (
    alignment_example_set,
    closed_form_sizes,
    receiver_occupancy,
    receiver_union,
    separability,
    shift,
)
from errors import AlignmentError, InvalidConfiguration
from experiments import (
    OperatingPoint,
    distinctness_checks,
    leakage_sweep,
    simulate_error_rate,
    simulate_pam_rate,
)
from pipeline import CSV_COLUMNS, envelope, output_path, write_csv, write_json
from report import generate_pdf_report
from secrecy import leakage_exact, leakage_oracle
from signaling import build_layout, constellation_size, spacing_for

logger = logging.getLogger(__name__)


# ======================================================
# Subcommands
# ======================================================

def run_dims(config: ExperimentConfig) -> List[str]:
    K, m, eave = config.K, config.m, config.eavesdropper
    sizes = closed_form_sizes(K, m, eave)
    observers = list(range(1, K + 1)) + ([0] if eave else [])
    example = alignment_example_set(m)

    results = {
        "M": sizes.M,
        "M_delta": sizes.M_delta,
        "M_R": sizes.M_R,
        "R_1_enumerated": len(receiver_union(K, m, 1, eave)),
        "occupied_dimensions": {str(j): len(receiver_occupancy(K, m, j, eave).dimensions) for j in observers},
        "separability": {str(j): separability(K, m, j, eave) for j in range(1, K + 1)},
        "example_intersection": len(
            shift(example, GainSymbol.direct(1)) & shift(example, GainSymbol.cross(2, 1))
        ),
    }
    gains = sample_gains(K, eave, config.resolved_seed)
    return [write_json(envelope(config, gains, **results), output_path(config, "dims.json"))]


def run_leakage(config: ExperimentConfig) -> List[str]:
    K, m, eave = config.K, config.m, config.eavesdropper
    Q = config.Q
    if Q is None:
        Q = constellation_size(config.P, config.delta, closed_form_sizes(K, m, eave).M_R)

    report = leakage_exact(config.message, config.observer, K, m, Q, eave, P=config.P)
    results = {"Q": Q, "leakage": report.to_record()}
    n_streams = receiver_occupancy(K, m, config.observer, eave).n_streams
    if (2 * Q + 1) ** n_streams <= ORACLE_BUDGET:
        results["oracle"] = leakage_oracle(config.message, config.observer, K, m, Q, eave).to_record()
    else:
        results["oracle"] = None

    gains = sample_gains(K, eave, config.resolved_seed)
    points = []
    if config.P is not None and Q >= 1:
        layouts = [build_layout(K, m, i, eave) for i in range(1, K + 1)]
        a, gamma = spacing_for(config.P, Q, gains, layouts)
        points.append(OperatingPoint(config.P, Q, a, gamma))
    else:
        results["parameters_note"] = SPACING_NOTE
    return [write_json(envelope(config, gains, points, **results), output_path(config, "leakage.json"))]


def run_rates(config: ExperimentConfig) -> List[str]:
    rows = [
        {
            "K": r.K,
            "m": r.m,
            "delta": r.delta,
            "P": r.P,
            "per_user_rate": r.per_user_rate_bits,
            "sum_rate": r.sum_rate_bits,
            "dof_coeff": r.dof_coefficient,
            "converse_dof": r.converse_dof,
        }
        for r in rate_grid(config.K, config.m_grid, config.delta, config.P_grid)
    ]
    converse = converse_dof(config.K)
    results = {
        "positive_rate_threshold": positive_rate_threshold(config.K),
        "converse_dof": f"{converse.numerator}/{converse.denominator}",
        "note": O_LOG_P_NOTE,
        "gains_note": CLOSED_FORM_NOTE,
    }
    return [
        write_csv(rows, output_path(config, "rates.csv"), CSV_COLUMNS["rates"]),
        write_json(envelope(config, **results), output_path(config, "rates.json")),
    ]


def run_simulate(config: ExperimentConfig) -> List[str]:
    rows, points = simulate_error_rate(
        config.K,
        config.m,
        config.P_grid,
        config.trials,
        config.seed,
        Q=config.Q,
        delta=config.delta,
        eavesdropper=config.eavesdropper,
        noise_std=config.noise_std,
        budget=config.budget,
        workers=config.workers,
    )
    gains = sample_gains(config.K, config.eavesdropper, config.seed)
    return [
        write_csv(rows, output_path(config, "simulate.csv"), CSV_COLUMNS["simulate"]),
        write_json(envelope(config, gains, points), output_path(config, "simulate.json")),
    ]


def run_sweep(config: ExperimentConfig) -> List[str]:
    leak_rows, rate_rows = leakage_sweep(
        config.K, config.m_grid, config.Q_grid, config.eavesdropper, config.model, config.seed
    )
    distinct = distinctness_checks(config.K, config.m_grid, config.seed, config.eavesdropper)
    gains = sample_gains(config.K, config.eavesdropper, config.seed)
    results = {
        "model": config.resolved_model.value,
        "receiver_1_distinct": {str(m): ok for m, ok in distinct.items()},
    }
    return [
        write_csv(leak_rows, output_path(config, "sweep.csv"), CSV_COLUMNS["sweep"]),
        write_csv(rate_rows, output_path(config, "sweep_rates.csv"), CSV_COLUMNS["sweep_rates"]),
        write_json(envelope(config, gains, **results), output_path(config, "sweep.json")),
    ]


def run_pam(config: ExperimentConfig) -> List[str]:
    rows, slope = simulate_pam_rate(
        config.P_grid, config.delta, config.trials, config.seed, config.noise_std, config.workers
    )
    points = [OperatingPoint(row["P"], row["Q"], row["a"], 1.0) for row in rows]
    return [
        write_csv(rows, output_path(config, "pam.csv"), CSV_COLUMNS["pam"]),
        write_json(
            envelope(config, operating_points=points, gamma_note=PAM_NOTE, gains_note=PAM_NOTE, dof_slope=slope),
            output_path(config, "pam.json"),
        ),
    ]


def run_report(config: ExperimentConfig) -> List[str]:
    return [generate_pdf_report(config.resolved_output_dir, output_path(config, "report.pdf"))]


HANDLERS = {
    "dims": run_dims,
    "leakage": run_leakage,
    "rates": run_rates,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "pam": run_pam,
    "report": run_report,
}


def run(config: ExperimentConfig) -> int:
    """Execute one validated configuration; returns the process exit code."""
    try:
        config.validate()
        print(f"▶ Running {config.command} (K={config.K})", file=sys.stderr)
        for path in HANDLERS[config.command](config):
            print(f"✅ Written: {path}", file=sys.stderr)
    except AlignmentError as exc:
        return _fail(exc)
    return 0


def _fail(exc: AlignmentError) -> int:
    logger.debug("Run failed", exc_info=exc)
    print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}, sort_keys=True))
    return 2


# ======================================================
# Argument parsing
# ======================================================

def _parse_list(text: Optional[str], cast, name: str):
    if text is None:
        return None
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise InvalidConfiguration(f"--{name} expects a comma-separated list: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON document with ExperimentConfig fields")
    common.add_argument("--K", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--Q", type=int)
    common.add_argument("--P", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--eavesdropper", dest="eavesdropper", action="store_const", const=True)
    common.add_argument("--no-eavesdropper", dest="eavesdropper", action="store_const", const=False)
    common.add_argument("--model", help="secrecy model: " + ", ".join(m.value for m in SecrecyModel))
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--message", type=int)
    common.add_argument("--observer", type=int)
    common.add_argument("--m-grid", dest="m_grid")
    common.add_argument("--Q-grid", dest="Q_grid")
    common.add_argument("--P-grid", dest="P_grid")
    common.add_argument("--noise-std", dest="noise_std", type=float)
    common.add_argument("--budget", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="secure-alignment-lab", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "verbose", "m_grid", "Q_grid", "P_grid")
    }
    overrides["m_grid"] = _parse_list(args.m_grid, int, "m-grid")
    overrides["Q_grid"] = _parse_list(args.Q_grid, int, "Q-grid")
    overrides["P_grid"] = _parse_list(args.P_grid, float, "P-grid")
    return ExperimentConfig.from_sources(args.command, args.config, **overrides)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
    except AlignmentError as exc:
        return _fail(exc)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
