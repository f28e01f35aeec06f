# src/pipeline.py
"""
Deterministic report emission for the CLI.

Responsible for:
- writing experiment rows to CSV with a stable column order
- writing JSON documents with sorted keys
- the envelope every report carries (version, resolved config, gains, Q/a/gamma)

Identical inputs give byte-identical files: fixed column order, fixed float
format, CRLF line endings and no timestamps.
"""

import json
import os
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from channel import ChannelGains
from config import CSV_FLOAT_FORMAT, CSV_LINE_TERMINATOR, GAMMA_NOTE, LIBRARY_VERSION, ExperimentConfig
from errors import InvalidArgument

# Column order of every CSV the CLI writes
CSV_COLUMNS = {
    "rates": ["K", "m", "delta", "P", "per_user_rate", "sum_rate", "dof_coeff", "converse_dof"],
    "simulate": ["P", "trials", "symbol_errors", "pe_estimate", "d_min_mode", "d_min"],
    "sweep": ["K", "m", "Q", "message", "observer", "H_cond_minus_i", "H_cond_all", "leakage_bits", "bound_bits"],
    "sweep_rates": ["K", "m", "Q", "message", "pe_estimate", "mi_main_bits", "max_leakage_bits", "worst_observer", "secrecy_rate_bits"],
    "pam": ["P", "Q", "a", "trials", "symbol_errors", "pe_estimate", "rate_bits"],
}


def write_csv(rows: List[Dict], output_path: str, columns: Sequence[str]) -> str:
    """
    Write rows to CSV with the given column order.
    """
    if not rows:
        raise InvalidArgument(f"No rows to write to {output_path}")
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise InvalidArgument(f"Rows lack columns {missing}")

    frame = pd.DataFrame(rows, columns=list(columns))
    frame.to_csv(
        output_path,
        index=False,
        float_format=CSV_FLOAT_FORMAT,
        lineterminator=CSV_LINE_TERMINATOR,
        encoding="utf-8",
    )
    return output_path


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def to_json(payload: Dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def write_json(payload: Dict, output_path: str) -> str:
    with open(output_path, mode="w", newline="", encoding="utf-8") as f:
        f.write(to_json(payload))
    return output_path


def envelope(
    config: ExperimentConfig,
    gains: Optional[ChannelGains] = None,
    operating_points: Iterable = (),
    gamma_note: str = GAMMA_NOTE,
    **results,
) -> Dict:
    """
    Report document: library version, resolved config, sampled gains and
    the (Q, a, gamma) used at every power point, plus command results.
    Commands without sampled gains say why in a gains_note result.
    """
    document = {
        "version": LIBRARY_VERSION,
        "command": config.command,
        "config": config.to_dict(),
        "gains": gains.to_record() if gains is not None else None,
    }
    points = [point._asdict() for point in operating_points]
    if points:
        document["parameters"] = points
        document["gamma_note"] = gamma_note
    document.update(results)
    return document


def output_path(config: ExperimentConfig, filename: str) -> str:
    directory = config.resolved_output_dir
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, filename)
