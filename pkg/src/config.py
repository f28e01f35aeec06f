# src/config.py
"""
Central configuration for the secure alignment lab.

All defaults, budgets and report settings are defined here, together with
ExperimentConfig, the resolved configuration of one CLI run. Keeping them in
one place keeps the numeric modules free of magic numbers.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import List, Optional, Tuple

from errors import InvalidConfiguration

# ======================================================
# General
# ======================================================

LIBRARY_VERSION = "0.1.0"

# Seed used when a command does not require --seed (dims, leakage, rates)
DEFAULT_SEED = 0

# Reports go to $RIA_OUTPUT_DIR, or ./data when unset
OUTPUT_DIR_ENV = "RIA_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "data"

COMMANDS = ("dims", "leakage", "rates", "simulate", "sweep", "pam", "report")

# Commands whose results depend on random draws beyond the gains
SEEDED_COMMANDS = ("simulate", "sweep", "pam")

# ======================================================
# Channel
# ======================================================

# |h| ~ Uniform(0.5, 2.0) with a random sign
GAIN_MAGNITUDE_RANGE = (0.5, 2.0)

# Unit-variance receiver noise
DEFAULT_NOISE_STD = 1.0

# ======================================================
# Decoding / enumeration
# ======================================================

# Max monomials enumerated for one dimension set, top^generators
DIMENSION_BUDGET = 5 * 10**6

# Max (2Q+1)^streams for exact constellation enumeration
DECODE_BUDGET = 10**6

# Max (2Q+1)^(K*K*M) joint outcomes for the brute-force entropy oracle
ORACLE_BUDGET = 10**7

# Random distinct pairs drawn by the sampling min-distance mode
SAMPLING_PAIRS = 10**6

# Noiseless exact-recovery trials per sweep point for the measured pe
DESK_TRIALS = 100

# Trials per Monte Carlo chunk; one SeedSequence child per chunk
CHUNK_SIZE = 1000

# Relative tolerance for numeric_distinctness
DISTINCTNESS_TOL = 1e-12

# ======================================================
# Secrecy models
# ======================================================


class SecrecyModel(str, Enum):
    """Which observers a message is kept from."""

    EE = "ee"  # the external eavesdropper
    CM = "cm"  # the other legitimate receivers
    CM_EE = "cm-ee"  # both

    @classmethod
    def resolve(cls, model: Optional[str], eavesdropper: bool) -> "SecrecyModel":
        if model is None:
            return cls.CM_EE if eavesdropper else cls.CM
        try:
            resolved = cls(model)
        except ValueError as exc:
            choices = ", ".join(m.value for m in cls)
            raise InvalidConfiguration(f"Unknown secrecy model {model!r}, expected one of {choices}") from exc
        if resolved is not cls.CM and not eavesdropper:
            raise InvalidConfiguration(f"secrecy model {resolved.value} needs an eavesdropper")
        return resolved

    def observers(self, K: int, i: int) -> Tuple[int, ...]:
        """Observers of message i, ascending; 0 is the eavesdropper."""
        eve = (0,) if self is not SecrecyModel.CM else ()
        receivers = tuple(j for j in range(1, K + 1) if j != i) if self is not SecrecyModel.EE else ()
        return eve + receivers


# ======================================================
# Reports
# ======================================================

CSV_FLOAT_FORMAT = "%.12g"
CSV_LINE_TERMINATOR = "\r\n"

O_LOG_P_NOTE = "o(log P) term dropped: the closed form carries no constant for it"
GAMMA_NOTE = "gamma = min over transmitters of 1/sum|t|, shared by all users"
CLOSED_FORM_NOTE = "closed-form rates; no channel gains are drawn"
PAM_NOTE = "point-to-point PAM over a unit-gain link, so gamma = 1"
SPACING_NOTE = "a and gamma need a power point: pass --P and --delta, or a Q >= 1 with --P"


# ======================================================
# Experiment configuration
# ======================================================

@dataclass
class ExperimentConfig:
    """
    Resolved configuration of one CLI run.

    Built from an optional JSON document; every CLI flag that is given
    overrides the JSON field of the same name.
    """

    command: str
    K: int = 2
    m: int = 1
    Q: Optional[int] = None
    P: Optional[float] = None
    delta: Optional[float] = None
    eavesdropper: bool = True
    model: Optional[str] = None
    trials: int = 1000
    seed: Optional[int] = None
    message: int = 1
    observer: int = 2
    m_grid: List[int] = field(default_factory=list)
    Q_grid: List[int] = field(default_factory=list)
    P_grid: List[float] = field(default_factory=list)
    noise_std: float = DEFAULT_NOISE_STD
    budget: int = DECODE_BUDGET
    workers: int = 1
    output_dir: Optional[str] = None

    @classmethod
    def from_sources(cls, command: str, json_path: Optional[str] = None, **overrides) -> "ExperimentConfig":
        values = {}
        if json_path:
            try:
                with open(json_path, encoding="utf-8") as f:
                    values = json.load(f)
            except (OSError, json.JSONDecodeError) as exc:
                raise InvalidConfiguration(f"Cannot read config {json_path}: {exc}") from exc
            if not isinstance(values, dict):
                raise InvalidConfiguration("Config document must be a JSON object")

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidConfiguration(f"Unknown config fields: {', '.join(unknown)}")

        values.update({k: v for k, v in overrides.items() if v is not None})
        values["command"] = command
        config = cls(**values)
        config.validate()
        return config

    @property
    def resolved_output_dir(self) -> str:
        return self.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR

    @property
    def resolved_model(self) -> SecrecyModel:
        return SecrecyModel.resolve(self.model, self.eavesdropper)

    @property
    def resolved_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidConfiguration(f"Unknown command: {self.command}")
        if self.command == "report":
            return

        if self.command in SEEDED_COMMANDS and self.seed is None:
            raise InvalidConfiguration(f"--seed is mandatory for {self.command}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise InvalidConfiguration("seed must be a 64-bit unsigned integer")
        if self.command != "pam" and self.K < 2:
            raise InvalidConfiguration(f"K must be >= 2, got {self.K}")
        if self.trials < 1:
            raise InvalidConfiguration("trials must be >= 1")
        if self.workers < 1:
            raise InvalidConfiguration("workers must be >= 1")
        if self.noise_std < 0:
            raise InvalidConfiguration("noise_std must be >= 0")
        if self.delta is not None and not 0 <= self.delta < 1:
            raise InvalidConfiguration("delta must lie in [0, 1)")
        if any(p <= 0 for p in self.P_grid) or (self.P is not None and self.P <= 0):
            raise InvalidConfiguration("P values must be positive")
        SecrecyModel.resolve(self.model, self.eavesdropper)

        if self.command in ("dims", "leakage", "simulate") and self.m < 1:
            raise InvalidConfiguration(f"m must be >= 1, got {self.m}")

        if self.command == "leakage":
            self._require_q_or_power(need_power_point=True)
            if self.P is not None and self.P <= 1:
                raise InvalidConfiguration(f"leakage needs P > 1 for the DoF fraction, got {self.P}")
            if self.message == self.observer:
                raise InvalidConfiguration("message and observer must differ")
            if not 1 <= self.message <= self.K or not 0 <= self.observer <= self.K:
                raise InvalidConfiguration("message must be in 1..K and observer in 0..K")
            if self.observer == 0 and not self.eavesdropper:
                raise InvalidConfiguration("observer 0 requires an eavesdropper")
            if self.observer not in self.resolved_model.observers(self.K, self.message):
                raise InvalidConfiguration(
                    f"observer {self.observer} is outside the {self.resolved_model.value} model"
                )
        elif self.command == "simulate":
            self._require_q_or_power(need_power_point=False)
            if not self.P_grid:
                raise InvalidConfiguration("simulate needs --P-grid")
            if self.Q is not None and self.Q < 1:
                raise InvalidConfiguration("simulate needs Q >= 1")
            if self.delta is not None and self.delta == 0:
                raise InvalidConfiguration("deriving Q needs delta in (0, 1)")
        elif self.command == "rates":
            if self.delta is None or not self.m_grid or not self.P_grid:
                raise InvalidConfiguration("rates needs --delta, --m-grid and --P-grid")
            if any(m < 1 for m in self.m_grid):
                raise InvalidConfiguration("m-grid values must be >= 1")
        elif self.command == "sweep":
            if not self.m_grid or not self.Q_grid:
                raise InvalidConfiguration("sweep needs --m-grid and --Q-grid")
            if any(m < 1 for m in self.m_grid) or any(q < 0 for q in self.Q_grid):
                raise InvalidConfiguration("m-grid must be >= 1 and Q-grid >= 0")
        elif self.command == "pam":
            if self.delta is None or not self.P_grid:
                raise InvalidConfiguration("pam needs --delta and --P-grid")
            if self.delta == 0:
                raise InvalidConfiguration("pam needs delta in (0, 1)")

    def _require_q_or_power(self, need_power_point: bool) -> None:
        # exactly one of: explicit Q, or delta (with P / P-grid) deriving Q
        if (self.Q is None) == (self.delta is None):
            raise InvalidConfiguration("set exactly one of Q or (P, delta)")
        if self.Q is not None and self.Q < 0:
            raise InvalidConfiguration("Q must be >= 0")
        if self.delta is not None and need_power_point and self.P is None:
            raise InvalidConfiguration("deriving Q needs P together with delta")

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["output_dir"] = None
        payload["seed"] = self.resolved_seed
        payload["model"] = self.resolved_model.value
        return payload
