"""Run configuration: optional JSON config files and validated sweep settings."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from perm_converse.utils import DomainError, PermConverseError, log_spaced_ints

logger = logging.getLogger(__name__)


class ConfigError(PermConverseError):
    """Config file missing, unreadable or not a JSON object."""


def load_config(path: Union[str, Path]) -> dict:
    """Load a JSON object whose keys are command-line flag destinations (e.g. n_min, delta)."""
    p = Path(path)
    try:
        with open(p, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}")
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {p}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {p} must hold a JSON object")
    return data


@dataclass(frozen=True)
class SweepConfig:
    delta: float = 0.11
    eps: float = 1e-3
    n_min: int = 1000
    n_max: int = 10_000_000
    points: int = 40
    tau_override: Optional[float] = None
    g1: float = 1.0 / 16.0
    out_path: Optional[str] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps!r}")
        if self.n_min < 3:
            raise DomainError(f"n_min must be at least 3, got {self.n_min}")
        if self.n_max < self.n_min:
            raise DomainError(f"n_max ({self.n_max}) is below n_min ({self.n_min})")
        if self.points < 2:
            raise DomainError(f"points must be at least 2, got {self.points}")
        if self.tau_override is not None and not self.tau_override > 0:
            raise DomainError(f"tau must be positive, got {self.tau_override!r}")

    @classmethod
    def from_args(cls, args) -> "SweepConfig":
        return cls(
            delta=float(args.delta),
            eps=float(args.eps),
            n_min=int(args.n_min),
            n_max=int(args.n_max),
            points=int(args.points),
            tau_override=None if args.tau is None else float(args.tau),
            g1=float(args.g1),
            out_path=args.out,
            workers=getattr(args, "workers", None),
        )

    def n_values(self) -> List[int]:
        return log_spaced_ints(self.n_min, self.n_max, self.points)
