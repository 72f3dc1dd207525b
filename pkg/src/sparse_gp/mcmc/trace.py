"""NDJSON trace files and resumable chain checkpoints."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from sparse_gp.errors import ConfigError
from sparse_gp.mcmc.models import TraceRecord


def append_trace(path: str | Path, records: Iterable[TraceRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json(), sort_keys=True))
            handle.write("\n")


def read_trace(path: str | Path) -> list[TraceRecord]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(TraceRecord.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{number}: malformed trace record") from exc
    return records


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


@dataclass
class ChainCheckpoint:
    """Everything needed to continue a chain after sweep ``next_iteration - 1``."""

    next_iteration: int
    theta: dict[str, float]
    log_posterior: float
    scales: dict[str, float]
    rng_state: dict[str, Any]
    best_theta: dict[str, float]
    best_log_posterior: float
    window_accepted: dict[str, int] = field(default_factory=dict)
    window_proposed: dict[str, int] = field(default_factory=dict)
    post_accepted: dict[str, int] = field(default_factory=dict)
    post_proposed: dict[str, int] = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "next_iteration": self.next_iteration,
            "theta": self.theta,
            "log_posterior": _finite_or_none(self.log_posterior),
            "scales": self.scales,
            "rng_state": self.rng_state,
            "best_theta": self.best_theta,
            "best_log_posterior": _finite_or_none(self.best_log_posterior),
            "window_accepted": self.window_accepted,
            "window_proposed": self.window_proposed,
            "post_accepted": self.post_accepted,
            "post_proposed": self.post_proposed,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ChainCheckpoint":
        def _value(raw: Any) -> float:
            return -math.inf if raw is None else float(raw)

        return cls(
            next_iteration=int(data["next_iteration"]),
            theta={k: float(v) for k, v in data["theta"].items()},
            log_posterior=_value(data["log_posterior"]),
            scales={k: float(v) for k, v in data["scales"].items()},
            rng_state=data["rng_state"],
            best_theta={k: float(v) for k, v in data["best_theta"].items()},
            best_log_posterior=_value(data["best_log_posterior"]),
            window_accepted={k: int(v) for k, v in data.get("window_accepted", {}).items()},
            window_proposed={k: int(v) for k, v in data.get("window_proposed", {}).items()},
            post_accepted={k: int(v) for k, v in data.get("post_accepted", {}).items()},
            post_proposed={k: int(v) for k, v in data.get("post_proposed", {}).items()},
            seed=int(data.get("seed", 0)),
        )


def save_chain_checkpoint(path: str | Path, checkpoint: ChainCheckpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(checkpoint.to_json(), sort_keys=True), encoding="utf-8")
    tmp.replace(path)
    return path


def load_chain_checkpoint(path: str | Path) -> ChainCheckpoint:
    path = Path(path)
    try:
        return ChainCheckpoint.from_json(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"Unreadable chain checkpoint {path}: {exc}") from exc
