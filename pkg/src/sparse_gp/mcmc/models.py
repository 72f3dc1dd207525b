"""Data models for the block Metropolis-Hastings trainer."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Optional

from sparse_gp.errors import ConfigError, HyperparameterError
from sparse_gp.kernels.models import HyperparameterSlot, SlotRole


@dataclass(frozen=True)
class HyperparameterVector:
    """Bounded, block-grouped layout of the sampled hyperparameters."""

    slots: tuple[HyperparameterSlot, ...]

    def __post_init__(self) -> None:
        names = [slot.name for slot in self.slots]
        if not names:
            raise HyperparameterError("no hyperparameters to sample")
        if len(names) != len(set(names)):
            raise HyperparameterError("Duplicate hyperparameter names")

    @property
    def names(self) -> list[str]:
        return [slot.name for slot in self.slots]

    def slot(self, name: str) -> HyperparameterSlot:
        for slot in self.slots:
            if slot.name == name:
                return slot
        raise HyperparameterError(f"Unknown hyperparameter: {name}")

    def blocks(self) -> dict[str, tuple[str, ...]]:
        grouped: dict[str, list[str]] = {}
        for slot in self.slots:
            grouped.setdefault(slot.block, []).append(slot.name)
        return {block: tuple(names) for block, names in grouped.items()}

    def initial(self, overrides: Optional[Mapping[str, float]] = None) -> dict[str, float]:
        """Bump amplitudes at 0, other slots at their ``initial`` or bound midpoint."""
        theta: dict[str, float] = {}
        for slot in self.slots:
            if slot.role == SlotRole.BUMP_AMPLITUDE:
                value = 0.0 if slot.contains(0.0) else slot.lower
            elif slot.initial is not None:
                value = slot.initial
            else:
                value = 0.5 * (slot.lower + slot.upper)
            theta[slot.name] = float(value)
        for name, value in (overrides or {}).items():
            self.slot(name)
            theta[name] = float(value)
        return theta

    def in_bounds(self, theta: Mapping[str, float]) -> bool:
        for slot in self.slots:
            value = theta.get(slot.name)
            if value is None or not math.isfinite(value) or not slot.contains(value):
                return False
        return True


@dataclass(frozen=True)
class MCMCConfig:
    iterations: int = 100
    seed: int = 0
    blocks: Optional[dict[str, tuple[str, ...]]] = None
    initial_scale: float = 0.05
    block_scales: dict[str, float] = field(default_factory=dict)
    adapt_window: int = 10
    target_acceptance: float = 0.30
    adapt_rate: float = 0.5
    burn_in_fraction: float = 0.30
    min_post_burn_in_proposals: int = 10
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError(f"Invalid iterations: {self.iterations}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ConfigError(f"Invalid target_acceptance: {self.target_acceptance}")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ConfigError(f"Invalid burn_in_fraction: {self.burn_in_fraction}")
        if self.adapt_window < 1:
            raise ConfigError(f"Invalid adapt_window: {self.adapt_window}")
        if self.initial_scale < 0 or any(scale < 0 for scale in self.block_scales.values()):
            raise ConfigError("proposal scales must be nonnegative")

    @property
    def burn_in(self) -> int:
        return int(self.burn_in_fraction * self.iterations)

    def scale_for(self, block: str) -> float:
        return float(self.block_scales.get(block, self.initial_scale))


@dataclass(frozen=True)
class ChainState:
    theta: dict[str, float]
    log_posterior: float
    scales: dict[str, float]
    iteration: int = 0


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    block: str
    proposal: dict[str, float]
    accepted: bool
    log_posterior: float
    candidate_log_posterior: float
    scale: float
    timings: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        payload = asdict(self)
        for key in ("log_posterior", "candidate_log_posterior"):
            if not math.isfinite(payload[key]):
                payload[key] = None
        return payload

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "TraceRecord":
        def _value(raw: Any) -> float:
            return -math.inf if raw is None else float(raw)

        return cls(
            iteration=int(data["iteration"]),
            block=str(data["block"]),
            proposal={str(k): float(v) for k, v in data["proposal"].items()},
            accepted=bool(data["accepted"]),
            log_posterior=_value(data["log_posterior"]),
            candidate_log_posterior=_value(data["candidate_log_posterior"]),
            scale=float(data["scale"]),
            timings={str(k): float(v) for k, v in data.get("timings", {}).items()},
        )


@dataclass(frozen=True)
class ChainResult:
    trace: list[TraceRecord]
    theta_selected: dict[str, float]
    log_posterior_selected: float
    state: ChainState
    acceptance: dict[str, float]
    burn_in: int
    evaluations: int
