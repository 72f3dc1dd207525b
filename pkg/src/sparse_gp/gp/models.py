"""Data models for the GP layer."""

from __future__ import annotations

import hashlib
import importlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Mapping, Optional

import numpy as np

from sparse_gp.assembly.models import AssemblyPlan, AssemblyReport
from sparse_gp.errors import ConfigError, HyperparameterError, InputError
from sparse_gp.kernels.models import (
    DistanceMetric,
    HyperparameterSlot,
    KernelSpec,
    ParametricField,
    PointSet,
    resolve,
)
from sparse_gp.kernels.serialization import field_from_dict, field_to_dict, slot_from_dict, slot_to_dict
from sparse_gp.linalg.models import CompressedRowMatrix, LogdetReport, SolveReport


class NoiseKind(str, Enum):
    CONSTANT = "constant"
    PER_POINT = "per_point"
    PARAMETRIC = "parametric"


class MeanKind(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    PLUGIN = "plugin"


class VarianceKind(str, Enum):
    LATENT = "f"
    OBSERVED = "y"


@dataclass(frozen=True, eq=False)
class Dataset:
    points: PointSet
    y: np.ndarray
    metric: DistanceMetric = field(default_factory=DistanceMetric)

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float).reshape(-1)
        n = len(self.points)
        if n < 1:
            raise InputError("Dataset needs at least one point")
        if y.shape != (n,):
            raise InputError(f"{y.shape[0]} observations for {n} points")
        if not np.all(np.isfinite(y)):
            raise InputError("Observations must be finite")
        if self.points.indices is None or not np.array_equal(self.points.indices, np.arange(n)):
            object.__setattr__(self, "points", PointSet(self.points.coords, np.arange(n)))
        object.__setattr__(self, "y", y)

    @classmethod
    def from_arrays(cls, x: np.ndarray, y: np.ndarray, metric: Optional[DistanceMetric] = None) -> "Dataset":
        return cls(PointSet(np.asarray(x, dtype=float)), np.asarray(y, dtype=float), metric or DistanceMetric())

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.dim

    @property
    def x(self) -> np.ndarray:
        return self.points.coords

    def subset(self, indices: np.ndarray) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(PointSet(self.x[indices]), self.y[indices], self.metric)

    def fingerprint(self) -> str:
        hasher = hashlib.sha256()
        hasher.update(np.ascontiguousarray(self.x, dtype=np.float64).tobytes())
        hasher.update(np.ascontiguousarray(self.y, dtype=np.float64).tobytes())
        hasher.update(self.metric.tag.value.encode("utf-8"))
        if self.metric.ard_scales is not None:
            hasher.update(np.asarray(self.metric.ard_scales, dtype=np.float64).tobytes())
        return hasher.hexdigest()


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Diagonal observation noise V."""

    kind: NoiseKind
    slots: tuple[HyperparameterSlot, ...] = ()
    variance: Optional[str | float] = None
    per_point: Optional[np.ndarray] = None
    std_field: Optional[ParametricField] = None

    def __post_init__(self) -> None:
        if self.kind == NoiseKind.CONSTANT and self.variance is None:
            raise ConfigError("constant noise needs a variance")
        if self.kind == NoiseKind.PER_POINT:
            if self.per_point is None:
                raise ConfigError("per-point noise needs a variance vector")
            values = np.asarray(self.per_point, dtype=float)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise InputError("per-point noise variances must be finite and nonnegative")
            object.__setattr__(self, "per_point", values)
        if self.kind == NoiseKind.PARAMETRIC and self.std_field is None:
            raise ConfigError("parametric noise needs a noise field")

    @classmethod
    def constant(cls, variance: float | str, bounds: Optional[tuple[float, float]] = None) -> "NoiseModel":
        slots = ()
        if isinstance(variance, str):
            lower, upper = bounds or (1e-6, 1.0)
            slots = (HyperparameterSlot(variance, lower, upper, block="noise"),)
        return cls(NoiseKind.CONSTANT, slots=slots, variance=variance)

    def references(self) -> list[str]:
        refs: list[str] = []
        if isinstance(self.variance, str):
            refs.append(self.variance)
        if self.std_field is not None:
            refs.extend(self.std_field.references())
        return refs

    def variances(self, coords: np.ndarray, theta: Mapping[str, float]) -> np.ndarray:
        n = coords.shape[0]
        if self.kind == NoiseKind.CONSTANT:
            value = resolve(self.variance, theta)
            if value < 0:
                raise HyperparameterError(f"noise variance must be nonnegative, got {value}")
            return np.full(n, value)
        if self.kind == NoiseKind.PER_POINT:
            if self.per_point.shape != (n,):
                raise InputError(f"per-point noise has {self.per_point.shape[0]} entries for {n} points")
            return self.per_point
        return self.std_field.evaluate(coords, theta) ** 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "variance": self.variance,
            "per_point": None if self.per_point is None else self.per_point.tolist(),
            "field": None if self.std_field is None else field_to_dict(self.std_field),
            "slots": [slot_to_dict(slot) for slot in self.slots],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NoiseModel":
        try:
            kind = NoiseKind(data.get("kind", "constant"))
        except ValueError as exc:
            raise ConfigError(f"Invalid noise kind: {data.get('kind')}") from exc
        return cls(
            kind=kind,
            slots=tuple(slot_from_dict(item) for item in data.get("slots", [])),
            variance=data.get("variance"),
            per_point=None if data.get("per_point") is None else np.asarray(data["per_point"], dtype=float),
            std_field=None if data.get("field") is None else field_from_dict(data["field"]),
        )


@dataclass(frozen=True, eq=False)
class MeanFunction:
    kind: MeanKind = MeanKind.ZERO
    slots: tuple[HyperparameterSlot, ...] = ()
    value: Optional[str | float] = None
    plugin: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == MeanKind.CONSTANT and self.value is None:
            raise ConfigError("constant mean needs a value")
        if self.kind == MeanKind.PLUGIN and not self.plugin:
            raise ConfigError("plugin mean needs a module:function path")

    @cached_property
    def function(self) -> Callable[[np.ndarray, Mapping[str, float]], np.ndarray]:
        module_name, _, attr = (self.plugin or "").partition(":")
        try:
            return getattr(importlib.import_module(module_name), attr)
        except (ImportError, AttributeError, ValueError) as exc:
            raise ConfigError(f"Invalid mean plugin: {self.plugin}") from exc

    def references(self) -> list[str]:
        return [self.value] if isinstance(self.value, str) else []

    def evaluate(self, coords: np.ndarray, theta: Mapping[str, float]) -> np.ndarray:
        n = coords.shape[0]
        if self.kind == MeanKind.ZERO:
            return np.zeros(n)
        if self.kind == MeanKind.CONSTANT:
            return np.full(n, resolve(self.value, theta))
        out = np.asarray(self.function(coords, theta), dtype=float).reshape(-1)
        if out.shape != (n,) or not np.all(np.isfinite(out)):
            raise InputError("mean plugin must return n finite values")
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "plugin": self.plugin,
            "slots": [slot_to_dict(slot) for slot in self.slots],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MeanFunction":
        try:
            kind = MeanKind(data.get("kind", "zero"))
        except ValueError as exc:
            raise ConfigError(f"Invalid mean kind: {data.get('kind')}") from exc
        return cls(
            kind=kind,
            slots=tuple(slot_from_dict(item) for item in data.get("slots", [])),
            value=data.get("value"),
            plugin=data.get("plugin"),
        )


def collect_slots(spec: KernelSpec, noise: NoiseModel, mean: MeanFunction) -> tuple[HyperparameterSlot, ...]:
    """All sampled slots, in kernel, noise, mean order; names must be unique."""
    slots = (*spec.slots, *noise.slots, *mean.slots)
    names = [slot.name for slot in slots]
    if len(names) != len(set(names)):
        raise HyperparameterError("Duplicate hyperparameter names across kernel, noise and mean")
    missing = sorted(set(noise.references() + mean.references()) - set(names))
    if missing:
        raise HyperparameterError(f"Noise or mean reference undeclared hyperparameters: {missing}")
    return slots


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-8
    maxiter: Optional[int] = None
    predict_tol: float = 1e-10
    logdet_method: str = "auto"
    ordering: Optional[str] = None


@dataclass(frozen=True, eq=False)
class LMLEvaluation:
    value: float
    valid: bool
    reason: Optional[str] = None
    solve: Optional[SolveReport] = None
    logdet: Optional[LogdetReport] = None
    assembly: Optional[AssemblyReport] = None
    t_covariance_s: float = 0.0
    t_solve_s: float = 0.0
    t_logdet_s: float = 0.0
    t_total_s: float = 0.0
    alpha: Optional[np.ndarray] = None
    matrix: Optional[CompressedRowMatrix] = None
    error: Optional[Exception] = None

    def timings(self) -> dict[str, float]:
        return {
            "covariance_s": self.t_covariance_s,
            "solve_s": self.t_solve_s,
            "logdet_s": self.t_logdet_s,
            "total_s": self.t_total_s,
        }


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: KernelSpec
    theta: dict[str, float]
    dataset: Dataset
    noise: NoiseModel
    mean: MeanFunction
    plan: AssemblyPlan
    solver: SolverSettings
    alpha: np.ndarray
    matrix: CompressedRowMatrix
    assembly: AssemblyReport
    log_marginal_likelihood: float
    fingerprint: str

    def is_consistent(self, spec: KernelSpec, theta: Mapping[str, float], dataset: Dataset) -> bool:
        return spec is self.spec and dict(theta) == self.theta and dataset.fingerprint() == self.fingerprint


@dataclass(frozen=True, eq=False)
class PosteriorGaussian:
    mean: np.ndarray
    variance: np.ndarray
    kind: VarianceKind = VarianceKind.LATENT
    failed: Optional[np.ndarray] = None
    clamped: int = 0
    warned: int = 0

    def __post_init__(self) -> None:
        if self.failed is None:
            object.__setattr__(self, "failed", np.zeros(self.mean.shape[0], dtype=bool))

    def __len__(self) -> int:
        return int(self.mean.shape[0])

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)
