"""Configuration models for reproducible runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from sparse_gp.gp.models import SolverSettings
from sparse_gp.kernels.models import MetricTag


class DataSource(str, Enum):
    SYNTHETIC_F1 = "synthetic_f1"
    CSV = "csv"


@dataclass(frozen=True)
class DataConfig:
    source: DataSource = DataSource.SYNTHETIC_F1
    path: Optional[str] = None
    test_path: Optional[str] = None
    n_train: int = 2000
    n_test: int = 1000
    noise_std: float = 0.1
    seed: int = 0
    test_fraction: Optional[float] = None
    grid_points: int = 1000
    metric: MetricTag = MetricTag.EUCLIDEAN
    ard_scales: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class KernelConfig:
    preset: str = "nonstat_wendland"
    options: dict[str, Any] = field(default_factory=dict)
    spec: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class NoiseConfig:
    kind: str = "constant"
    variance: float = 0.01
    trainable: bool = True
    bounds: tuple[float, float] = (1e-6, 1.0)
    std_field: Optional[dict[str, Any]] = None
    slots: list[dict[str, Any]] = field(default_factory=list)


@dataclass(frozen=True)
class MeanConfig:
    kind: str = "zero"
    value: float = 0.0
    trainable: bool = False
    bounds: tuple[float, float] = (-10.0, 10.0)
    plugin: Optional[str] = None


@dataclass(frozen=True)
class AssemblyConfig:
    block_size: int = 1000
    workers: int = 1
    retries: int = 1


@dataclass(frozen=True)
class TrainerConfig:
    iterations: int = 1000
    seed: int = 0
    initial_scale: float = 0.05
    block_scales: dict[str, float] = field(default_factory=dict)
    blocks: Optional[dict[str, list[str]]] = None
    adapt_window: int = 10
    target_acceptance: float = 0.30
    adapt_rate: float = 0.5
    burn_in_fraction: float = 0.30
    initial_theta: dict[str, float] = field(default_factory=dict)
    verbose: bool = False


@dataclass(frozen=True)
class ExperimentOptions:
    output_dir: str = "runs"
    repeats: int = 1
    variance_kind: str = "y"
    base_gp: bool = False
    base_gp_iterations: int = 200
    audit_log_name: str = "audit.log"


@dataclass(frozen=True)
class BenchmarkConfig:
    sizes: list[int] = field(default_factory=list)
    evaluations: int = 1
    theta: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EngineConfig:
    name: str
    version: str
    run_id_prefix: str
    data: DataConfig
    kernel: KernelConfig
    noise: NoiseConfig
    mean: MeanConfig
    assembly: AssemblyConfig
    solver: SolverSettings
    mcmc: TrainerConfig
    experiment: ExperimentOptions
    benchmark: BenchmarkConfig
