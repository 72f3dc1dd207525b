"""Config loading, overrides and freezing."""

from sparse_gp.config.builders import build_kernel, build_mcmc, build_mean, build_metric, build_noise, build_plan
from sparse_gp.config.loader import (
    apply_overrides,
    compute_config_hash,
    compute_payload_hash,
    config_from_dict,
    data_config_from_dict,
    freeze_config,
    load_config,
    serialize_config,
    verify_config_lock,
)
from sparse_gp.config.models import (
    AssemblyConfig,
    BenchmarkConfig,
    DataConfig,
    DataSource,
    EngineConfig,
    ExperimentOptions,
    KernelConfig,
    MeanConfig,
    NoiseConfig,
    TrainerConfig,
)

__all__ = [
    "AssemblyConfig",
    "BenchmarkConfig",
    "DataConfig",
    "DataSource",
    "EngineConfig",
    "ExperimentOptions",
    "KernelConfig",
    "MeanConfig",
    "NoiseConfig",
    "TrainerConfig",
    "apply_overrides",
    "build_kernel",
    "build_mcmc",
    "build_mean",
    "build_metric",
    "build_noise",
    "build_plan",
    "compute_config_hash",
    "compute_payload_hash",
    "config_from_dict",
    "data_config_from_dict",
    "freeze_config",
    "load_config",
    "serialize_config",
    "verify_config_lock",
]
