"""Load, override and freeze configuration files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional

import yaml

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
from sparse_gp.errors import ConfigError
from sparse_gp.gp.models import MeanKind, NoiseKind, SolverSettings, VarianceKind
from sparse_gp.kernels.models import MetricTag

# free-form mappings: overrides may add keys below these paths
OPEN_PATHS = {
    ("kernel", "options"),
    ("kernel", "spec"),
    ("noise", "field"),
    ("mcmc", "block_scales"),
    ("mcmc", "blocks"),
    ("mcmc", "initial_theta"),
    ("benchmark", "theta"),
}


def load_config(path: str | Path, overrides: Optional[Iterable[str]] = None) -> EngineConfig:
    path = Path(path)
    config = config_from_dict(_load_yaml(path))
    if overrides:
        config = apply_overrides(config, overrides)
    return config


def config_from_dict(data: dict[str, Any]) -> EngineConfig:
    name = str(_require(data, "name"))
    return EngineConfig(
        name=name,
        version=str(data.get("version", "1")),
        run_id_prefix=str(data.get("run_id_prefix", name)),
        data=_parse_data(_section(data, "data")),
        kernel=_parse_kernel(_section(data, "kernel")),
        noise=_parse_noise(_section(data, "noise")),
        mean=_parse_mean(_section(data, "mean")),
        assembly=_parse_assembly(_section(data, "assembly")),
        solver=_parse_solver(_section(data, "solver")),
        mcmc=_parse_mcmc(_section(data, "mcmc")),
        experiment=_parse_experiment(_section(data, "experiment")),
        benchmark=_parse_benchmark(_section(data, "benchmark")),
    )


def apply_overrides(config: EngineConfig, overrides: Iterable[str]) -> EngineConfig:
    """Apply ``section.key=value`` overrides to the materialized config."""
    payload = serialize_config(config)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Invalid override: {item}")
        parts = key.strip().split(".")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"Invalid override value for {key}: {raw}") from exc
        target = payload
        for depth, part in enumerate(parts[:-1]):
            child = target.get(part) if isinstance(target, dict) else None
            if child is None and tuple(parts[: depth + 1]) in OPEN_PATHS:
                child = target[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"Unknown config key: {key}")
            target = child
        leaf = parts[-1]
        if leaf not in target and tuple(parts[:-1]) not in OPEN_PATHS:
            raise ConfigError(f"Unknown config key: {key}")
        target[leaf] = value
    return config_from_dict(payload)


def serialize_config(config: EngineConfig) -> dict[str, Any]:
    payload = _plain(asdict(config))
    payload["noise"]["field"] = payload["noise"].pop("std_field")
    return payload


def compute_config_hash(path: str | Path) -> str:
    path = Path(path)
    content = path.read_bytes()
    return hashlib.sha256(content).hexdigest()


def compute_payload_hash(payload: dict[str, Any]) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def freeze_config(path: str | Path, lock_path: Optional[str | Path] = None) -> Path:
    path = Path(path)
    load_config(path)
    config_hash = compute_config_hash(path)
    if lock_path is None:
        lock_path = path.with_suffix(path.suffix + ".lock.json")
    lock_path = Path(lock_path)

    payload = {
        "config_path": str(path),
        "config_hash": config_hash,
        "frozen_at_utc": datetime.now(timezone.utc).isoformat(),
    }
    lock_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return lock_path


def verify_config_lock(path: str | Path, lock_path: Optional[str | Path] = None) -> bool:
    path = Path(path)
    if lock_path is None:
        lock_path = path.with_suffix(path.suffix + ".lock.json")
    lock_path = Path(lock_path)
    if not lock_path.exists():
        return False
    payload = json.loads(lock_path.read_text(encoding="utf-8"))
    return payload.get("config_hash") == compute_config_hash(path)


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _load_yaml(path: Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("Config must be a mapping")
    return data


def _require(data: dict[str, Any], key: str) -> Any:
    if key not in data:
        raise ConfigError(f"Missing required config key: {key}")
    return data[key]


def _section(data: dict[str, Any], key: str) -> dict[str, Any]:
    section = data.get(key) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"Config section {key} must be a mapping")
    return section


def _enum(enum_cls, value: Any, key: str):
    try:
        return enum_cls(value)
    except ValueError as exc:
        raise ConfigError(f"Invalid {key}: {value}") from exc


def _number(data: dict[str, Any], key: str, default: Any, cast=float) -> Any:
    value = data.get(key, default)
    if value is None:
        return None
    try:
        return cast(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid {key}: {value}") from exc


def _pair(data: dict[str, Any], key: str, default: tuple[float, float]) -> tuple[float, float]:
    value = data.get(key, default)
    try:
        lower, upper = (float(item) for item in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid {key}: {value}") from exc
    if not lower < upper:
        raise ConfigError(f"Invalid {key}: {value}")
    return lower, upper


def _positive(value: Any, key: str) -> Any:
    if value is not None and not value > 0:
        raise ConfigError(f"Invalid {key}: {value}")
    return value


def _parse_data(data: dict[str, Any]) -> DataConfig:
    source = _enum(DataSource, data.get("source", "synthetic_f1"), "data.source")
    path = data.get("path")
    if source == DataSource.CSV and not path:
        raise ConfigError("data.path is required for csv data")
    test_fraction = _number(data, "test_fraction", None)
    if test_fraction is not None and not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"Invalid data.test_fraction: {test_fraction}")
    ard = data.get("ard_scales")
    noise_std = _number(data, "noise_std", 0.1)
    if noise_std < 0:
        raise ConfigError(f"Invalid data.noise_std: {noise_std}")
    return DataConfig(
        source=source,
        path=None if path is None else str(path),
        test_path=None if data.get("test_path") is None else str(data["test_path"]),
        n_train=_positive(_number(data, "n_train", 2000, int), "data.n_train"),
        n_test=_positive(_number(data, "n_test", 1000, int), "data.n_test"),
        noise_std=noise_std,
        seed=_number(data, "seed", 0, int),
        test_fraction=test_fraction,
        grid_points=_positive(_number(data, "grid_points", 1000, int), "data.grid_points"),
        metric=_enum(MetricTag, data.get("metric", "euclidean"), "data.metric"),
        ard_scales=None if ard is None else tuple(float(item) for item in ard),
    )


def _parse_kernel(data: dict[str, Any]) -> KernelConfig:
    spec = data.get("spec")
    if spec is not None and not isinstance(spec, dict):
        raise ConfigError("kernel.spec must be a mapping")
    return KernelConfig(
        preset=str(data.get("preset", "nonstat_wendland")),
        options=dict(data.get("options") or {}),
        spec=spec,
    )


def _parse_noise(data: dict[str, Any]) -> NoiseConfig:
    kind = _enum(NoiseKind, data.get("kind", "constant"), "noise.kind")
    variance = _number(data, "variance", 0.01)
    if variance < 0:
        raise ConfigError(f"Invalid noise.variance: {variance}")
    return NoiseConfig(
        kind=kind.value,
        variance=variance,
        trainable=bool(data.get("trainable", True)),
        bounds=_pair(data, "bounds", (1e-6, 1.0)),
        std_field=data.get("field"),
        slots=list(data.get("slots") or []),
    )


def _parse_mean(data: dict[str, Any]) -> MeanConfig:
    kind = _enum(MeanKind, data.get("kind", "zero"), "mean.kind")
    if kind == MeanKind.PLUGIN and not data.get("plugin"):
        raise ConfigError("mean.plugin is required for plugin means")
    return MeanConfig(
        kind=kind.value,
        value=_number(data, "value", 0.0),
        trainable=bool(data.get("trainable", False)),
        bounds=_pair(data, "bounds", (-10.0, 10.0)),
        plugin=data.get("plugin"),
    )


def _parse_assembly(data: dict[str, Any]) -> AssemblyConfig:
    return AssemblyConfig(
        block_size=_positive(_number(data, "block_size", 1000, int), "assembly.block_size"),
        workers=_positive(_number(data, "workers", 1, int), "assembly.workers"),
        retries=_number(data, "retries", 1, int),
    )


def _parse_solver(data: dict[str, Any]) -> SolverSettings:
    method = str(data.get("logdet_method", "auto"))
    if method not in ("auto", "splu", "cholmod"):
        raise ConfigError(f"Invalid solver.logdet_method: {method}")
    return SolverSettings(
        tol=_positive(_number(data, "tol", 1e-8), "solver.tol"),
        maxiter=_number(data, "maxiter", None, int),
        predict_tol=_positive(_number(data, "predict_tol", 1e-10), "solver.predict_tol"),
        logdet_method=method,
        ordering=data.get("ordering"),
    )


def _parse_mcmc(data: dict[str, Any]) -> TrainerConfig:
    blocks = data.get("blocks")
    if blocks is not None and not isinstance(blocks, dict):
        raise ConfigError("mcmc.blocks must map block names to hyperparameter lists")
    return TrainerConfig(
        iterations=_positive(_number(data, "iterations", 1000, int), "mcmc.iterations"),
        seed=_number(data, "seed", 0, int),
        initial_scale=_number(data, "initial_scale", 0.05),
        block_scales={str(k): float(v) for k, v in (data.get("block_scales") or {}).items()},
        blocks=None if blocks is None else {str(k): [str(name) for name in v] for k, v in blocks.items()},
        adapt_window=_positive(_number(data, "adapt_window", 10, int), "mcmc.adapt_window"),
        target_acceptance=_number(data, "target_acceptance", 0.30),
        adapt_rate=_number(data, "adapt_rate", 0.5),
        burn_in_fraction=_number(data, "burn_in_fraction", 0.30),
        initial_theta={str(k): float(v) for k, v in (data.get("initial_theta") or {}).items()},
        verbose=bool(data.get("verbose", False)),
    )


def _parse_experiment(data: dict[str, Any]) -> ExperimentOptions:
    variance_kind = _enum(VarianceKind, data.get("variance_kind", "y"), "experiment.variance_kind")
    return ExperimentOptions(
        output_dir=str(data.get("output_dir", "runs")),
        repeats=_positive(_number(data, "repeats", 1, int), "experiment.repeats"),
        variance_kind=variance_kind.value,
        base_gp=bool(data.get("base_gp", False)),
        base_gp_iterations=_positive(_number(data, "base_gp_iterations", 200, int), "experiment.base_gp_iterations"),
        audit_log_name=str(data.get("audit_log_name", "audit.log")),
    )


def _parse_benchmark(data: dict[str, Any]) -> BenchmarkConfig:
    sizes = [int(size) for size in data.get("sizes") or []]
    if any(size < 1 for size in sizes):
        raise ConfigError(f"Invalid benchmark.sizes: {sizes}")
    return BenchmarkConfig(
        sizes=sizes,
        evaluations=_positive(_number(data, "evaluations", 1, int), "benchmark.evaluations"),
        theta={str(k): float(v) for k, v in (data.get("theta") or {}).items()},
    )


def data_config_from_dict(data: dict[str, Any]) -> DataConfig:
    """Rebuild a data section, e.g. from checkpoint provenance."""
    return _parse_data(data)
