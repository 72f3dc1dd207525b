"""TrainedModel checkpoints and prediction CSV files."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from sparse_gp import __version__
from sparse_gp.assembly.engine import plan_assembly
from sparse_gp.errors import ConfigError, InputError, StaleCheckpointError
from sparse_gp.gp.models import (
    Dataset,
    MeanFunction,
    NoiseModel,
    PosteriorGaussian,
    SolverSettings,
    TrainedModel,
)
from sparse_gp.gp.posterior import fit_cache
from sparse_gp.kernels.models import DistanceMetric, KernelSpec, MetricTag
from sparse_gp.kernels.serialization import spec_from_dict, spec_to_dict
from sparse_gp.monitoring.audit import AuditLog

CHECKPOINT_VERSION = 1
PREDICTION_HEADER = ["index", "mean", "variance", "variance_kind"]


@dataclass(frozen=True)
class Checkpoint:
    spec: KernelSpec
    theta: dict[str, float]
    noise: NoiseModel
    mean: MeanFunction
    fingerprint: str
    n: int
    dim: int
    metric: DistanceMetric
    block_size: int
    workers: int
    solver: SolverSettings
    data_source: dict[str, Any] = field(default_factory=dict)
    assembly: dict[str, Any] = field(default_factory=dict)
    log_posterior: Optional[float] = None
    engine_version: str = __version__
    config: dict[str, Any] = field(default_factory=dict)


def _metric_to_dict(metric: DistanceMetric) -> dict[str, Any]:
    return {
        "tag": metric.tag.value,
        "ard_scales": None if metric.ard_scales is None else list(metric.ard_scales),
    }


def save_checkpoint(
    path: str | Path,
    model: TrainedModel,
    data_source: Optional[Mapping[str, Any]] = None,
    log_posterior: Optional[float] = None,
    config: Optional[Mapping[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": CHECKPOINT_VERSION,
        "engine_version": __version__,
        "kernel": spec_to_dict(model.spec),
        "theta": dict(sorted(model.theta.items())),
        "noise": model.noise.to_dict(),
        "mean": model.mean.to_dict(),
        "dataset": {
            "fingerprint": model.fingerprint,
            "n": model.dataset.n,
            "dim": model.dataset.dim,
            "metric": _metric_to_dict(model.dataset.metric),
        },
        "assembly_plan": {"block_size": model.plan.block_size, "workers": model.plan.workers},
        "solver": asdict(model.solver),
        "assembly": model.assembly.to_json(),
        "log_marginal_likelihood": model.log_marginal_likelihood,
        "log_posterior": log_posterior,
        "data_source": dict(data_source or {}),
        "config": dict(config or {}),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("Checkpoint must be a JSON object")
    if payload.get("schema_version") != CHECKPOINT_VERSION:
        raise ConfigError(f"Unsupported checkpoint schema version: {payload.get('schema_version')}")
    try:
        dataset = payload["dataset"]
        metric = dataset.get("metric", {})
        ard = metric.get("ard_scales")
        plan = payload.get("assembly_plan", {})
        return Checkpoint(
            spec=spec_from_dict(payload["kernel"]),
            theta={str(name): float(value) for name, value in payload["theta"].items()},
            noise=NoiseModel.from_dict(payload["noise"]),
            mean=MeanFunction.from_dict(payload.get("mean", {})),
            fingerprint=str(dataset["fingerprint"]),
            n=int(dataset["n"]),
            dim=int(dataset["dim"]),
            metric=DistanceMetric(MetricTag(metric.get("tag", "euclidean")), None if ard is None else tuple(ard)),
            block_size=int(plan.get("block_size", 1000)),
            workers=int(plan.get("workers", 1)),
            solver=SolverSettings(**payload.get("solver", {})),
            data_source=dict(payload.get("data_source", {})),
            assembly=dict(payload.get("assembly", {})),
            log_posterior=payload.get("log_posterior"),
            engine_version=str(payload.get("engine_version", "")),
            config=dict(payload.get("config", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"Corrupt checkpoint {path}: {exc}") from exc


def restore_model(
    checkpoint: Checkpoint,
    dataset: Dataset,
    workers: Optional[int] = None,
    audit_log: Optional[AuditLog] = None,
) -> TrainedModel:
    """Refit the cached solution on ``dataset`` after checking its fingerprint."""
    if dataset.fingerprint() != checkpoint.fingerprint:
        raise StaleCheckpointError(
            f"training data fingerprint {dataset.fingerprint()[:12]} does not match checkpoint "
            f"{checkpoint.fingerprint[:12]}"
        )
    plan = plan_assembly(dataset.n, checkpoint.block_size, workers or checkpoint.workers)
    return fit_cache(
        checkpoint.spec,
        checkpoint.theta,
        dataset,
        checkpoint.noise,
        checkpoint.mean,
        plan,
        checkpoint.solver,
        audit_log=audit_log,
    )


def write_predictions(path: str | Path, posterior: PosteriorGaussian, indices: Optional[np.ndarray] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    indices = np.arange(len(posterior)) if indices is None else np.asarray(indices)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PREDICTION_HEADER)
        for index, mu, var in zip(indices, posterior.mean, posterior.variance):
            writer.writerow([int(index), repr(float(mu)), repr(float(var)), posterior.kind.value])
    return path


def read_predictions(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != PREDICTION_HEADER:
                raise InputError(f"prediction file {path} must have header {','.join(PREDICTION_HEADER)}")
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"Cannot read prediction file {path}: {exc}") from exc
    if not rows:
        raise InputError(f"prediction file {path} has no rows")
    try:
        return {
            "index": np.array([int(row["index"]) for row in rows], dtype=np.int64),
            "mean": np.array([float(row["mean"]) for row in rows]),
            "variance": np.array([float(row["variance"]) for row in rows]),
            "variance_kind": np.array([row["variance_kind"] for row in rows]),
        }
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed prediction file {path}: {exc}") from exc
