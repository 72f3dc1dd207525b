"""CSV datasets and training-data provenance."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from sparse_gp.config.loader import data_config_from_dict
from sparse_gp.config.models import DataConfig, DataSource
from sparse_gp.errors import InputError
from sparse_gp.gp.models import Dataset
from sparse_gp.kernels.models import DistanceMetric
from sparse_gp.bench.synthetic import make_synthetic_dataset, split_dataset

TARGET = "y"
NOISE_COLUMN = "noise_var"


@dataclass(frozen=True, eq=False)
class CsvTable:
    coords: np.ndarray
    y: Optional[np.ndarray]
    noise_var: Optional[np.ndarray]


def _expected_features(header: list[str]) -> int:
    dim = 0
    while dim < len(header) and header[dim] == f"x{dim}":
        dim += 1
    return dim


def read_table(path: str | Path, require_target: bool = True) -> CsvTable:
    """Parse ``x0,...,x{d-1}[,y][,noise_var]`` with line-numbered errors."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"data file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise InputError(f"{path}: empty file")
        header = [column.strip() for column in header]
        dim = _expected_features(header)
        if dim < 1:
            raise InputError(f"{path}:1: header must start with x0")
        rest = header[dim:]
        allowed = ([TARGET] if TARGET in rest else []) + ([NOISE_COLUMN] if NOISE_COLUMN in rest else [])
        if rest != allowed:
            raise InputError(f"{path}:1: unexpected columns {rest}; expected x0..x{dim - 1},y[,noise_var]")
        if require_target and TARGET not in rest:
            raise InputError(f"{path}:1: missing target column {TARGET}")
        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise InputError(f"{path}:{reader.line_num}: {exc}") from exc
            if not all(math.isfinite(value) for value in values):
                raise InputError(f"{path}:{reader.line_num}: non-finite value")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    table = np.array(rows, dtype=float)
    y = table[:, header.index(TARGET)] if TARGET in header else None
    noise = table[:, header.index(NOISE_COLUMN)] if NOISE_COLUMN in header else None
    if noise is not None and np.any(noise < 0):
        raise InputError(f"{path}: noise variances must be nonnegative")
    return CsvTable(coords=table[:, :dim], y=y, noise_var=noise)


def load_csv(path: str | Path, metric: Optional[DistanceMetric] = None) -> Dataset:
    table = read_table(path)
    return Dataset.from_arrays(table.coords, table.y, metric)


def write_csv(path: str | Path, dataset: Dataset, noise_var: Optional[np.ndarray] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"x{k}" for k in range(dataset.dim)] + [TARGET]
    if noise_var is not None:
        header.append(NOISE_COLUMN)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(value)) for value in dataset.x[i]] + [repr(float(dataset.y[i]))]
            if noise_var is not None:
                row.append(repr(float(noise_var[i])))
            writer.writerow(row)
    return path


@dataclass(frozen=True, eq=False)
class TrainingData:
    train: Dataset
    test: Optional[Dataset]
    noise_var: Optional[np.ndarray] = None
    test_noise_var: Optional[np.ndarray] = None
    grid_x: Optional[np.ndarray] = None
    grid_truth: Optional[np.ndarray] = None
    provenance: dict[str, Any] = field(default_factory=dict)


def provenance(config: DataConfig) -> dict[str, Any]:
    return {
        "source": config.source.value,
        "path": config.path,
        "test_path": config.test_path,
        "n_train": config.n_train,
        "n_test": config.n_test,
        "noise_std": config.noise_std,
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "grid_points": config.grid_points,
        "metric": config.metric.value,
        "ard_scales": None if config.ard_scales is None else list(config.ard_scales),
    }


def load_training_data(config: DataConfig) -> TrainingData:
    metric = DistanceMetric(config.metric, config.ard_scales)
    if config.source == DataSource.SYNTHETIC_F1:
        total = config.n_train + config.n_test
        sample = make_synthetic_dataset(total, config.noise_std, config.seed, config.grid_points)
        split = split_dataset(sample.dataset, config.n_test / total, config.seed)
        return TrainingData(
            train=Dataset(split.train.points, split.train.y, metric),
            test=split.test,
            grid_x=sample.grid_x,
            grid_truth=sample.grid_truth,
            provenance=provenance(config),
        )

    table = read_table(config.path)
    full = Dataset.from_arrays(table.coords, table.y, metric)
    if config.test_path is not None:
        test_table = read_table(config.test_path)
        if test_table.coords.shape[1] != full.dim:
            raise InputError(f"test file has dimension {test_table.coords.shape[1]}, training data {full.dim}")
        return TrainingData(
            train=full,
            test=Dataset.from_arrays(test_table.coords, test_table.y),
            noise_var=table.noise_var,
            test_noise_var=test_table.noise_var,
            provenance=provenance(config),
        )
    if config.test_fraction is not None:
        split = split_dataset(full, config.test_fraction, config.seed)
        noise = None if table.noise_var is None else table.noise_var[split.train_indices]
        test_noise = None if table.noise_var is None else table.noise_var[split.test_indices]
        return TrainingData(
            train=Dataset(split.train.points, split.train.y, metric),
            test=split.test,
            noise_var=noise,
            test_noise_var=test_noise,
            provenance=provenance(config),
        )
    return TrainingData(train=full, test=None, noise_var=table.noise_var, provenance=provenance(config))


def training_data_from_provenance(data: Mapping[str, Any]) -> TrainingData:
    """Recreate the training split a checkpoint was fitted on."""
    return load_training_data(data_config_from_dict(dict(data)))
