"""The 1-D synthetic benchmark function and seeded splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sparse_gp.errors import InputError
from sparse_gp.gp.models import Dataset


def synth_f1(x: float | np.ndarray) -> float | np.ndarray:
    """sin(5x) + cos(20x) + 2 (x - 0.4)^2 cos(400x)."""
    x = np.asarray(x, dtype=float)
    value = np.sin(5.0 * x) + np.cos(20.0 * x) + 2.0 * (x - 0.4) ** 2 * np.cos(400.0 * x)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    dataset: Dataset
    grid_x: np.ndarray
    grid_truth: np.ndarray
    noise_std: float
    seed: int


def make_synthetic_dataset(n: int, noise_std: float, seed: int, grid_points: int = 1000) -> SyntheticSample:
    if n < 1:
        raise InputError(f"synthetic dataset needs n >= 1, got {n}")
    if noise_std < 0:
        raise InputError(f"noise std must be nonnegative, got {noise_std}")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.uniform(0.0, 1.0, size=n)
    y = synth_f1(x)
    if noise_std > 0:
        y = y + rng.normal(0.0, noise_std, size=n)
    grid_x = np.linspace(0.0, 1.0, grid_points)
    return SyntheticSample(
        dataset=Dataset.from_arrays(x[:, None], y),
        grid_x=grid_x,
        grid_truth=synth_f1(grid_x),
        noise_std=float(noise_std),
        seed=int(seed),
    )


@dataclass(frozen=True, eq=False)
class Split:
    train: Dataset
    test: Dataset
    train_indices: np.ndarray
    test_indices: np.ndarray


def split_dataset(dataset: Dataset, test_fraction: float, seed: int) -> Split:
    """Disjoint seeded train/test split covering every row."""
    if not 0.0 < test_fraction < 1.0:
        raise InputError(f"test fraction must lie in (0, 1), got {test_fraction}")
    if dataset.n < 2:
        raise InputError("splitting needs at least two rows")
    n_test = min(max(int(round(test_fraction * dataset.n)), 1), dataset.n - 1)
    order = np.random.Generator(np.random.PCG64(seed)).permutation(dataset.n)
    test_indices = np.sort(order[:n_test])
    train_indices = np.sort(order[n_test:])
    return Split(
        train=dataset.subset(train_indices),
        test=dataset.subset(test_indices),
        train_indices=train_indices,
        test_indices=test_indices,
    )
