"""Turn config sections into engine objects."""

from __future__ import annotations

from typing import Any, Optional

import numpy as np

from sparse_gp.assembly.engine import plan_assembly
from sparse_gp.assembly.models import AssemblyPlan
from sparse_gp.config.models import EngineConfig, MeanConfig, NoiseConfig
from sparse_gp.errors import ConfigError
from sparse_gp.gp.models import MeanFunction, MeanKind, NoiseKind, NoiseModel
from sparse_gp.kernels.models import DistanceMetric, HyperparameterSlot, KernelSpec, WendlandForm
from sparse_gp.kernels.presets import build_preset
from sparse_gp.kernels.serialization import spec_from_dict
from sparse_gp.mcmc.models import MCMCConfig

NOISE_SLOT = "noise_var"
MEAN_SLOT = "mean_value"


def build_kernel(config: EngineConfig, dim: int) -> KernelSpec:
    if config.kernel.spec is not None:
        return spec_from_dict(config.kernel.spec)
    options: dict[str, Any] = {}
    for key, value in config.kernel.options.items():
        if key == "form":
            try:
                value = WendlandForm(value)
            except ValueError as exc:
                raise ConfigError(f"Invalid kernel.options.form: {value}") from exc
        elif isinstance(value, list):
            value = tuple(value)
        options[key] = value
    options["dim"] = dim
    return build_preset(config.kernel.preset, **options)


def build_noise(config: NoiseConfig, per_point: Optional[np.ndarray] = None) -> NoiseModel:
    kind = NoiseKind(config.kind)
    if kind == NoiseKind.CONSTANT:
        if not config.trainable:
            return NoiseModel(NoiseKind.CONSTANT, variance=config.variance)
        lower, upper = config.bounds
        if not lower <= config.variance <= upper:
            raise ConfigError(f"Invalid noise.variance: {config.variance} outside {config.bounds}")
        slot = HyperparameterSlot(NOISE_SLOT, lower, upper, block="noise", initial=config.variance)
        return NoiseModel(NoiseKind.CONSTANT, slots=(slot,), variance=NOISE_SLOT)
    if kind == NoiseKind.PER_POINT:
        if per_point is None:
            raise ConfigError("per_point noise needs a noise_var column in the training data")
        return NoiseModel(NoiseKind.PER_POINT, per_point=per_point)
    return NoiseModel.from_dict({"kind": kind.value, "field": config.std_field, "slots": config.slots})


def build_mean(config: MeanConfig) -> MeanFunction:
    kind = MeanKind(config.kind)
    if kind == MeanKind.CONSTANT and config.trainable:
        lower, upper = config.bounds
        slot = HyperparameterSlot(MEAN_SLOT, lower, upper, block="mean", initial=config.value)
        return MeanFunction(MeanKind.CONSTANT, slots=(slot,), value=MEAN_SLOT)
    if kind == MeanKind.CONSTANT:
        return MeanFunction(MeanKind.CONSTANT, value=config.value)
    if kind == MeanKind.PLUGIN:
        return MeanFunction(MeanKind.PLUGIN, plugin=config.plugin)
    return MeanFunction()


def build_metric(config: EngineConfig) -> DistanceMetric:
    return DistanceMetric(config.data.metric, config.data.ard_scales)


def build_plan(config: EngineConfig, n: int, workers: Optional[int] = None) -> AssemblyPlan:
    return plan_assembly(n, config.assembly.block_size, workers or config.assembly.workers, config.assembly.retries)


def build_mcmc(config: EngineConfig, seed_offset: int = 0) -> MCMCConfig:
    section = config.mcmc
    return MCMCConfig(
        iterations=section.iterations,
        seed=section.seed + seed_offset,
        blocks=None if section.blocks is None else {k: tuple(v) for k, v in section.blocks.items()},
        initial_scale=section.initial_scale,
        block_scales=dict(section.block_scales),
        adapt_window=section.adapt_window,
        target_acceptance=section.target_acceptance,
        adapt_rate=section.adapt_rate,
        burn_in_fraction=section.burn_in_fraction,
        verbose=section.verbose,
    )
