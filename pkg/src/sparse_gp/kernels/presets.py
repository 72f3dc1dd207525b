"""Ready-made kernel families with their hyperparameter slots."""

from __future__ import annotations

import itertools
import math
from typing import Any, Callable

import numpy as np

from sparse_gp.errors import ConfigError
from sparse_gp.kernels.models import (
    BumpFarfield,
    BumpGroup,
    DeltaFarfield,
    FieldKind,
    FieldRole,
    HyperparameterSlot,
    KernelNode,
    KernelSpec,
    Matern32,
    NonstatMatern,
    NonstatWendland,
    ParametricField,
    Product,
    Scale,
    SlotRole,
    SplitFarfield,
    Sum,
    Wendland,
    WendlandForm,
)


def grid_centers(dim: int, per_axis: int, lower: float = 0.0, upper: float = 1.0) -> tuple[tuple[float, ...], ...]:
    if per_axis == 1:
        axis = [0.5 * (lower + upper)]
    else:
        axis = [float(value) for value in np.linspace(lower, upper, per_axis)]
    return tuple(tuple(point) for point in itertools.product(axis, repeat=dim))


def radial_field(
    prefix: str,
    role: FieldRole,
    centers: tuple[tuple[float, ...], ...],
    width: float,
    intercept_bounds: tuple[float, float],
    intercept_initial: float,
    weight_bound: float,
    block: str,
) -> tuple[ParametricField, list[HyperparameterSlot]]:
    slots = [
        HyperparameterSlot(f"{prefix}_log", intercept_bounds[0], intercept_bounds[1], block, initial=intercept_initial)
    ]
    weights = []
    for m in range(len(centers)):
        slots.append(HyperparameterSlot(f"{prefix}_w{m}", -weight_bound, weight_bound, block, initial=0.0))
        weights.append(f"{prefix}_w{m}")
    item = ParametricField(
        kind=FieldKind.RADIAL_EXPANSION if centers else FieldKind.CONSTANT,
        role=role,
        intercept=f"{prefix}_log",
        weights=tuple(weights),
        centers=centers,
        width=width,
    )
    return item, slots


def wendland_preset(
    dim: int = 1,
    r0_bounds: tuple[float, float] = (0.001, 0.5),
    variance_bounds: tuple[float, float] = (0.01, 10.0),
    form: WendlandForm = WendlandForm.PRINTED,
    **_: Any,
) -> KernelSpec:
    return KernelSpec(
        root=Scale("signal_var", Wendland("r0", form)),
        slots=(
            HyperparameterSlot("signal_var", *variance_bounds, block="kernel", initial=1.0),
            HyperparameterSlot("r0", *r0_bounds, block="kernel"),
        ),
    )


def matern32_preset(
    dim: int = 1,
    length_bounds: tuple[float, float] = (0.001, 1.0),
    sigma_bounds: tuple[float, float] = (0.01, 10.0),
    **_: Any,
) -> KernelSpec:
    return KernelSpec(
        root=Matern32("length_scale", "sigma"),
        slots=(
            HyperparameterSlot("length_scale", *length_bounds, block="kernel"),
            HyperparameterSlot("sigma", *sigma_bounds, block="kernel", initial=1.0),
        ),
    )


def nonstat_wendland_preset(
    dim: int = 1,
    centers_per_axis: int = 5,
    domain: tuple[float, float] = (0.0, 1.0),
    width: float | None = None,
    length_log_bounds: tuple[float, float] = (math.log(1e-3), math.log(0.5)),
    length_log_initial: float = math.log(0.02),
    signal_log_bounds: tuple[float, float] = (-3.0, 2.0),
    weight_bound: float = 3.0,
    length_weight_bound: float = 1.0,
    r0: float = 1.0,
    form: WendlandForm = WendlandForm.PRINTED,
    **_: Any,
) -> KernelSpec:
    centers = grid_centers(dim, centers_per_axis, *domain) if centers_per_axis > 0 else ()
    width = width or (domain[1] - domain[0]) / max(centers_per_axis, 1)
    signal, signal_slots = radial_field(
        "signal", FieldRole.SIGNAL_STD, centers, width, signal_log_bounds, 0.0, weight_bound, "signal"
    )
    length, length_slots = radial_field(
        "length", FieldRole.LENGTH_SIGMA, centers, width, length_log_bounds, length_log_initial, length_weight_bound, "length"
    )
    return KernelSpec(
        root=NonstatWendland(signal=signal, length=(length,), r0=r0, form=form),
        slots=tuple(signal_slots + length_slots),
    )


def _bump_groups(
    dim: int,
    n_groups: int,
    bumps_per_axis: int,
    domain: tuple[float, float],
    amplitude_bound: float,
) -> tuple[BumpFarfield, list[HyperparameterSlot]]:
    centers = grid_centers(dim, bumps_per_axis, *domain)
    slots = [
        HyperparameterSlot("bump_shape", 0.1, 5.0, block="bumps", initial=1.0),
        HyperparameterSlot("bump_radius", 0.01, float(domain[1] - domain[0]), block="bumps"),
    ]
    groups = []
    for u in range(n_groups):
        amplitudes = []
        for p in range(len(centers)):
            name = f"bump_a{u}_{p}"
            slots.append(HyperparameterSlot(name, 0.0, amplitude_bound, block="bumps", role=SlotRole.BUMP_AMPLITUDE))
            amplitudes.append(name)
        groups.append(BumpGroup(centers=centers, amplitudes=tuple(amplitudes), shape="bump_shape", radius="bump_radius"))
    return BumpFarfield(tuple(groups)), slots


def _matern_core(length_bounds: tuple[float, float], sigma_bounds: tuple[float, float]) -> tuple[KernelNode, list[HyperparameterSlot]]:
    return Matern32("core_length", "core_sigma"), [
        HyperparameterSlot("core_length", *length_bounds, block="core"),
        HyperparameterSlot("core_sigma", *sigma_bounds, block="core", initial=1.0),
    ]


def bump_preset(
    dim: int = 1,
    n_groups: int = 1,
    bumps_per_axis: int = 4,
    domain: tuple[float, float] = (0.0, 1.0),
    amplitude_bound: float = 2.0,
    r0_bounds: tuple[float, float] = (0.001, 0.5),
    core_length_bounds: tuple[float, float] = (0.01, 10.0),
    core_sigma_bounds: tuple[float, float] = (0.01, 10.0),
    form: WendlandForm = WendlandForm.PRINTED,
    **_: Any,
) -> KernelSpec:
    farfield, bump_slots = _bump_groups(dim, n_groups, bumps_per_axis, domain, amplitude_bound)
    core, core_slots = _matern_core(core_length_bounds, core_sigma_bounds)
    root = Product((core, Sum((farfield, Wendland("r0", form)))))
    slots = core_slots + [HyperparameterSlot("r0", *r0_bounds, block="core")] + bump_slots
    return KernelSpec(root=root, slots=tuple(slots))


def delta_preset(
    dim: int = 1,
    radius_bounds: tuple[float, float] = (0.0, 0.1),
    r0_bounds: tuple[float, float] = (0.001, 0.5),
    core_length_bounds: tuple[float, float] = (0.01, 10.0),
    core_sigma_bounds: tuple[float, float] = (0.01, 10.0),
    form: WendlandForm = WendlandForm.PRINTED,
    **_: Any,
) -> KernelSpec:
    core, core_slots = _matern_core(core_length_bounds, core_sigma_bounds)
    root = Product((core, Sum((Wendland("r0", form), DeltaFarfield(radius="delta_radius")))))
    slots = core_slots + [
        HyperparameterSlot("r0", *r0_bounds, block="core"),
        HyperparameterSlot("delta_radius", *radius_bounds, block="deltas"),
    ]
    return KernelSpec(root=root, slots=tuple(slots))


def combination_preset(
    dim: int = 1,
    n_groups: int = 1,
    bumps_per_axis: int = 4,
    domain: tuple[float, float] = (0.0, 1.0),
    amplitude_bound: float = 2.0,
    length_log_bounds: tuple[float, float] = (math.log(1e-3), math.log(0.5)),
    phi_log_bounds: tuple[float, float] = (math.log(1e-2), math.log(10.0)),
    signal_log_bounds: tuple[float, float] = (-3.0, 2.0),
    r0: float = 1.0,
    form: WendlandForm = WendlandForm.PRINTED,
    **_: Any,
) -> KernelSpec:
    farfield, bump_slots = _bump_groups(dim, n_groups, bumps_per_axis, domain, amplitude_bound)
    signal, signal_slots = radial_field("signal", FieldRole.SIGNAL_STD, (), 1.0, signal_log_bounds, 0.0, 1.0, "signal")
    sigma_length, sigma_slots = radial_field(
        "length", FieldRole.LENGTH_SIGMA, (), 1.0, length_log_bounds, math.log(0.02), 1.0, "length"
    )
    phi_length, phi_slots = radial_field(
        "phi", FieldRole.LENGTH_PHI, (), 1.0, phi_log_bounds, 0.0, 1.0, "length"
    )
    root = SplitFarfield(
        signal=signal,
        sigma_length=(sigma_length,),
        phi_length=(phi_length,),
        farfield=farfield,
        r0=r0,
        form=form,
    )
    return KernelSpec(root=root, slots=tuple(signal_slots + sigma_slots + phi_slots + bump_slots))


def nonstat_matern_core(dim: int = 1, **_: Any) -> KernelSpec:
    signal, signal_slots = radial_field("signal", FieldRole.SIGNAL_STD, (), 1.0, (-3.0, 2.0), 0.0, 1.0, "signal")
    length, length_slots = radial_field(
        "length", FieldRole.LENGTH_SIGMA, (), 1.0, (math.log(1e-2), math.log(10.0)), 0.0, 1.0, "length"
    )
    return KernelSpec(root=NonstatMatern(signal=signal, length=(length,)), slots=tuple(signal_slots + length_slots))


PRESETS: dict[str, Callable[..., KernelSpec]] = {
    "wendland": wendland_preset,
    "matern32": matern32_preset,
    "nonstat_wendland": nonstat_wendland_preset,
    "nonstat_matern": nonstat_matern_core,
    "bump": bump_preset,
    "delta": delta_preset,
    "combination": combination_preset,
}


def build_preset(name: str, **options: Any) -> KernelSpec:
    builder = PRESETS.get(name)
    if builder is None:
        raise ConfigError(f"Unknown kernel preset: {name}")
    return builder(**options)
