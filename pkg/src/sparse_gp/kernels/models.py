"""Data models for kernel specs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from sparse_gp.errors import HyperparameterError, InputError

ParamRef = Union[str, float]


class MetricTag(str, Enum):
    EUCLIDEAN = "euclidean"
    L1 = "l1"


class WendlandForm(str, Enum):
    PRINTED = "printed"
    CLASSICAL = "classical"

    @property
    def cubic_coefficient(self) -> float:
        return 35.0 if self == WendlandForm.PRINTED else 32.0


class FieldKind(str, Enum):
    CONSTANT = "constant"
    AXIS_LINEAR = "axis_linear"
    RADIAL_EXPANSION = "radial_expansion"


class FieldRole(str, Enum):
    SIGNAL_STD = "signal_std"
    LENGTH_SIGMA = "length_sigma"
    LENGTH_PHI = "length_phi"
    NOISE_STD = "noise_std"


class SlotRole(str, Enum):
    GENERIC = "generic"
    BUMP_AMPLITUDE = "bump_amplitude"


def resolve(ref: ParamRef, theta: Mapping[str, float]) -> float:
    if isinstance(ref, str):
        try:
            return float(theta[ref])
        except KeyError as exc:
            raise HyperparameterError(f"Unresolved hyperparameter reference: {ref}") from exc
    return float(ref)


@dataclass(frozen=True)
class DistanceMetric:
    tag: MetricTag = MetricTag.EUCLIDEAN
    ard_scales: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.ard_scales is not None and any(not (scale > 0) for scale in self.ard_scales):
            raise InputError("ARD scales must be strictly positive")

    def scale(self, coords: np.ndarray) -> np.ndarray:
        if self.ard_scales is None:
            return coords
        if coords.shape[-1] != len(self.ard_scales):
            raise InputError(
                f"ARD scales have length {len(self.ard_scales)} but points have dimension {coords.shape[-1]}"
            )
        return coords / np.asarray(self.ard_scales, dtype=float)


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]
    index: Optional[int] = None

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise InputError("Points need at least one coordinate")
        if not all(math.isfinite(value) for value in self.coords):
            raise InputError("Point coordinates must be finite")


@dataclass(frozen=True, eq=False)
class PointSet:
    """A batch of points; ``indices`` identifies them within a bound dataset."""

    coords: np.ndarray
    indices: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise InputError("Point coordinates must form an (n, d) array")
        if not np.all(np.isfinite(coords)):
            raise InputError("Point coordinates must be finite")
        object.__setattr__(self, "coords", coords)
        if self.indices is not None:
            indices = np.asarray(self.indices, dtype=np.int64)
            if indices.shape != (coords.shape[0],):
                raise InputError("indices must match the number of points")
            object.__setattr__(self, "indices", indices)

    @classmethod
    def from_points(cls, points: Sequence[Point]) -> "PointSet":
        coords = np.array([point.coords for point in points], dtype=float)
        if any(point.index is None for point in points):
            return cls(coords)
        return cls(coords, np.array([point.index for point in points], dtype=np.int64))

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def take(self, start: int, end: int) -> "PointSet":
        indices = None if self.indices is None else self.indices[start:end]
        return PointSet(self.coords[start:end], indices)


@dataclass(frozen=True)
class ParametricField:
    """Positive scalar field ``exp(raw(x))`` over the input space."""

    kind: FieldKind
    role: FieldRole
    intercept: ParamRef = 0.0
    slopes: tuple[ParamRef, ...] = ()
    weights: tuple[ParamRef, ...] = ()
    centers: tuple[tuple[float, ...], ...] = ()
    width: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == FieldKind.RADIAL_EXPANSION:
            if len(self.weights) != len(self.centers):
                raise InputError("radial expansion needs one weight per center")
            if not self.width > 0:
                raise InputError("radial expansion width must be positive")

    def references(self) -> list[str]:
        refs = [self.intercept, *self.slopes, *self.weights]
        return [ref for ref in refs if isinstance(ref, str)]

    def evaluate(self, coords: np.ndarray, theta: Mapping[str, float]) -> np.ndarray:
        raw = np.full(coords.shape[0], resolve(self.intercept, theta))
        if self.kind == FieldKind.AXIS_LINEAR:
            if len(self.slopes) != coords.shape[1]:
                raise InputError(f"axis-linear field has {len(self.slopes)} slopes for dimension {coords.shape[1]}")
            for axis, slope in enumerate(self.slopes):
                raw = raw + resolve(slope, theta) * coords[:, axis]
        elif self.kind == FieldKind.RADIAL_EXPANSION:
            for center, weight in zip(self.centers, self.weights):
                sq = np.sum((coords - np.asarray(center, dtype=float)) ** 2, axis=1)
                raw = raw + resolve(weight, theta) * np.exp(-sq / (2.0 * self.width**2))
        values = np.exp(raw)
        if not np.all(np.isfinite(values)):
            raise HyperparameterError(f"{self.role.value} field produced non-finite values")
        return values


@dataclass(frozen=True)
class HyperparameterSlot:
    name: str
    lower: float
    upper: float
    block: str = "kernel"
    role: SlotRole = SlotRole.GENERIC
    initial: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise HyperparameterError(f"Slot {self.name}: lower bound must be below upper bound")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class Wendland:
    r0: ParamRef
    form: WendlandForm = WendlandForm.PRINTED


@dataclass(frozen=True)
class Matern32:
    length_scale: ParamRef
    sigma: ParamRef = 1.0


@dataclass(frozen=True)
class NonstatWendland:
    signal: ParametricField
    length: tuple[ParametricField, ...]
    r0: ParamRef = 1.0
    form: WendlandForm = WendlandForm.PRINTED


@dataclass(frozen=True)
class NonstatMatern:
    signal: ParametricField
    length: tuple[ParametricField, ...]


@dataclass(frozen=True)
class BumpFunction:
    center: tuple[float, ...]
    amplitude: float
    shape: float
    radius: float

    def __post_init__(self) -> None:
        if self.amplitude < 0 or not self.shape > 0 or not self.radius > 0:
            raise HyperparameterError("bump needs amplitude >= 0, shape > 0 and radius > 0")


@dataclass(frozen=True)
class BumpGroup:
    centers: tuple[tuple[ParamRef, ...], ...]
    amplitudes: tuple[ParamRef, ...]
    shape: ParamRef = 1.0
    radius: ParamRef = 0.1

    def __post_init__(self) -> None:
        if not self.centers:
            raise InputError("bump group needs at least one bump")
        if len(self.amplitudes) != len(self.centers):
            raise InputError("bump group needs one amplitude per center")

    def bumps(self, theta: Mapping[str, float]) -> list[BumpFunction]:
        shape = resolve(self.shape, theta)
        radius = resolve(self.radius, theta)
        return [
            BumpFunction(
                center=tuple(resolve(coord, theta) for coord in center),
                amplitude=resolve(amplitude, theta),
                shape=shape,
                radius=radius,
            )
            for center, amplitude in zip(self.centers, self.amplitudes)
        ]

    def references(self) -> list[str]:
        refs: list[ParamRef] = [self.shape, self.radius, *self.amplitudes]
        for center in self.centers:
            refs.extend(center)
        return [ref for ref in refs if isinstance(ref, str)]


@dataclass(frozen=True)
class BumpFarfield:
    groups: tuple[BumpGroup, ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise InputError("bump far-field needs at least one group")


@dataclass(frozen=True)
class DeltaGroup:
    members: frozenset[int]


@dataclass(frozen=True)
class DeltaFarfield:
    """Explicit index groups, or the radius rule when ``radius`` is set."""

    groups: tuple[DeltaGroup, ...] = ()
    radius: Optional[ParamRef] = None

    def __post_init__(self) -> None:
        if not self.groups and self.radius is None:
            raise InputError("delta far-field needs explicit groups or a radius rule")


@dataclass(frozen=True)
class SplitFarfield:
    signal: ParametricField
    sigma_length: tuple[ParametricField, ...]
    phi_length: tuple[ParametricField, ...]
    farfield: Union[BumpFarfield, DeltaFarfield]
    r0: ParamRef = 1.0
    form: WendlandForm = WendlandForm.PRINTED


@dataclass(frozen=True)
class Product:
    children: tuple["KernelNode", ...]


@dataclass(frozen=True)
class Sum:
    children: tuple["KernelNode", ...]


@dataclass(frozen=True)
class Scale:
    c: ParamRef
    child: "KernelNode"


KernelNode = Union[
    Wendland,
    Matern32,
    NonstatWendland,
    NonstatMatern,
    BumpFarfield,
    DeltaFarfield,
    SplitFarfield,
    Product,
    Sum,
    Scale,
]


def node_references(node: KernelNode) -> list[str]:
    refs: list[ParamRef] = []
    fields: list[ParametricField] = []
    match node:
        case Wendland(r0=r0):
            refs.append(r0)
        case Matern32(length_scale=length, sigma=sigma):
            refs.extend([length, sigma])
        case NonstatWendland(signal=signal, length=length, r0=r0):
            fields.extend([signal, *length])
            refs.append(r0)
        case NonstatMatern(signal=signal, length=length):
            fields.extend([signal, *length])
        case BumpFarfield(groups=groups):
            for group in groups:
                refs.extend(group.references())
        case DeltaFarfield(radius=radius):
            if radius is not None:
                refs.append(radius)
        case SplitFarfield():
            fields.extend([node.signal, *node.sigma_length, *node.phi_length])
            refs.append(node.r0)
            refs.extend(node_references(node.farfield))
        case Product(children=children) | Sum(children=children):
            for child in children:
                refs.extend(node_references(child))
        case Scale(c=c, child=child):
            refs.append(c)
            refs.extend(node_references(child))
        case _:
            raise InputError(f"Unknown kernel node: {type(node).__name__}")
    for item in fields:
        refs.extend(item.references())
    return [ref for ref in refs if isinstance(ref, str)]


@dataclass(frozen=True)
class KernelSpec:
    root: KernelNode
    slots: tuple[HyperparameterSlot, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [slot.name for slot in self.slots]
        if len(names) != len(set(names)):
            raise HyperparameterError("Duplicate hyperparameter slot names")
        missing = sorted(set(node_references(self.root)) - set(names))
        if missing:
            raise HyperparameterError(f"Kernel references undeclared hyperparameters: {missing}")

    @property
    def slot_names(self) -> list[str]:
        return [slot.name for slot in self.slots]

    def slot(self, name: str) -> HyperparameterSlot:
        for slot in self.slots:
            if slot.name == name:
                return slot
        raise HyperparameterError(f"Unknown hyperparameter: {name}")

    def validate_theta(self, theta: Mapping[str, float]) -> None:
        for slot in self.slots:
            if slot.name not in theta:
                raise HyperparameterError(f"Missing hyperparameter: {slot.name}")
            value = float(theta[slot.name])
            if not math.isfinite(value) or not slot.contains(value):
                raise HyperparameterError(
                    f"Hyperparameter {slot.name}={value} outside [{slot.lower}, {slot.upper}]"
                )


def iter_nodes(node: KernelNode) -> Iterable[KernelNode]:
    yield node
    match node:
        case Product(children=children) | Sum(children=children):
            for child in children:
                yield from iter_nodes(child)
        case Scale(child=child):
            yield from iter_nodes(child)
        case SplitFarfield(farfield=farfield):
            yield from iter_nodes(farfield)
