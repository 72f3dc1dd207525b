"""Versioned JSON documents for kernel specs.

Schema (version 1)::

    {"schema_version": 1,
     "root": <node>,
     "hyperparameters": [{"name", "lower", "upper", "block", "role", "initial"}]}

Nodes carry a ``kind`` key (wendland, matern32, nonstat_wendland, nonstat_matern,
bump_farfield, delta_farfield, split_farfield, product, sum, scale). Parameter
values are either numbers or hyperparameter names.
"""

from __future__ import annotations

import json
from typing import Any

from sparse_gp.errors import ConfigError
from sparse_gp.kernels.models import (
    BumpFarfield,
    BumpGroup,
    DeltaFarfield,
    DeltaGroup,
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

SCHEMA_VERSION = 1


def slot_to_dict(slot: HyperparameterSlot) -> dict[str, Any]:
    return {
        "name": slot.name,
        "lower": slot.lower,
        "upper": slot.upper,
        "block": slot.block,
        "role": slot.role.value,
        "initial": slot.initial,
    }


def slot_from_dict(item: dict[str, Any]) -> HyperparameterSlot:
    try:
        return HyperparameterSlot(
            name=str(item["name"]),
            lower=float(item["lower"]),
            upper=float(item["upper"]),
            block=str(item.get("block", "kernel")),
            role=_enum(SlotRole, item.get("role", "generic"), "role"),
            initial=None if item.get("initial") is None else float(item["initial"]),
        )
    except KeyError as exc:
        raise ConfigError(f"Missing hyperparameter key: {exc.args[0]}") from exc


def spec_to_dict(spec: KernelSpec) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "root": node_to_dict(spec.root),
        "hyperparameters": [slot_to_dict(slot) for slot in spec.slots],
    }


def spec_from_dict(data: dict[str, Any]) -> KernelSpec:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"Unsupported kernel schema version: {version}")
    if "root" not in data:
        raise ConfigError("Kernel document missing root node")
    slots = tuple(slot_from_dict(item) for item in data.get("hyperparameters", []))
    try:
        root = node_from_dict(data["root"])
    except KeyError as exc:
        raise ConfigError(f"Kernel node missing key: {exc.args[0]}") from exc
    return KernelSpec(root=root, slots=slots)


def dumps(spec: KernelSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)


def loads(text: str) -> KernelSpec:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Kernel document is not valid JSON: {exc}") from exc
    return spec_from_dict(payload)


def node_to_dict(node: KernelNode) -> dict[str, Any]:
    match node:
        case Wendland():
            return {"kind": "wendland", "r0": node.r0, "form": node.form.value}
        case Matern32():
            return {"kind": "matern32", "length_scale": node.length_scale, "sigma": node.sigma}
        case NonstatWendland():
            return {
                "kind": "nonstat_wendland",
                "signal": field_to_dict(node.signal),
                "length": [field_to_dict(item) for item in node.length],
                "r0": node.r0,
                "form": node.form.value,
            }
        case NonstatMatern():
            return {
                "kind": "nonstat_matern",
                "signal": field_to_dict(node.signal),
                "length": [field_to_dict(item) for item in node.length],
            }
        case BumpFarfield():
            return {
                "kind": "bump_farfield",
                "groups": [
                    {
                        "centers": [list(center) for center in group.centers],
                        "amplitudes": list(group.amplitudes),
                        "shape": group.shape,
                        "radius": group.radius,
                    }
                    for group in node.groups
                ],
            }
        case DeltaFarfield():
            return {
                "kind": "delta_farfield",
                "groups": [sorted(group.members) for group in node.groups],
                "radius": node.radius,
            }
        case SplitFarfield():
            return {
                "kind": "split_farfield",
                "signal": field_to_dict(node.signal),
                "sigma_length": [field_to_dict(item) for item in node.sigma_length],
                "phi_length": [field_to_dict(item) for item in node.phi_length],
                "farfield": node_to_dict(node.farfield),
                "r0": node.r0,
                "form": node.form.value,
            }
        case Product(children=children):
            return {"kind": "product", "children": [node_to_dict(child) for child in children]}
        case Sum(children=children):
            return {"kind": "sum", "children": [node_to_dict(child) for child in children]}
        case Scale():
            return {"kind": "scale", "c": node.c, "child": node_to_dict(node.child)}
    raise ConfigError(f"Cannot serialize kernel node {type(node).__name__}")


def node_from_dict(data: dict[str, Any]) -> KernelNode:
    kind = data.get("kind")
    form = _enum(WendlandForm, data.get("form", "printed"), "form")
    if kind == "wendland":
        return Wendland(r0=_ref(data["r0"]), form=form)
    if kind == "matern32":
        return Matern32(length_scale=_ref(data["length_scale"]), sigma=_ref(data.get("sigma", 1.0)))
    if kind == "nonstat_wendland":
        return NonstatWendland(
            signal=field_from_dict(data["signal"]),
            length=tuple(field_from_dict(item) for item in data["length"]),
            r0=_ref(data.get("r0", 1.0)),
            form=form,
        )
    if kind == "nonstat_matern":
        return NonstatMatern(
            signal=field_from_dict(data["signal"]),
            length=tuple(field_from_dict(item) for item in data["length"]),
        )
    if kind == "bump_farfield":
        return BumpFarfield(
            groups=tuple(
                BumpGroup(
                    centers=tuple(tuple(_ref(coord) for coord in center) for center in group["centers"]),
                    amplitudes=tuple(_ref(value) for value in group["amplitudes"]),
                    shape=_ref(group.get("shape", 1.0)),
                    radius=_ref(group.get("radius", 0.1)),
                )
                for group in data["groups"]
            )
        )
    if kind == "delta_farfield":
        radius = data.get("radius")
        return DeltaFarfield(
            groups=tuple(DeltaGroup(frozenset(int(i) for i in members)) for members in data.get("groups", [])),
            radius=None if radius is None else _ref(radius),
        )
    if kind == "split_farfield":
        farfield = node_from_dict(data["farfield"])
        if not isinstance(farfield, (BumpFarfield, DeltaFarfield)):
            raise ConfigError("split_farfield needs a bump or delta far-field child")
        return SplitFarfield(
            signal=field_from_dict(data["signal"]),
            sigma_length=tuple(field_from_dict(item) for item in data["sigma_length"]),
            phi_length=tuple(field_from_dict(item) for item in data["phi_length"]),
            farfield=farfield,
            r0=_ref(data.get("r0", 1.0)),
            form=form,
        )
    if kind == "product":
        return Product(children=tuple(node_from_dict(child) for child in data["children"]))
    if kind == "sum":
        return Sum(children=tuple(node_from_dict(child) for child in data["children"]))
    if kind == "scale":
        return Scale(c=_ref(data["c"]), child=node_from_dict(data["child"]))
    raise ConfigError(f"Invalid kernel node kind: {kind}")


def field_to_dict(item: ParametricField) -> dict[str, Any]:
    return {
        "kind": item.kind.value,
        "role": item.role.value,
        "intercept": item.intercept,
        "slopes": list(item.slopes),
        "weights": list(item.weights),
        "centers": [list(center) for center in item.centers],
        "width": item.width,
    }


def field_from_dict(data: dict[str, Any]) -> ParametricField:
    return ParametricField(
        kind=_enum(FieldKind, data.get("kind", "constant"), "field kind"),
        role=_enum(FieldRole, data["role"], "field role"),
        intercept=_ref(data.get("intercept", 0.0)),
        slopes=tuple(_ref(value) for value in data.get("slopes", [])),
        weights=tuple(_ref(value) for value in data.get("weights", [])),
        centers=tuple(tuple(float(coord) for coord in center) for center in data.get("centers", [])),
        width=float(data.get("width", 1.0)),
    )


def _ref(value: Any) -> str | float:
    if isinstance(value, str):
        return value
    return float(value)


def _enum(enum_cls, value: Any, key: str):
    try:
        return enum_cls(value)
    except Exception as exc:
        raise ConfigError(f"Invalid {key}: {value}") from exc
