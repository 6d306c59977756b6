"""JSON experiment-config parsing: fields, model specs, clients, runs.

The schema is versioned; see the README for the full description.  Field
definitions are nested variant objects; matrices are row-major arrays of
numbers; activations and coordinate maps are named by string.
"""

from __future__ import annotations

import json

from .fedavg import FedAvgConfig, GlmClient, QuadraticClient
from .fields import (Affine, Compose, Constant, CoordWise1D, Field, GdMap,
                     Iterate, Linear, PolyExact, Rotation2D, Scale, ScalarMap, Sum)
from .glm import GlmSpec, get_activation, glm_gradient_field
from .polynomials import PolyField
from .conservatism import SamplingConfig

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed configuration: bad JSON, unknown names, missing keys."""


def load_json_text(text: str, origin: str = "<config>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{origin}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from err


def load_json_file(path: str):
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return load_json_text(text, origin=path)


def _need(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"{context}: missing key {key!r}")
    return obj[key]


def glm_spec_from_obj(obj: dict) -> GlmSpec:
    name = _need(obj, "activation", "glm spec")
    try:
        activation = get_activation(name)
    except (KeyError, ValueError) as err:
        raise ConfigError(str(err)) from err
    return GlmSpec(_need(obj, "directions", "glm spec"), activation)


def coordwise_maps_from_names(names) -> list[ScalarMap]:
    maps = []
    for name in names:
        try:
            act = get_activation(name)
        except KeyError as err:
            raise ConfigError(str(err)) from err
        # A named coordinate map is the activation's derivative: quadratic
        # gives the identity map, exp gives e^t, logistic gives the sigmoid.
        maps.append(ScalarMap(name, act.deriv, act.second))
    return maps


def field_from_obj(obj) -> Field:
    if not isinstance(obj, dict):
        raise ConfigError(f"field definition must be an object, got {type(obj).__name__}")
    variant = _need(obj, "variant", "field")
    try:
        if variant == "constant":
            return Constant(_need(obj, "value", variant))
        if variant == "linear":
            return Linear(_need(obj, "matrix", variant))
        if variant == "affine":
            return Affine(_need(obj, "matrix", variant), _need(obj, "offset", variant))
        if variant == "rotation":
            return Rotation2D(int(_need(obj, "j", variant)))
        if variant in ("glm", "glm_gradient"):
            return glm_gradient_field(glm_spec_from_obj(obj))
        if variant in ("gd", "gd_map"):
            return GdMap(field_from_obj(_need(obj, "inner", variant)),
                         float(_need(obj, "gamma", variant)))
        if variant == "iterate":
            return Iterate(field_from_obj(_need(obj, "inner", variant)),
                           int(_need(obj, "k", variant)))
        if variant == "sum":
            fields = [field_from_obj(f) for f in _need(obj, "fields", variant)]
            return Sum(fields, obj.get("weights"))
        if variant == "scale":
            return Scale(float(_need(obj, "c", variant)),
                         field_from_obj(_need(obj, "inner", variant)))
        if variant == "compose":
            return Compose(field_from_obj(_need(obj, "outer", variant)),
                           field_from_obj(_need(obj, "inner", variant)))
        if variant == "poly":
            components = _need(obj, "components", variant)
            nvars = int(obj.get("nvars", len(components)))
            return PolyExact(PolyField.from_texts(components, nvars))
        if variant == "coordwise":
            return CoordWise1D(coordwise_maps_from_names(_need(obj, "functions", variant)))
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {variant} field definition: {err}") from err
    raise ConfigError(f"unknown field variant {variant!r}")


def client_from_obj(obj: dict):
    kind = _need(obj, "kind", "client")
    label = obj.get("label", "")
    try:
        if kind == "quadratic":
            return QuadraticClient(_need(obj, "matrix", kind),
                                   _need(obj, "center", kind), label)
        if kind == "glm":
            return GlmClient(glm_spec_from_obj(obj), label)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {kind} client definition: {err}") from err
    raise ConfigError(f"unknown client kind {kind!r}")


def sampling_from_obj(obj: dict | None) -> SamplingConfig:
    if not obj:
        return SamplingConfig()
    return SamplingConfig(count=int(obj.get("count", 50)),
                          radius=float(obj.get("radius", 1.0)),
                          seed=int(obj.get("seed", 0)),
                          kind=obj.get("kind", "ball"))


def fedavg_config_from_obj(obj: dict, seed_override: int | None = None) -> FedAvgConfig:
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    clients = [client_from_obj(c) for c in _need(obj, "clients", "run config")]
    rounds = obj.get("rounds", obj.get("T"))
    if rounds is None:
        raise ConfigError("run config: missing key 'rounds'")
    seed = int(obj.get("seed", 0)) if seed_override is None else int(seed_override)
    try:
        return FedAvgConfig(
            clients=clients,
            gamma=float(_need(obj, "gamma", "run config")),
            eta=float(obj.get("eta", 1.0)),
            k=int(_need(obj, "k", "run config")),
            rounds=int(rounds),
            x0=_need(obj, "x0", "run config"),
            seed=seed,
            mode=obj.get("mode"),
            alpha=obj.get("alpha"),
            beta=obj.get("beta"),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad run config: {err}") from err
