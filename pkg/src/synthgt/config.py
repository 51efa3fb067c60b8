"""YAML dataset definitions.

A document maps dataset names to builder recipes. Anchors and aliases are
expanded by the YAML layer before validation, so one class block can be
shared by several datasets::

    schema: 1
    datasets:
      train:
        n_timesteps: 100
        n_samples: 200
        random_state: 42
        classes: &classes
          - label: 0
            channels:
              - signals:
                  - {kind: gaussian_noise, sigma: 1.0}
                features:
                  - {kind: gaussian_pulse, amplitude: 3.0, random_location: true, length_pct: 0.3}
      test:
        n_timesteps: 100
        n_samples: 50
        random_state: 43
        classes: *classes

Validation is strict: unknown keys, unknown generator kinds and unknown
generator parameters are errors, reported with a dotted path such as
``datasets.train.classes[1].channels[0].features[0].length_pct``.
"""

from __future__ import annotations

import difflib
import os
from pathlib import Path
from typing import Any, Union

import yaml

from .builder import (BuilderConfig, ChannelSpec, ClassSpec, ConfigError, FeaturePlacement,
                      TimeSeriesBuilder, fingerprint)
from .core import NORMALIZATIONS, SynthError
from .generators import GeneratorSpec, InvalidParam, MissingParam, UnknownGenerator, get_entry, resolve

__all__ = [
    "ConfigFileError", "ParseError", "SchemaError", "ConfigValueError",
    "load_configs", "load_builders_from_config", "fingerprint",
]

SCHEMA_VERSION = 1
PLACEMENT_KEYS = ("random_location", "fixed_start", "length_pct", "align_across_channels")
_TOP_KEYS = ("schema", "datasets")
_DATASET_KEYS = ("n_timesteps", "n_samples", "n_dims", "normalization", "random_state", "keep_components", "classes")
_CLASS_KEYS = ("label", "channels")
_CHANNEL_KEYS = ("channel", "signals", "features")


class ConfigFileError(SynthError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(ConfigFileError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class SchemaError(ConfigFileError, ValueError):
    pass


class ConfigValueError(ConfigFileError, ValueError):
    pass


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys (merge keys excepted)."""

    def construct_mapping(self, node, deep=False):
        if isinstance(node, yaml.MappingNode):
            seen = set()
            for key_node, _ in node.value:
                if key_node.tag == "tag:yaml.org,2002:merge":
                    continue
                key = self.construct_object(key_node, deep=True)
                if key in seen:
                    mark = key_node.start_mark
                    raise ParseError(f"duplicate key {key!r}", mark.line + 1, mark.column + 1)
                seen.add(key)
        return super().construct_mapping(node, deep)


def _parse(text: str) -> Any:
    try:
        return yaml.load(text, Loader=_StrictLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (None, None)
        raise ParseError(exc.problem or str(exc), line, col) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None


def _read_source(source: Union[str, os.PathLike]) -> str:
    if isinstance(source, os.PathLike):
        return Path(source).read_text(encoding="utf-8")
    if "\n" not in source and (source.endswith((".yaml", ".yml")) or os.path.isfile(source)):
        return Path(source).read_text(encoding="utf-8")
    return source


# ---------------------------------------------------------------------------
# schema helpers


def _mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected a mapping, got {type(value).__name__}", path)
    for key in value:
        if not isinstance(key, str):
            raise SchemaError(f"keys must be strings, got {key!r}", path)
    return value


def _list(value, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected a list, got {type(value).__name__}", path)
    return value


def _check_keys(data: dict, allowed, path: str) -> None:
    for key in data:
        if key not in allowed:
            hint = difflib.get_close_matches(key, list(allowed), n=3)
            extra = f" (did you mean: {', '.join(hint)}?)" if hint else ""
            raise SchemaError(f"unknown key {key!r}{extra}", path)


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise SchemaError(f"missing required field {key!r}", path)
    return data[key]


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    return float(value)


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(f"expected true/false, got {value!r}", path)
    return value


# ---------------------------------------------------------------------------
# document -> BuilderConfig


def _generator(entry, path: str, allow_placement: bool) -> tuple[GeneratorSpec, dict]:
    entry = _mapping(entry, path)
    kind = _require(entry, "kind", path)
    if not isinstance(kind, str):
        raise SchemaError(f"generator kind must be a string, got {kind!r}", f"{path}.kind")
    try:
        known = get_entry(kind).param_names
    except UnknownGenerator as exc:
        raise SchemaError(str(exc), f"{path}.kind") from None

    params, placement = {}, {}
    for key, value in entry.items():
        if key == "kind":
            continue
        if allow_placement and key in PLACEMENT_KEYS:
            placement[key] = value
        elif key in known:
            params[key] = _number(value, f"{path}.{key}")
        else:
            allowed = list(known) + (list(PLACEMENT_KEYS) if allow_placement else [])
            hint = difflib.get_close_matches(key, allowed, n=3)
            extra = f" (did you mean: {', '.join(hint)}?)" if hint else ""
            raise SchemaError(f"unknown parameter {key!r} for generator {kind!r}{extra}", path)

    spec = GeneratorSpec(kind, params)
    try:
        resolve(spec)
    except MissingParam as exc:
        raise SchemaError(str(exc), path) from None
    except InvalidParam as exc:
        raise ConfigValueError(str(exc), f"{path}.{exc.param}") from None
    return spec, placement


def _placement(raw: dict, path: str, n_timesteps: int) -> FeaturePlacement:
    if "length_pct" not in raw:
        raise SchemaError("missing required field 'length_pct'", path)
    length_pct = _number(raw["length_pct"], f"{path}.length_pct")
    random_location = _bool(raw.get("random_location", False), f"{path}.random_location")
    fixed_start = raw.get("fixed_start")
    if fixed_start is not None:
        fixed_start = _int(fixed_start, f"{path}.fixed_start")
    align = _bool(raw.get("align_across_channels", True), f"{path}.align_across_channels")
    if not 0.0 < length_pct <= 1.0:
        raise ConfigValueError(f"length_pct must lie in (0, 1], got {length_pct}", f"{path}.length_pct")
    if fixed_start is not None and fixed_start < 0:
        raise ConfigValueError(f"fixed_start must be non-negative, got {fixed_start}", f"{path}.fixed_start")
    try:
        placement = FeaturePlacement(length_pct, random_location, fixed_start, align)
        placement.check(n_timesteps)
    except ConfigError as exc:
        raise ConfigValueError(str(exc), path) from None
    return placement


def _channel(entry, path: str, default_index: int, n_timesteps: int) -> tuple[int, ChannelSpec]:
    entry = _mapping(entry, path)
    _check_keys(entry, _CHANNEL_KEYS, path)
    index = _int(entry.get("channel", default_index), f"{path}.channel")
    spec = ChannelSpec()
    for j, sig in enumerate(_list(entry.get("signals", []) or [], f"{path}.signals")):
        gen, _ = _generator(sig, f"{path}.signals[{j}]", allow_placement=False)
        spec.signals.append(gen)
    for j, feat in enumerate(_list(entry.get("features", []) or [], f"{path}.features")):
        fpath = f"{path}.features[{j}]"
        gen, raw = _generator(feat, fpath, allow_placement=True)
        spec.features.append((gen, _placement(raw, fpath, n_timesteps)))
    return index, spec


def _dataset(name: str, data, path: str) -> BuilderConfig:
    data = _mapping(data, path)
    _check_keys(data, _DATASET_KEYS, path)
    n_timesteps = _int(_require(data, "n_timesteps", path), f"{path}.n_timesteps")
    n_samples = _int(_require(data, "n_samples", path), f"{path}.n_samples")
    n_dims = _int(data.get("n_dims", 1), f"{path}.n_dims")
    random_state = _int(_require(data, "random_state", path), f"{path}.random_state")
    for key, value in (("n_timesteps", n_timesteps), ("n_samples", n_samples), ("n_dims", n_dims)):
        if value < 1:
            raise ConfigValueError(f"must be a positive integer, got {value}", f"{path}.{key}")
    if not 0 <= random_state < 2 ** 64:
        raise ConfigValueError(f"must lie in [0, 2**64), got {random_state}", f"{path}.random_state")
    normalization = data.get("normalization", "zscore")
    if normalization not in NORMALIZATIONS:
        raise SchemaError(f"normalization must be one of {list(NORMALIZATIONS)}, got {normalization!r}",
                          f"{path}.normalization")
    keep = _bool(data.get("keep_components", True), f"{path}.keep_components")

    config = BuilderConfig(n_timesteps=n_timesteps, n_samples=n_samples, n_dims=n_dims,
                           normalization=normalization, random_state=random_state, keep_components=keep)
    classes = _list(_require(data, "classes", path), f"{path}.classes")
    if not classes:
        raise SchemaError("at least one class is required", f"{path}.classes")
    for i, entry in enumerate(classes):
        cpath = f"{path}.classes[{i}]"
        entry = _mapping(entry, cpath)
        _check_keys(entry, _CLASS_KEYS, cpath)
        label = _int(_require(entry, "label", cpath), f"{cpath}.label")
        if label < 0:
            raise ConfigValueError(f"must be non-negative, got {label}", f"{cpath}.label")
        if config.class_spec(label) is not None:
            raise SchemaError(f"duplicate class label {label}", f"{cpath}.label")
        cls = ClassSpec(label)
        for j, ch in enumerate(_list(_require(entry, "channels", cpath), f"{cpath}.channels")):
            chpath = f"{cpath}.channels[{j}]"
            index, spec = _channel(ch, chpath, j, n_timesteps)
            if not 0 <= index < n_dims:
                raise ConfigValueError(f"channel {index} outside 0..{n_dims - 1}", f"{chpath}.channel")
            if index in cls.channels:
                raise SchemaError(f"channel {index} specified twice", chpath)
            cls.channels[index] = spec
        config.classes.append(cls)

    try:
        config.validate()
    except ConfigError as exc:
        raise ConfigValueError(str(exc), path) from None
    return config


def parse_document(doc) -> dict[str, BuilderConfig]:
    """Validate an already-parsed YAML document."""
    doc = _mapping(doc, "<root>")
    _check_keys(doc, _TOP_KEYS, "<root>")
    if "schema" in doc and doc["schema"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {doc['schema']!r}; expected {SCHEMA_VERSION}", "schema")
    datasets = _mapping(_require(doc, "datasets", "<root>"), "datasets")
    if not datasets:
        raise SchemaError("at least one dataset is required", "datasets")
    return {name: _dataset(name, body, f"datasets.{name}") for name, body in datasets.items()}


def load_configs(source: Union[str, os.PathLike]) -> dict[str, BuilderConfig]:
    """Load a YAML document (path or text) into one :class:`BuilderConfig` per dataset."""
    return parse_document(_parse(_read_source(source)))


def load_builders_from_config(source: Union[str, os.PathLike]) -> dict[str, TimeSeriesBuilder]:
    return {name: TimeSeriesBuilder.from_config(cfg) for name, cfg in load_configs(source).items()}
