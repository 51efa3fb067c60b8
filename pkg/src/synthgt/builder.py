"""Fluent dataset builder: per-class, per-channel composition with mask tracking.

Each sample is ``x = n + f`` where ``n`` is the sum of the channel's signal
generators and ``f`` is zero except inside the placed feature windows. The
mask marks the union of those windows.

RNG consumption order is part of the output contract. One PCG64 stream is
seeded from ``random_state`` and consumed for classes in ascending label,
samples in ascending index, channels ascending, then per channel: signals in
insertion order, then features in insertion order with the window placement
draw before the content draw. An aligned feature slot draws its window at the
first (lowest) channel carrying it; later channels reuse that window.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .core import NORMALIZATIONS, Components, Dataset, DatasetMeta, SynthError
from .generators import CATALOG_VERSION, GeneratorSpec, complete_params, resolve

ZSCORE_STD_FLOOR = 1e-12
MAX_SEED = 2 ** 64


class ConfigError(SynthError, ValueError):
    pass


class NoClassScope(ConfigError):
    pass


class ChannelOutOfRange(ConfigError):
    pass


class InvalidPlacement(ConfigError):
    pass


class NonContiguousLabels(ConfigError):
    pass


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class FeaturePlacement:
    """Where a feature window goes.

    Exactly one of ``random_location=True`` or an explicit ``fixed_start``
    must be given.
    """

    length_pct: float
    random_location: bool = False
    fixed_start: Optional[int] = None
    align_across_channels: bool = True

    def __post_init__(self):
        if isinstance(self.length_pct, bool) or not isinstance(self.length_pct, (int, float)):
            raise InvalidPlacement(f"length_pct must be a number, got {self.length_pct!r}")
        if not 0.0 < self.length_pct <= 1.0:
            raise InvalidPlacement(f"length_pct must lie in (0, 1], got {self.length_pct}")
        if self.random_location and self.fixed_start is not None:
            raise InvalidPlacement("random_location and fixed_start are mutually exclusive")
        if not self.random_location and self.fixed_start is None:
            raise InvalidPlacement("either random_location=True or a fixed_start is required")
        if self.fixed_start is not None and (
                isinstance(self.fixed_start, bool) or int(self.fixed_start) != self.fixed_start
                or self.fixed_start < 0):
            raise InvalidPlacement(f"fixed_start must be a non-negative integer, got {self.fixed_start!r}")

    def window_length(self, n_timesteps: int) -> int:
        return min(n_timesteps, max(1, _round_half_away(self.length_pct * n_timesteps)))

    def check(self, n_timesteps: int) -> None:
        w = self.window_length(n_timesteps)
        if self.fixed_start is not None and self.fixed_start + w > n_timesteps:
            raise InvalidPlacement(
                f"window [{self.fixed_start}, {self.fixed_start + w}) exceeds n_timesteps={n_timesteps}")


def place_window(rng: np.random.Generator, placement: FeaturePlacement, n_timesteps: int) -> tuple[int, int]:
    """Return ``(start, length)`` of a feature window."""
    placement.check(n_timesteps)
    w = placement.window_length(n_timesteps)
    if placement.random_location:
        return int(rng.integers(0, n_timesteps - w + 1)), w
    return int(placement.fixed_start), w


@dataclass
class ChannelSpec:
    signals: list[GeneratorSpec] = field(default_factory=list)
    features: list[tuple[GeneratorSpec, FeaturePlacement]] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.signals and not self.features


@dataclass
class ClassSpec:
    label: int
    channels: dict[int, ChannelSpec] = field(default_factory=dict)

    def channel(self, index: int) -> ChannelSpec:
        return self.channels.setdefault(index, ChannelSpec())


@dataclass
class BuilderConfig:
    n_timesteps: int
    n_samples: int = 100
    n_dims: int = 1
    normalization: str = "zscore"
    random_state: Optional[int] = None
    classes: list[ClassSpec] = field(default_factory=list)
    keep_components: bool = True

    def class_spec(self, label: int) -> Optional[ClassSpec]:
        for cls in self.classes:
            if cls.label == label:
                return cls
        return None

    def validate(self) -> None:
        for name in ("n_timesteps", "n_samples", "n_dims"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.random_state is not None and not (
                isinstance(self.random_state, (int, np.integer)) and 0 <= self.random_state < MAX_SEED):
            raise ConfigError(f"random_state must be an integer in [0, 2**64), got {self.random_state!r}")
        if not self.classes:
            raise ConfigError("at least one class is required")
        labels = sorted(c.label for c in self.classes)
        if labels != list(range(len(labels))):
            raise NonContiguousLabels(f"class labels must be 0..{len(labels) - 1}, got {labels}")
        for cls in self.classes:
            if all(ch.is_empty() for ch in cls.channels.values()):
                raise ConfigError(f"class {cls.label} has no signals or features")
            for index, ch in cls.channels.items():
                if not 0 <= index < self.n_dims:
                    raise ChannelOutOfRange(f"class {cls.label}: channel {index} outside 0..{self.n_dims - 1}")
                for _, placement in ch.features:
                    placement.check(self.n_timesteps)
            _check_slot_alignment(cls)


def _check_slot_alignment(cls: ClassSpec) -> None:
    slots: dict[int, FeaturePlacement] = {}
    for index in sorted(cls.channels):
        for k, (_, placement) in enumerate(cls.channels[index].features):
            if not placement.align_across_channels:
                continue
            first = slots.setdefault(k, placement)
            if (first.length_pct, first.random_location, first.fixed_start) != (
                    placement.length_pct, placement.random_location, placement.fixed_start):
                raise InvalidPlacement(
                    f"class {cls.label}: aligned feature slot {k} has differing placements across channels")


# ---------------------------------------------------------------------------
# fingerprint


def _canonical_spec(spec: GeneratorSpec) -> dict:
    try:
        params = complete_params(spec)
    except SynthError:
        params = dict(spec.params)
    return {"kind": spec.kind, "params": {k: float(v) for k, v in sorted(params.items())}}


def canonicalize(config: BuilderConfig) -> dict:
    """Plain-data form of ``config`` used for hashing.

    Defaults are filled in, numbers widened to float, classes and channels
    sorted, and empty channels dropped. ``keep_components`` is excluded
    because it does not affect the generated data.
    """
    classes = []
    for cls in sorted(config.classes, key=lambda c: c.label):
        channels = []
        for index in sorted(cls.channels):
            ch = cls.channels[index]
            if ch.is_empty():
                continue
            features = []
            for spec, pl in ch.features:
                entry = _canonical_spec(spec)
                entry["placement"] = {
                    "length_pct": float(pl.length_pct),
                    "random_location": bool(pl.random_location),
                    "fixed_start": None if pl.fixed_start is None else int(pl.fixed_start),
                    "align_across_channels": bool(pl.align_across_channels),
                }
                features.append(entry)
            channels.append({
                "channel": int(index),
                "signals": [_canonical_spec(s) for s in ch.signals],
                "features": features,
            })
        classes.append({"label": int(cls.label), "channels": channels})
    return {
        "n_timesteps": int(config.n_timesteps),
        "n_samples": int(config.n_samples),
        "n_dims": int(config.n_dims),
        "normalization": config.normalization,
        "random_state": None if config.random_state is None else int(config.random_state),
        "classes": classes,
    }


def fingerprint(config: BuilderConfig) -> str:
    """Stable SHA-256 hex digest of the canonicalized config."""
    text = json.dumps(canonicalize(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# build


def class_counts(n_samples: int, n_classes: int) -> list[int]:
    base, rem = divmod(n_samples, n_classes)
    return [base + (1 if k < rem else 0) for k in range(n_classes)]


def zscore(x: np.ndarray) -> np.ndarray:
    """Per-(sample, channel) z-score over time with population std; flat slices become 0."""
    mean = x.mean(axis=-1, keepdims=True)
    std = x.std(axis=-1, keepdims=True)
    flat = std < ZSCORE_STD_FLOOR
    out = (x - mean) / np.where(flat, 1.0, std)
    return np.where(flat, 0.0, out)


def build(config: BuilderConfig) -> Dataset:
    config.validate()
    seed = config.random_state
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        config = copy.deepcopy(config)
        config.random_state = seed
    rng = np.random.default_rng(seed)

    N, D, T = config.n_samples, config.n_dims, config.n_timesteps
    classes = sorted(config.classes, key=lambda c: c.label)
    resolved = {}
    for cls in classes:
        for index, ch in cls.channels.items():
            resolved[cls.label, index] = (
                [resolve(s) for s in ch.signals],
                [(resolve(s), pl) for s, pl in ch.features],
            )

    signal = np.zeros((N, D, T))
    feature = np.zeros((N, D, T))
    mask = np.zeros((N, D, T), dtype=np.uint8)
    y = np.empty(N, dtype=np.int64)
    overlaps = 0

    i = 0
    for cls, count in zip(classes, class_counts(N, len(classes))):
        for _ in range(count):
            y[i] = cls.label
            slot_windows: dict[int, tuple[int, int]] = {}
            for ch in range(D):
                if (cls.label, ch) not in resolved:
                    continue
                signals, features = resolved[cls.label, ch]
                for gen in signals:
                    signal[i, ch] += gen(T, rng)
                for k, (gen, pl) in enumerate(features):
                    if pl.align_across_channels and k in slot_windows:
                        start, w = slot_windows[k]
                    else:
                        start, w = place_window(rng, pl, T)
                        if pl.align_across_channels:
                            slot_windows[k] = (start, w)
                    window = slice(start, start + w)
                    feature[i, ch, window] += gen(w, rng)
                    if mask[i, ch, window].any():
                        overlaps += 1
                    mask[i, ch, window] = 1
            i += 1

    raw = signal + feature
    X = zscore(raw) if config.normalization == "zscore" else raw
    labels = tuple(c.label for c in classes)
    meta = DatasetMeta(
        n_classes=len(labels),
        class_labels=labels,
        random_state=seed,
        normalization=config.normalization,
        config_fingerprint=fingerprint(config),
        generator_catalog_version=CATALOG_VERSION,
        n_overlapping_windows=overlaps,
    )
    components = Components(signal, feature) if config.keep_components else None
    return Dataset(X=X, y=y, mask=mask, meta=meta, components=components)


# ---------------------------------------------------------------------------
# fluent API

Channels = Union[int, Iterable[int]]


class TimeSeriesBuilder:
    """Declarative, chainable dataset recipe.

    Example:
        >>> base = (
        ...     TimeSeriesBuilder(n_timesteps=100, normalization="zscore")
        ...     .for_class(0)
        ...     .add_signal(gaussian_noise(sigma=1.0))
        ...     .add_feature(gaussian_pulse(amplitude=3.0), random_location=True, length_pct=0.3)
        ... )
        >>> train = base.clone(n_samples=200, random_state=42).build()
    """

    _CLONE_FIELDS = ("n_samples", "random_state", "normalization", "keep_components")

    def __init__(self, n_timesteps: int, n_samples: int = 100, n_dims: int = 1,
                 normalization: str = "zscore", random_state: Optional[int] = None,
                 keep_components: bool = True):
        self._config = BuilderConfig(
            n_timesteps=n_timesteps, n_samples=n_samples, n_dims=n_dims,
            normalization=normalization, random_state=random_state,
            keep_components=keep_components,
        )
        self._scope: Optional[ClassSpec] = None

    @classmethod
    def from_config(cls, config: BuilderConfig) -> "TimeSeriesBuilder":
        builder = cls.__new__(cls)
        builder._config = copy.deepcopy(config)
        builder._scope = None
        return builder

    @property
    def config(self) -> BuilderConfig:
        return copy.deepcopy(self._config)

    def for_class(self, label: int) -> "TimeSeriesBuilder":
        if isinstance(label, bool) or not isinstance(label, (int, np.integer)) or label < 0:
            raise ConfigError(f"class label must be a non-negative integer, got {label!r}")
        scope = self._config.class_spec(label)
        if scope is None:
            scope = ClassSpec(int(label))
            self._config.classes.append(scope)
        self._scope = scope
        return self

    def _channels(self, channel: Channels) -> list[int]:
        if self._scope is None:
            raise NoClassScope("call for_class() before adding signals or features")
        channels = [channel] if isinstance(channel, (int, np.integer)) else list(channel)
        for c in channels:
            if not 0 <= c < self._config.n_dims:
                raise ChannelOutOfRange(f"channel {c} outside 0..{self._config.n_dims - 1}")
        return [int(c) for c in channels]

    def add_signal(self, spec: GeneratorSpec, channel: Channels = 0) -> "TimeSeriesBuilder":
        for c in self._channels(channel):
            self._scope.channel(c).signals.append(spec)
        return self

    def add_feature(self, spec: GeneratorSpec, random_location: bool = False, length_pct: float = None,
                    fixed_start: Optional[int] = None, align_across_channels: bool = True,
                    channel: Channels = 0, placement: Optional[FeaturePlacement] = None) -> "TimeSeriesBuilder":
        """Add a localized feature to the current class.

        Pass ``channel`` as a list to put the same feature on several channels;
        with ``align_across_channels`` (the default) they share one window per sample.
        """
        channels = self._channels(channel)
        if placement is None:
            if length_pct is None:
                raise InvalidPlacement("length_pct is required")
            placement = FeaturePlacement(length_pct, random_location, fixed_start, align_across_channels)
        placement.check(self._config.n_timesteps)
        for c in channels:
            self._scope.channel(c).features.append((spec, placement))
        return self

    def clone(self, **overrides) -> "TimeSeriesBuilder":
        unknown = set(overrides) - set(self._CLONE_FIELDS)
        if unknown:
            raise TypeError(f"clone() got unexpected override(s): {sorted(unknown)}")
        new = TimeSeriesBuilder.from_config(self._config)
        for name, value in overrides.items():
            setattr(new._config, name, value)
        return new

    def fingerprint(self) -> str:
        return fingerprint(self._config)

    def build(self) -> Dataset:
        return build(self._config)
