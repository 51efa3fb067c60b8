"""Shared tensor, dataset and result types.

All arrays follow the ``(n_samples, n_dims, n_timesteps)`` layout. Datasets
are frozen: their arrays are flagged read-only on construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

NORMALIZATIONS = ("zscore", "none")


class SynthError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(SynthError, ValueError):
    def __init__(self, a_shape, b_shape, what: str = "arrays"):
        self.a_shape = tuple(a_shape)
        self.b_shape = tuple(b_shape)
        super().__init__(f"shape mismatch between {what}: {self.a_shape} vs {self.b_shape}")


class DatasetError(SynthError, ValueError):
    """A dataset violates one of its structural invariants."""


def validate_shapes(a, b, what: str = "arrays") -> None:
    """Raise :class:`ShapeMismatch` unless ``a`` and ``b`` are rank-3 with equal extents."""
    a_shape, b_shape = np.shape(a), np.shape(b)
    if len(a_shape) != 3 or len(b_shape) != 3 or a_shape != b_shape:
        raise ShapeMismatch(a_shape, b_shape, what)


def as_tensor(values, name: str = "tensor") -> np.ndarray:
    """Coerce to a finite float64 rank-3 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 3:
        raise DatasetError(f"{name} must have shape (n_samples, n_dims, n_timesteps), got {arr.shape}")
    if min(arr.shape) < 1:
        raise DatasetError(f"{name} has an empty extent: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DatasetError(f"{name} contains non-finite values")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


class Components(NamedTuple):
    """Pre-normalization background (``signal``) and feature tensors."""

    signal: np.ndarray
    feature: np.ndarray


@dataclass(frozen=True)
class DatasetMeta:
    n_classes: int
    class_labels: tuple[int, ...]
    random_state: int
    normalization: str
    config_fingerprint: str
    generator_catalog_version: str
    n_overlapping_windows: int = 0

    def __post_init__(self):
        labels = tuple(int(v) for v in self.class_labels)
        object.__setattr__(self, "class_labels", labels)
        if list(labels) != sorted(set(labels)):
            raise DatasetError(f"class_labels must be sorted and unique, got {labels}")
        if self.n_classes < 1 or self.n_classes != len(labels):
            raise DatasetError(f"n_classes={self.n_classes} does not match class_labels {labels}")
        if self.normalization not in NORMALIZATIONS:
            raise DatasetError(f"unknown normalization {self.normalization!r}")

    def to_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "class_labels": list(self.class_labels),
            "random_state": self.random_state,
            "normalization": self.normalization,
            "config_fingerprint": self.config_fingerprint,
            "generator_catalog_version": self.generator_catalog_version,
            "n_overlapping_windows": self.n_overlapping_windows,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetMeta":
        return cls(
            n_classes=int(data["n_classes"]),
            class_labels=tuple(data["class_labels"]),
            random_state=int(data["random_state"]),
            normalization=str(data["normalization"]),
            config_fingerprint=str(data["config_fingerprint"]),
            generator_catalog_version=str(data["generator_catalog_version"]),
            n_overlapping_windows=int(data.get("n_overlapping_windows", 0)),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """A generated dataset: inputs, labels, ground-truth mask and provenance.

    ``X`` is the (possibly normalized) model input. ``components`` holds the
    raw background and feature tensors whose sum is the un-normalized input.
    Item access (``ds["X"]``, ``ds["mask"]``) is supported for dict-style code.
    """

    X: np.ndarray
    y: np.ndarray
    mask: np.ndarray
    meta: DatasetMeta
    components: Optional[Components] = None

    def __post_init__(self):
        X = as_tensor(self.X, "X")
        y = np.asarray(self.y)
        if y.ndim != 1 or not np.issubdtype(y.dtype, np.integer):
            raise DatasetError(f"y must be a 1-d integer array, got dtype {y.dtype} shape {y.shape}")
        if len(y) != X.shape[0]:
            raise DatasetError(f"y has length {len(y)} but X has {X.shape[0]} samples")
        if len(y) and (y.min() < 0 or y.max() >= self.meta.n_classes):
            raise DatasetError(f"labels must lie in [0, {self.meta.n_classes})")

        mask = np.asarray(self.mask)
        validate_shapes(X, mask, "X and mask")
        if not np.all((mask == 0) | (mask == 1)):
            raise DatasetError("mask must be binary")

        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y.astype(np.int64)))
        object.__setattr__(self, "mask", _frozen(mask.astype(np.uint8)))

        if self.components is not None:
            signal = as_tensor(self.components[0], "signal")
            feature = as_tensor(self.components[1], "feature")
            validate_shapes(X, signal, "X and signal")
            validate_shapes(X, feature, "X and feature")
            if np.any(feature[self.mask == 0] != 0):
                raise DatasetError("feature component is non-zero outside the mask")
            if self.meta.normalization == "none" and not np.array_equal(signal + feature, X):
                raise DatasetError("signal + feature does not reproduce X")
            object.__setattr__(self, "components", Components(_frozen(signal), _frozen(feature)))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.X.shape

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    def raw(self) -> np.ndarray:
        """Un-normalized input ``signal + feature``; requires components."""
        if self.components is None:
            raise DatasetError("dataset was built without components")
        return self.components.signal + self.components.feature

    def take(self, indices) -> "Dataset":
        """Return a new dataset with samples reordered/subset by ``indices``."""
        idx = np.asarray(indices, dtype=np.int64)
        comps = None
        if self.components is not None:
            comps = Components(self.components.signal[idx], self.components.feature[idx])
        return Dataset(X=self.X[idx], y=self.y[idx], mask=self.mask[idx], meta=self.meta, components=comps)

    def __getitem__(self, key: str):
        lookup = {"X": self.X, "y": self.y, "mask": self.mask, "meta": self.meta}
        if self.components is not None:
            lookup.update(signal=self.components.signal, feature=self.components.feature)
        if key not in lookup:
            raise KeyError(key)
        return lookup[key]


@dataclass(frozen=True)
class MetricResult:
    """Per-sample scores of one metric plus their aggregate.

    ``indices`` are the dataset positions of the scored samples, aligned with
    ``per_sample``; excluded (degenerate) samples are absent from both.
    """

    metric_name: str
    per_sample: tuple[float, ...]
    indices: tuple[int, ...]
    n_excluded: int
    normalized: bool = False
    warning: Optional[str] = None
    mean: float = field(init=False)

    def __post_init__(self):
        scores = tuple(float(v) for v in self.per_sample)
        object.__setattr__(self, "per_sample", scores)
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(scores) != len(self.indices):
            raise ValueError("per_sample and indices must align")
        object.__setattr__(self, "mean", float(np.mean(scores)) if scores else float("nan"))

    @property
    def n_samples(self) -> int:
        return len(self.per_sample) + self.n_excluded


def mask_runs(row) -> list[tuple[int, int]]:
    """``(start, length)`` of each run of ones in a 1-d binary vector."""
    padded = np.concatenate(([0], np.asarray(row, dtype=np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b - a)) for a, b in zip(edges[::2], edges[1::2])]
