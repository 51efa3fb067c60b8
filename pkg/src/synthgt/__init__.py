"""Synthetic time-series classification data with ground-truth masks, and
localization metrics for scoring attributions against those masks."""

from . import metrics
from .builder import BuilderConfig, ChannelSpec, ClassSpec, FeaturePlacement, TimeSeriesBuilder, build, place_window
from .components import (component, gaussian_noise, gaussian_pulse, manual, peak, random_walk, red_noise,
                         seasonal, trend, trough, uniform_noise)
from .config import fingerprint, load_builders_from_config, load_configs
from .core import Components, Dataset, DatasetMeta, MetricResult, ShapeMismatch, SynthError, validate_shapes
from .generators import GeneratorSpec, register_generator, resolve
from .io import read_dataset, read_npy, write_dataset, write_metrics_report, write_npy
from .metrics import EvalOptions, evaluate_all
from .plot import plot_components

__version__ = "0.1.0"

__all__ = [
    "BuilderConfig", "ChannelSpec", "ClassSpec", "Components", "Dataset", "DatasetMeta", "EvalOptions",
    "FeaturePlacement", "GeneratorSpec", "MetricResult", "ShapeMismatch", "SynthError", "TimeSeriesBuilder",
    "build", "component", "evaluate_all", "fingerprint", "gaussian_noise", "gaussian_pulse",
    "load_builders_from_config", "load_configs", "manual", "metrics", "peak", "place_window",
    "plot_components", "random_walk", "read_dataset", "read_npy", "red_noise", "register_generator",
    "resolve", "seasonal", "trend", "trough", "uniform_noise", "validate_shapes", "write_dataset",
    "write_metrics_report", "write_npy",
]
