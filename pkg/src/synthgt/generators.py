"""Background-signal and feature primitives plus the name-keyed registry.

Every generator has the signature ``fn(length, rng, **params) -> ndarray`` and
must return exactly ``length`` finite values. Randomness comes only from the
``numpy.random.Generator`` passed in.

Custom generators are added with :func:`register_generator`, either called
directly or used as a decorator::

    @register_generator("constant", defaults={"level": 1.0})
    def constant(length, rng, level):
        return np.full(length, level)
"""

from __future__ import annotations

import difflib
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .core import SynthError

# Bumped whenever a built-in generator or the RNG algorithm changes output.
CATALOG_VERSION = "1.0+pcg64"

ROLE_HINTS = ("signal", "feature", "either")

GeneratorFn = Callable[..., np.ndarray]


class GeneratorError(SynthError):
    pass


class InvalidParam(GeneratorError, ValueError):
    def __init__(self, name: str, value, reason: str):
        self.param = name
        self.value = value
        super().__init__(f"invalid parameter {name}={value!r}: {reason}")


class MissingParam(GeneratorError, ValueError):
    pass


class UnknownGenerator(GeneratorError, KeyError):
    def __init__(self, kind: str, suggestions=()):
        self.kind = kind
        self.suggestions = list(suggestions)
        msg = f"unknown generator kind {kind!r}"
        if self.suggestions:
            msg += f" (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class DuplicateName(GeneratorError, ValueError):
    pass


class GeneratorContractViolation(GeneratorError, RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parameter checks


def _positive(name, value):
    if not value > 0:
        raise InvalidParam(name, value, "must be > 0")


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidParam(name, value, "must be finite")


def _check_length(length):
    if int(length) != length or length < 1:
        raise InvalidParam("length", length, "must be a positive integer")


# ---------------------------------------------------------------------------
# built-in generators


def gaussian_noise(length: int, rng: np.random.Generator, sigma: float) -> np.ndarray:
    _check_length(length)
    _positive("sigma", sigma)
    return rng.normal(0.0, sigma, size=length)


def uniform_noise(length: int, rng: np.random.Generator, low: float, high: float) -> np.ndarray:
    _check_length(length)
    _finite("low", low)
    _finite("high", high)
    if not high > low:
        raise InvalidParam("high", high, f"must exceed low={low}")
    return rng.uniform(low, high, size=length)


def red_noise(length: int, rng: np.random.Generator, sigma: float, phi: float = 0.9) -> np.ndarray:
    """AR(1) noise ``x[t] = phi * x[t-1] + e[t]`` started from ``x[0] = e[0]``."""
    _check_length(length)
    _positive("sigma", sigma)
    if not -1.0 < phi < 1.0:
        raise InvalidParam("phi", phi, "must lie in (-1, 1)")
    eps = rng.normal(0.0, sigma, size=length)
    out = np.empty(length)
    acc = 0.0
    for t in range(length):
        acc = phi * acc + eps[t]
        out[t] = acc
    return out


def random_walk(length: int, rng: np.random.Generator, step_sigma: float) -> np.ndarray:
    _check_length(length)
    _positive("step_sigma", step_sigma)
    return np.cumsum(rng.normal(0.0, step_sigma, size=length))


def seasonal(length: int, rng: np.random.Generator, period: float, amplitude: float,
             phase: float = 0.0) -> np.ndarray:
    _check_length(length)
    _positive("period", period)
    _finite("amplitude", amplitude)
    _finite("phase", phase)
    t = np.arange(length, dtype=np.float64)
    return amplitude * np.sin(2.0 * np.pi * t / period + phase)


def trend(length: int, rng: np.random.Generator, slope: float, intercept: float = 0.0) -> np.ndarray:
    _check_length(length)
    _finite("slope", slope)
    _finite("intercept", intercept)
    return intercept + slope * np.arange(length, dtype=np.float64)


def peak(length: int, rng: np.random.Generator, amplitude: float) -> np.ndarray:
    """Triangle rising from 0 to ``amplitude`` at index ``(length-1)//2`` and back to 0."""
    _check_length(length)
    _finite("amplitude", amplitude)
    if length == 1:
        return np.array([float(amplitude)])
    apex = (length - 1) // 2
    t = np.arange(length, dtype=np.float64)
    shape = np.empty(length)
    if apex == 0:
        shape[0] = 1.0
    else:
        shape[: apex + 1] = t[: apex + 1] / apex
    tail = length - 1 - apex
    shape[apex + 1:] = (length - 1 - t[apex + 1:]) / tail
    return amplitude * shape


def trough(length: int, rng: np.random.Generator, amplitude: float) -> np.ndarray:
    return -peak(length, rng, amplitude)


def gaussian_pulse(length: int, rng: np.random.Generator, amplitude: float,
                   width_fraction: float = 1.0 / 6.0) -> np.ndarray:
    """Gaussian bump centred on the window with ``sigma = width_fraction * length``.

    The tails are not truncated, so edge values are small but non-zero.
    """
    _check_length(length)
    _finite("amplitude", amplitude)
    if not 0.0 < width_fraction <= 1.0:
        raise InvalidParam("width_fraction", width_fraction, "must lie in (0, 1]")
    center = (length - 1) / 2.0
    sigma = width_fraction * length
    t = np.arange(length, dtype=np.float64)
    return amplitude * np.exp(-((t - center) ** 2) / (2.0 * sigma ** 2))


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class GeneratorEntry:
    name: str
    fn: GeneratorFn
    required: tuple[str, ...]
    defaults: Mapping[str, float]
    role_hint: str = "either"
    builtin: bool = False

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.required + tuple(k for k in self.defaults if k not in self.required)


@dataclass(frozen=True)
class GeneratorSpec:
    """A generator kind plus its numeric parameters.

    ``fn`` is only set for ad-hoc specs made by :func:`synthgt.components.manual`;
    it bypasses the registry.
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    fn: Optional[GeneratorFn] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))


_lock = threading.Lock()
_REGISTRY: dict[str, GeneratorEntry] = {}


def register_generator(name: str, fn: Optional[GeneratorFn] = None, required_params=(),
                       role_hint: str = "either", defaults: Optional[Mapping[str, float]] = None,
                       overwrite: bool = False, _builtin: bool = False):
    """Register ``fn`` under ``name``.

    With ``fn`` omitted this returns a decorator. ``role_hint`` is advisory:
    any generator can serve as a signal or a feature. Optional parameters
    and their defaults go in ``defaults``; any keyword not listed in
    ``required_params`` or ``defaults`` is rejected at resolution.
    """
    if fn is None:
        def decorator(func):
            register_generator(name, func, required_params, role_hint, defaults, overwrite, _builtin)
            return func
        return decorator

    if not isinstance(name, str) or not name:
        raise ValueError("generator name must be a non-empty string")
    if role_hint not in ROLE_HINTS:
        raise ValueError(f"role_hint must be one of {ROLE_HINTS}, got {role_hint!r}")
    entry = GeneratorEntry(name, fn, tuple(required_params), dict(defaults or {}), role_hint, _builtin)
    with _lock:
        if name in _REGISTRY and not overwrite:
            raise DuplicateName(f"generator {name!r} is already registered")
        _REGISTRY[name] = entry
    return fn


def unregister_generator(name: str) -> None:
    with _lock:
        entry = _REGISTRY.get(name)
        if entry is None:
            raise UnknownGenerator(name)
        if entry.builtin:
            raise ValueError(f"cannot unregister built-in generator {name!r}")
        del _REGISTRY[name]


def get_entry(kind: str) -> GeneratorEntry:
    try:
        return _REGISTRY[kind]
    except KeyError:
        raise UnknownGenerator(kind, difflib.get_close_matches(kind, list(_REGISTRY), n=3)) from None


def available_generators() -> list[str]:
    return sorted(_REGISTRY)


def complete_params(spec: GeneratorSpec) -> dict[str, float]:
    """Validate parameter names and fill defaults; domain checks happen in the generator."""
    if spec.fn is not None:
        return dict(spec.params)
    entry = get_entry(spec.kind)
    known = set(entry.param_names)
    unknown = sorted(set(spec.params) - known)
    if unknown:
        raise InvalidParam(unknown[0], spec.params[unknown[0]],
                           f"unknown parameter for {spec.kind!r}; expected one of {sorted(known)}")
    missing = [p for p in entry.required if p not in spec.params]
    if missing:
        raise MissingParam(f"generator {spec.kind!r} is missing required parameter(s): {', '.join(missing)}")
    params = dict(entry.defaults)
    params.update(spec.params)
    return params


@dataclass(frozen=True)
class BoundGenerator:
    """A resolved generator: call with ``(length, rng)``."""

    kind: str
    fn: GeneratorFn
    params: Mapping[str, float]

    def __call__(self, length: int, rng: np.random.Generator) -> np.ndarray:
        out = np.asarray(self.fn(length, rng, **self.params), dtype=np.float64)
        if out.shape != (length,):
            raise GeneratorContractViolation(
                f"generator {self.kind!r} returned shape {out.shape}, expected ({length},)")
        if not np.all(np.isfinite(out)):
            raise GeneratorContractViolation(f"generator {self.kind!r} returned non-finite values")
        return out


def resolve(spec: GeneratorSpec) -> BoundGenerator:
    params = complete_params(spec)
    fn = spec.fn if spec.fn is not None else get_entry(spec.kind).fn
    if spec.fn is None and get_entry(spec.kind).builtin:
        # Built-ins validate their domain eagerly; a length-1 dry run is cheap and
        # uses a throwaway stream so the caller's rng is untouched.
        fn(1, np.random.default_rng(0), **params)
    return BoundGenerator(spec.kind, fn, params)


def _register_builtins():
    builtins = [
        ("gaussian_noise", gaussian_noise, ("sigma",), {}, "signal"),
        ("uniform_noise", uniform_noise, ("low", "high"), {}, "signal"),
        ("red_noise", red_noise, ("sigma",), {"phi": 0.9}, "signal"),
        ("random_walk", random_walk, ("step_sigma",), {}, "signal"),
        ("seasonal", seasonal, ("period", "amplitude"), {"phase": 0.0}, "either"),
        ("trend", trend, ("slope",), {"intercept": 0.0}, "signal"),
        ("peak", peak, ("amplitude",), {}, "feature"),
        ("trough", trough, ("amplitude",), {}, "feature"),
        ("gaussian_pulse", gaussian_pulse, ("amplitude",), {"width_fraction": 1.0 / 6.0}, "feature"),
    ]
    for name, fn, required, defaults, role in builtins:
        register_generator(name, fn, required, role, defaults, _builtin=True)


_register_builtins()
