"""Factories returning :class:`GeneratorSpec` objects for the builder API.

These mirror the built-in generators but take only the parameters; the
builder supplies ``length`` and ``rng`` at build time::

    TimeSeriesBuilder(n_timesteps=100).for_class(0).add_signal(gaussian_noise(sigma=1.0))
"""

from __future__ import annotations

from .generators import GeneratorFn, GeneratorSpec


def _spec(kind: str, **params) -> GeneratorSpec:
    return GeneratorSpec(kind, {k: v for k, v in params.items() if v is not None})


def gaussian_noise(sigma: float) -> GeneratorSpec:
    return _spec("gaussian_noise", sigma=sigma)


def uniform_noise(low: float, high: float) -> GeneratorSpec:
    return _spec("uniform_noise", low=low, high=high)


def red_noise(sigma: float, phi: float | None = None) -> GeneratorSpec:
    return _spec("red_noise", sigma=sigma, phi=phi)


def random_walk(step_sigma: float) -> GeneratorSpec:
    return _spec("random_walk", step_sigma=step_sigma)


def seasonal(period: float, amplitude: float, phase: float | None = None) -> GeneratorSpec:
    return _spec("seasonal", period=period, amplitude=amplitude, phase=phase)


def trend(slope: float, intercept: float | None = None) -> GeneratorSpec:
    return _spec("trend", slope=slope, intercept=intercept)


def peak(amplitude: float) -> GeneratorSpec:
    return _spec("peak", amplitude=amplitude)


def trough(amplitude: float) -> GeneratorSpec:
    return _spec("trough", amplitude=amplitude)


def gaussian_pulse(amplitude: float, width_fraction: float | None = None) -> GeneratorSpec:
    return _spec("gaussian_pulse", amplitude=amplitude, width_fraction=width_fraction)


def component(kind: str, **params) -> GeneratorSpec:
    """Spec for any registered generator, including custom ones."""
    return GeneratorSpec(kind, params)


def manual(fn: GeneratorFn, **params) -> GeneratorSpec:
    """Wrap an arbitrary ``fn(length, rng, **params)`` without registering it.

    Manual specs cannot be expressed in YAML; register the function instead
    if the dataset must be reproducible from a config file.
    """
    name = getattr(fn, "__qualname__", type(fn).__name__)
    return GeneratorSpec(f"manual:{name}", params, fn=fn)
