import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthgt import generators as g
from synthgt.generators import (DuplicateName, GeneratorContractViolation, GeneratorSpec, InvalidParam,
                                MissingParam, UnknownGenerator, register_generator, resolve)


def rng(seed=0):
    return np.random.default_rng(seed)


# -- statistics ---------------------------------------------------------------

def test_gaussian_noise_moments():
    x = g.gaussian_noise(10 ** 6, rng(1), sigma=1.0)
    assert abs(x.mean()) < 0.01
    assert abs(x.std() - 1.0) < 0.01


def test_uniform_noise_mean_and_range():
    x = g.uniform_noise(10 ** 6, rng(2), low=0.0, high=1.0)
    assert abs(x.mean() - 0.5) < 0.01
    small = g.uniform_noise(5, rng(3), low=-1.0, high=1.0)
    assert small.shape == (5,) and np.all(small >= -1) and np.all(small < 1)


def test_red_noise_lag1_autocorrelation():
    x = g.red_noise(10 ** 6, rng(4), sigma=1.0, phi=0.9)
    xc = x - x.mean()
    r1 = np.dot(xc[:-1], xc[1:]) / np.dot(xc, xc)
    assert abs(r1 - 0.9) < 0.01


def test_red_noise_phi_zero_matches_gaussian_noise_stream():
    a = g.red_noise(1000, rng(5), sigma=2.0, phi=0.0)
    b = g.gaussian_noise(1000, rng(5), sigma=2.0)
    np.testing.assert_array_equal(a, b)


def test_red_noise_recursion_by_hand():
    eps = rng(6).normal(0.0, 1.0, size=4)
    x = g.red_noise(4, rng(6), sigma=1.0, phi=0.5)
    expected = [eps[0]]
    for e in eps[1:]:
        expected.append(0.5 * expected[-1] + e)
    np.testing.assert_allclose(x, expected, rtol=0, atol=1e-15)


def test_random_walk_differences_are_iid_normal():
    x = g.random_walk(10 ** 6, rng(7), step_sigma=2.0)
    steps = np.diff(x, prepend=0.0)
    assert abs(steps.mean()) < 0.01
    assert abs(steps.std() - 2.0) < 0.01
    z = steps / 2.0
    assert abs(np.mean(z ** 3)) < 0.02       # skewness ~ 0
    assert abs(np.mean(z ** 4) - 3.0) < 0.05  # kurtosis ~ 3
    s = steps - steps.mean()
    assert abs(np.dot(s[:-1], s[1:]) / np.dot(s, s)) < 0.01


def test_random_walk_length_one_is_single_draw():
    assert g.random_walk(1, rng(8), step_sigma=1.0)[0] == rng(8).normal(0.0, 1.0)


# -- deterministic shapes -----------------------------------------------------

def test_seasonal_quarter_period():
    np.testing.assert_allclose(g.seasonal(4, None, period=4, amplitude=1), [0, 1, 0, -1], atol=1e-12)


def test_seasonal_period_ten():
    x = g.seasonal(30, None, period=10, amplitude=3.0)
    assert x[0] == 0.0
    assert np.max(np.abs(x)) <= 3.0
    assert np.all(g.seasonal(10, None, period=3, amplitude=0.0) == 0)


def test_trend_values():
    np.testing.assert_array_equal(g.trend(5, None, slope=1), [0, 1, 2, 3, 4])
    np.testing.assert_array_equal(g.trend(3, None, slope=-0.5, intercept=2), [2, 1.5, 1])
    assert np.all(g.trend(4, None, slope=0) == 0)


def test_peak_and_trough_by_hand():
    np.testing.assert_array_equal(g.peak(5, None, amplitude=1), [0, 0.5, 1, 0.5, 0])
    np.testing.assert_array_equal(g.trough(5, None, amplitude=1), [0, -0.5, -1, -0.5, 0])
    assert g.peak(1, None, amplitude=2.5).tolist() == [2.5]
    assert g.trough(1, None, amplitude=2.5).tolist() == [-2.5]
    assert np.all(g.peak(7, None, amplitude=0) == 0)


def test_peak_even_length_apex_at_floor_midpoint():
    x = g.peak(6, None, amplitude=1.0)
    assert int(np.argmax(x)) == 2
    assert x[0] == 0 and x[-1] == 0


@pytest.mark.parametrize("length", [1, 2, 3, 4, 9, 50])
def test_peak_plus_trough_is_zero(length):
    assert np.all(g.peak(length, None, 1.7) + g.trough(length, None, 1.7) == 0)


def test_gaussian_pulse_by_hand():
    x = g.gaussian_pulse(5, None, amplitude=1.0, width_fraction=1 / 6)
    assert x[2] == 1.0
    assert math.isclose(x[1], math.exp(-0.72), rel_tol=0, abs_tol=1e-15)
    assert x[1] == x[3]
    assert g.gaussian_pulse(31, None, amplitude=3.0).max() == 3.0
    assert np.all(g.gaussian_pulse(8, None, amplitude=0.0) == 0)


# -- parameter domains --------------------------------------------------------

@pytest.mark.parametrize("fn, kwargs", [
    (g.gaussian_noise, {"sigma": 0.0}),
    (g.uniform_noise, {"low": 1.0, "high": 1.0}),
    (g.red_noise, {"sigma": 1.0, "phi": 1.0}),
    (g.red_noise, {"sigma": 1.0, "phi": -1.0}),
    (g.random_walk, {"step_sigma": 0.0}),
    (g.seasonal, {"period": 0.0, "amplitude": 1.0}),
    (g.gaussian_pulse, {"amplitude": 1.0, "width_fraction": 0.0}),
    (g.gaussian_pulse, {"amplitude": 1.0, "width_fraction": 1.5}),
])
def test_invalid_params(fn, kwargs):
    with pytest.raises(InvalidParam):
        fn(10, rng(), **kwargs)


# -- properties ----------------------------------------------------------------

VALID = {
    "gaussian_noise": {"sigma": 1.3},
    "uniform_noise": {"low": -2.0, "high": 3.0},
    "red_noise": {"sigma": 0.5, "phi": -0.4},
    "random_walk": {"step_sigma": 0.7},
    "seasonal": {"period": 7.5, "amplitude": 2.0, "phase": 0.3},
    "trend": {"slope": 0.01, "intercept": -1.0},
    "peak": {"amplitude": 2.0},
    "trough": {"amplitude": 2.0},
    "gaussian_pulse": {"amplitude": 3.0},
}
DETERMINISTIC = ("seasonal", "trend", "peak", "trough", "gaussian_pulse")
STOCHASTIC = ("gaussian_noise", "uniform_noise", "red_noise", "random_walk")


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(sorted(VALID)), length=st.integers(1, 10 ** 4))
def test_every_builtin_returns_length_finite_values(kind, length):
    out = resolve(GeneratorSpec(kind, VALID[kind]))(length, rng())
    assert out.shape == (length,)
    assert np.all(np.isfinite(out))


@pytest.mark.parametrize("kind", DETERMINISTIC)
def test_deterministic_generators_bit_identical(kind):
    gen = resolve(GeneratorSpec(kind, VALID[kind]))
    assert gen(77, rng(1)).tobytes() == gen(77, rng(999)).tobytes()


@pytest.mark.parametrize("kind", STOCHASTIC)
def test_stochastic_generators_reproducible_and_seed_sensitive(kind):
    gen = resolve(GeneratorSpec(kind, VALID[kind]))
    assert gen(100, rng(11)).tobytes() == gen(100, rng(11)).tobytes()
    assert not np.array_equal(gen(100, rng(11)), gen(100, rng(12)))


# -- registry -------------------------------------------------------------------

def test_resolve_errors():
    assert resolve(GeneratorSpec("gaussian_noise", {"sigma": 1.0})).params == {"sigma": 1.0}
    with pytest.raises(UnknownGenerator):
        resolve(GeneratorSpec("nope", {}))
    with pytest.raises(MissingParam):
        resolve(GeneratorSpec("seasonal", {"amplitude": 1.0}))
    with pytest.raises(InvalidParam):
        resolve(GeneratorSpec("gaussian_noise", {"sigma": 1.0, "mu": 0.0}))
    with pytest.raises(InvalidParam):
        resolve(GeneratorSpec("gaussian_noise", {"sigma": -1.0}))


def test_unknown_generator_suggests_near_miss():
    with pytest.raises(UnknownGenerator, match="gaussian_noise"):
        resolve(GeneratorSpec("gausian_noise", {"sigma": 1.0}))


def test_resolution_fills_defaults():
    assert resolve(GeneratorSpec("red_noise", {"sigma": 1.0})).params == {"sigma": 1.0, "phi": 0.9}


@pytest.fixture
def scratch_registry():
    added = []
    yield added
    for name in added:
        g.unregister_generator(name)


def test_register_constant_generator(scratch_registry):
    @register_generator("constant_test", role_hint="either")
    def constant(length, rng):
        return np.ones(length)

    scratch_registry.append("constant_test")
    out = resolve(GeneratorSpec("constant_test"))(4, rng())
    assert out.tolist() == [1, 1, 1, 1]


def test_register_duplicate_builtin_rejected():
    with pytest.raises(DuplicateName):
        register_generator("gaussian_noise", lambda length, rng, sigma: np.zeros(length), ["sigma"])


def test_register_overwrite_allowed_for_custom(scratch_registry):
    register_generator("ow_test", lambda n, r: np.zeros(n))
    scratch_registry.append("ow_test")
    register_generator("ow_test", lambda n, r: np.ones(n), overwrite=True)
    assert resolve(GeneratorSpec("ow_test"))(2, rng()).tolist() == [1, 1]


def test_contract_violation_on_wrong_length(scratch_registry):
    register_generator("broken_test", lambda n, r: np.zeros(n + 1))
    scratch_registry.append("broken_test")
    with pytest.raises(GeneratorContractViolation):
        resolve(GeneratorSpec("broken_test"))(5, rng())


def test_contract_violation_on_non_finite(scratch_registry):
    register_generator("nan_test", lambda n, r: np.full(n, np.nan))
    scratch_registry.append("nan_test")
    with pytest.raises(GeneratorContractViolation):
        resolve(GeneratorSpec("nan_test"))(5, rng())


def test_role_hint_is_advisory():
    # feature-hinted generators resolve fine and can be used anywhere
    assert g.get_entry("peak").role_hint == "feature"
    assert resolve(GeneratorSpec("peak", {"amplitude": 1.0}))(3, rng()).shape == (3,)
