from pathlib import Path

import pytest

from synthgt import TimeSeriesBuilder, gaussian_noise, gaussian_pulse, seasonal

ROOT = Path(__file__).resolve().parents[1]
PULSE_YAML = ROOT / "configs" / "pulse_vs_seasonal.yaml"


def pulse_seasonal_base() -> TimeSeriesBuilder:
    return (
        TimeSeriesBuilder(n_timesteps=100, normalization="zscore")
        .for_class(0)
        .add_signal(gaussian_noise(sigma=1.0))
        .add_feature(gaussian_pulse(amplitude=3.0), random_location=True, length_pct=0.3)
        .for_class(1)
        .add_signal(gaussian_noise(sigma=1.0))
        .add_feature(seasonal(period=10, amplitude=3.0), random_location=True, length_pct=0.3)
    )


@pytest.fixture
def base_builder():
    return pulse_seasonal_base()


@pytest.fixture(scope="session")
def pulse_splits():
    base = pulse_seasonal_base()
    return {
        "train": base.clone(n_samples=200, random_state=42).build(),
        "test": base.clone(n_samples=50, random_state=43).build(),
    }


@pytest.fixture
def pulse_yaml():
    return PULSE_YAML
