import numpy as np
import pytest

from dayahead import data as damod


@pytest.fixture(scope="session")
def small_dataset():
    """120 synthetic days with forecasts and default splits, shared read-only."""
    ds = damod.generate_synthetic_dataset(seed=7, num_days=120)
    ds = damod.make_forecasts(ds, seed=8)
    return damod.split_dataset(ds)


@pytest.fixture(scope="session")
def year_dataset():
    """One synthetic year with forecasts, for longer-horizon checks."""
    ds = damod.generate_synthetic_dataset(seed=11, num_days=420)
    ds = damod.make_forecasts(ds, seed=12)
    return damod.split_dataset(ds)


def flat_dataset(num_days=6, price=250.0, cloudiness=8, wind=0.0, temperature=10.0,
                 profile=None, start=None):
    """Hand-buildable dataset: constant price/weather, optional custom profile.

    cloudiness=8 and wind=0 silence production so fixtures can reason about
    bids and the battery alone.
    """
    import datetime as dt

    shape = (num_days, 24)
    profile_values = np.zeros(24) if profile is None else np.asarray(profile, dtype=float)
    return damod.Dataset(
        start_date=start or dt.date(2020, 1, 6),  # a Monday
        prices=np.full(shape, float(price)),
        cloudiness=np.full(shape, int(cloudiness)),
        wind_speed=np.full(shape, float(wind)),
        temperature=np.full(shape, float(temperature)),
        profile=damod.ConsumptionProfile(profile_values),
    )


def with_perfect_forecasts(dataset):
    """Forecasts equal to actuals (sigma = 0)."""
    return damod.make_forecasts(dataset, damod.ForecastSigmas(0.0, 0.0, 0.0), seed=0)
