import datetime as dt
import math

import numpy as np
import pytest

from dayahead import data as damod
from dayahead.data import (DataError, ForecastSigmas, generate_synthetic_dataset,
                           load_dataset, make_forecasts, split_dataset,
                           write_dataset)

from conftest import flat_dataset


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

def write_fixture_csvs(tmp_path, num_days=3, skip=None, cloudiness_override=None):
    start = dt.date(2020, 1, 1)
    price_path = tmp_path / "prices.csv"
    weather_path = tmp_path / "weather.csv"
    profile_path = tmp_path / "profile.csv"
    with open(price_path, "w") as pf, open(weather_path, "w") as wf:
        pf.write("date,hour,price\n")
        wf.write("date,hour,cloudiness,wind_speed,temperature\n")
        for day in range(num_days):
            date = (start + dt.timedelta(days=day)).isoformat()
            for hour in range(24):
                if skip == (day, hour):
                    continue
                pf.write(f"{date},{hour},{200 + hour}\n")
                cloud = cloudiness_override if cloudiness_override is not None else hour % 9
                wf.write(f"{date},{hour},{cloud},{3.5},{8.0}\n")
    with open(profile_path, "w") as fh:
        fh.write("hour,avg_consumption_mwh\n")
        for hour in range(24):
            fh.write(f"{hour},0.0002\n")
    return price_path, weather_path, profile_path


def test_load_well_formed_three_days(tmp_path):
    paths = write_fixture_csvs(tmp_path, num_days=3)
    ds = load_dataset(*paths)
    assert ds.num_days == 3
    assert ds.prices.shape == (3, 24)
    assert sum(1 for _ in ds.iter_records()) == 72
    assert ds.prices[1, 5] == 205.0
    assert ds.profile.avg_per_household[12] == 0.0002


def test_missing_hour_reports_first_gap(tmp_path):
    paths = write_fixture_csvs(tmp_path, num_days=4, skip=(2, 13))
    with pytest.raises(DataError, match=r"day 2.*hour 13"):
        load_dataset(*paths)


def test_out_of_range_cloudiness_rejected(tmp_path):
    paths = write_fixture_csvs(tmp_path, cloudiness_override=9)
    with pytest.raises(DataError, match="cloudiness"):
        load_dataset(*paths)


def test_non_integer_okta_rejected(tmp_path):
    paths = write_fixture_csvs(tmp_path, cloudiness_override=3.5)
    with pytest.raises(DataError, match="integer"):
        load_dataset(*paths)


def test_csv_round_trip_preserves_content(tmp_path, small_dataset):
    out = tmp_path / "out"
    paths = write_dataset(small_dataset, out)
    assert len(paths) == 4
    loaded = load_dataset(out / "prices.csv", out / "weather.csv",
                          out / "profile.csv", out / "forecasts.csv")
    np.testing.assert_array_equal(loaded.prices, small_dataset.prices)
    np.testing.assert_array_equal(loaded.cloudiness, small_dataset.cloudiness)
    np.testing.assert_array_equal(loaded.wind_speed, small_dataset.wind_speed)
    # day 0 has no forecast in either
    assert not loaded.forecast_available(0)
    for day in (1, 57, small_dataset.num_days - 1):
        np.testing.assert_array_equal(loaded.forecast_block(day),
                                      small_dataset.forecast_block(day))


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

def test_generator_is_deterministic():
    a = generate_synthetic_dataset(seed=7, num_days=365)
    b = generate_synthetic_dataset(seed=7, num_days=365)
    np.testing.assert_array_equal(a.prices, b.prices)
    np.testing.assert_array_equal(a.cloudiness, b.cloudiness)
    np.testing.assert_array_equal(a.wind_speed, b.wind_speed)
    np.testing.assert_array_equal(a.temperature, b.temperature)
    np.testing.assert_array_equal(a.profile.avg_per_household,
                                  b.profile.avg_per_household)


def test_generator_seed_changes_output():
    a = generate_synthetic_dataset(seed=7, num_days=60)
    b = generate_synthetic_dataset(seed=8, num_days=60)
    assert not np.array_equal(a.prices, b.prices)


def test_night_prices_below_evening_prices():
    ds = generate_synthetic_dataset(seed=3, num_days=365)
    assert ds.prices[:, 2].mean() < ds.prices[:, 19].mean()


def test_generated_domains():
    ds = generate_synthetic_dataset(seed=5, num_days=200)
    assert ds.cloudiness.min() >= 0 and ds.cloudiness.max() <= 8
    assert np.all(ds.wind_speed >= 0)
    assert np.all(ds.prices >= 0)
    assert np.all(ds.profile.avg_per_household >= 0)
    # evening peak in the consumption profile
    profile = ds.profile.avg_per_household
    assert profile[19] == profile.max()


def test_generator_rejects_short_spans():
    with pytest.raises(DataError, match="56"):
        generate_synthetic_dataset(seed=1, num_days=10)


# ---------------------------------------------------------------------------
# Forecasts
# ---------------------------------------------------------------------------

def test_zero_sigma_forecast_equals_actual(small_dataset):
    ds = make_forecasts(small_dataset, ForecastSigmas(0.0, 0.0, 0.0), seed=4)
    for day in (1, 50, ds.num_days - 1):
        block = ds.forecast_block(day)
        np.testing.assert_array_equal(block[0], ds.cloudiness[day].astype(float))
        np.testing.assert_array_equal(block[1], ds.wind_speed[day])
        np.testing.assert_array_equal(block[2], ds.temperature[day])


def test_cloudiness_clipped_and_projected():
    ds = flat_dataset(num_days=60, cloudiness=8)
    fc = make_forecasts(ds, ForecastSigmas(2.0, 0.0, 0.0), seed=1)
    cloud = fc.forecast_cloudiness[1:]
    assert np.all(cloud >= 0) and np.all(cloud <= 8)
    assert np.all(cloud == np.round(cloud))
    # positive deviations on a fully overcast sky must clip back to 8
    dev = make_forecasts(ds, ForecastSigmas(2.0, 0.0, 0.0), seed=1, clip=False,
                         keep_deviations=True)
    above = dev.forecast_deviations["cloudiness"][1:] > 0
    assert above.any()
    assert np.all(cloud[above] == 8)


def test_wind_clipped_at_zero():
    ds = flat_dataset(num_days=60, wind=0.2)
    fc = make_forecasts(ds, ForecastSigmas(0.0, 1.0, 0.0), seed=2)
    assert np.all(fc.forecast_wind_speed[1:] >= 0)


def test_deviation_is_running_sum_of_noise(small_dataset):
    """With clipping off, forecast - actual must equal the recorded walk."""
    fc = make_forecasts(small_dataset, seed=9, clip=False, keep_deviations=True)
    for day in (1, 30, 100):
        for name, actual in (("cloudiness", small_dataset.cloudiness.astype(float)),
                             ("wind_speed", small_dataset.wind_speed),
                             ("temperature", small_dataset.temperature)):
            dev = fc.forecast_deviations[name][day]
            block = {"cloudiness": fc.forecast_cloudiness,
                     "wind_speed": fc.forecast_wind_speed,
                     "temperature": fc.forecast_temperature}[name][day]
            np.testing.assert_allclose(block - actual[day], dev, atol=1e-12)


def test_deviation_std_at_24h_matches_sigma():
    """Monte-Carlo: Var(d_24) = 24 * sigma^2/24 = sigma^2 for sigma = 2."""
    ds = flat_dataset(num_days=501)
    samples = []
    for seed in range(20):
        fc = make_forecasts(ds, ForecastSigmas(0.0, 0.0, 2.0), seed=seed,
                            clip=False, keep_deviations=True)
        # t = 24 is 10 am of the target day: deviation index hour 10
        samples.append(fc.forecast_deviations["temperature"][1:, 10])
    samples = np.concatenate(samples)
    assert samples.size == 10_000
    assert abs(samples.std() - 2.0) / 2.0 < 0.05


def test_negative_sigma_rejected(small_dataset):
    with pytest.raises(DataError, match="negative"):
        make_forecasts(small_dataset, ForecastSigmas(-1.0, 1.0, 1.0), seed=0)


def test_forecast_determinism(small_dataset):
    a = make_forecasts(small_dataset, seed=13)
    b = make_forecasts(small_dataset, seed=13)
    np.testing.assert_array_equal(a.forecast_temperature[1:], b.forecast_temperature[1:])


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------

def test_default_split_proportions():
    """16 synthetic quarters -> 11 train, 1 validation, 4 test quarters."""
    quarter = 365.25 / 4
    ds = generate_synthetic_dataset(seed=2, num_days=1461)  # 4 years
    ds = split_dataset(ds)
    train, val, test = ds.split.ranges()
    assert round((train[1] - train[0]) / quarter) == 11
    assert round((val[1] - val[0]) / quarter) == 1
    assert round((test[1] - test[0]) / quarter) == 4
    assert train[1] == val[0] and val[1] == test[0] and test[1] == ds.num_days


def test_explicit_disjoint_ranges_accepted(small_dataset):
    ds = split_dataset(small_dataset, ranges=((0, 60), (60, 90), (90, 120)))
    assert ds.split.train == (0, 60)
    assert ds.split.test == (90, 120)


def test_overlapping_ranges_rejected(small_dataset):
    with pytest.raises(DataError, match="disjoint"):
        split_dataset(small_dataset, ranges=((0, 61), (60, 90), (90, 120)))


def test_out_of_order_ranges_rejected(small_dataset):
    with pytest.raises(DataError, match="disjoint|ordered"):
        split_dataset(small_dataset, ranges=((60, 90), (0, 60), (90, 120)))
