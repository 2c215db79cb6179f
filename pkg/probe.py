# temporary calibration probe, not part of the package
import sys
import time

import numpy as np

import dayahead as da
from dayahead.cmaes import CmaesConfig
from dayahead.market import EnvConfig, reference_balance
from dayahead.training import (A2cConfig, a2c_train, optimize_parametric,
                               evaluate_strategy, parametric_strategy,
                               fixed_action_strategy)


def probe(name, gen_cfg, run_opp=False, seeds=(0,), a2c_days=200_000):
    ds = da.split_dataset(da.make_forecasts(
        da.generate_synthetic_dataset(7, 1460, gen_cfg), seed=8))
    env = EnvConfig()
    test_range = (ds.split.test[0], ds.split.test[0] + 365)
    ref = reference_balance(ds, env, test_range)
    zero = evaluate_strategy(fixed_action_strategy(np.zeros((4, 24))), ds, env,
                             test_range, seed=0)
    print(f'== {name}: mean price {ds.prices.mean():.0f} '
          f'(night {ds.prices[:,2].mean():.0f} / evening {ds.prices[:,19].mean():.0f}); '
          f'ref {ref:.0f}, zero {zero:.0f}')
    for seed in seeds:
        t0 = time.perf_counter()
        best, hist = optimize_parametric('timing', ds, env,
                                         CmaesConfig(generations=100, seed=seed), seed=seed)
        ti = evaluate_strategy(parametric_strategy('timing', best), ds, env,
                               test_range, seed=seed)
        t_t = time.perf_counter() - t0
        t0 = time.perf_counter()
        run = a2c_train(ds, env, A2cConfig(total_days=a2c_days), seed=seed)
        t_a = time.perf_counter() - t0
        extra = ''
        if run_opp:
            t0 = time.perf_counter()
            bo, _ = optimize_parametric('opportunistic', ds, env,
                                        CmaesConfig(generations=100, seed=seed), seed=seed)
            oi = evaluate_strategy(parametric_strategy('opportunistic', bo), ds, env,
                                   test_range, seed=seed)
            extra = f'  opp {oi:.0f} ({time.perf_counter()-t0:.0f}s)'
        print(f'   seed {seed}: timing {ti:.0f} ({t_t:.0f}s)  '
              f'a2c {run.test_income:.0f} val@{run.best_step} ({t_a:.0f}s){extra}')
    return ds


if __name__ == '__main__':
    which = sys.argv[1] if len(sys.argv) > 1 else 'all'
    if which in ('a', 'all'):
        probe('V2a weekend-flat + shock0.08 + wind10', da.SyntheticConfig(
            weekend_shape_factor=0.3, weekend_discount=60.0, day_shock_std=0.08,
            wind_price_coef=10.0, cloud_price_coef=6.0))
    if which in ('b', 'all'):
        probe('V2b + weather spells', da.SyntheticConfig(
            weekend_shape_factor=0.3, weekend_discount=60.0, day_shock_std=0.08,
            wind_price_coef=10.0, cloud_price_coef=6.0,
            cloudiness_ar=0.97, cloudiness_innovation_std=0.5,
            wind_ar=0.96, wind_innovation_std=0.55,
            seasonal_cloudiness_amplitude=1.6, seasonal_wind_amplitude=1.5))
    if which in ('c', 'all'):
        probe('V2c + seasonal shape 0.5', da.SyntheticConfig(
            weekend_shape_factor=0.3, weekend_discount=60.0, day_shock_std=0.08,
            wind_price_coef=10.0, cloud_price_coef=6.0,
            cloudiness_ar=0.97, cloudiness_innovation_std=0.5,
            wind_ar=0.96, wind_innovation_std=0.55,
            seasonal_cloudiness_amplitude=1.6, seasonal_wind_amplitude=1.5,
            seasonal_shape_amplitude=0.5))
