"""Day-ahead market simulator for a battery-backed prosumer.

The environment replays recorded (or synthetic) prices and weather.  One
decision step covers one delivery day: bids for all 24 hours of day ``d+1``
are submitted at the scheduling time (10:30 am) of day ``d``, cleared against
the replayed prices, and the simulator then advances hour by hour through the
delivery day, netting production, consumption and executed bids against the
battery.  Residual energy the battery cannot absorb or supply is settled
immediately at penalty prices: forced buys at twice the market price, forced
sells at half of it.

Because the prosumer is assumed too small to move market prices, replaying
the price/weather tape while simulating only the battery gives an unbiased
evaluation of any bidding strategy.  The inner loops run on plain floats;
everything that can be precomputed per dataset (production tables, normalized
observation blocks, rolling price medians) is cached up front, which keeps a
simulated day in the tens of microseconds.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, HOURS_PER_DAY

BUY = "buy"
SELL = "sell"

MARKET_VOLUME_STEP = 0.1  # minimum tradeable volume [MWh]


def round_volume(volume: float) -> float:
    """Round a bid volume to the nearest 0.1 MWh, ties away from zero.

    Values below 0.05 (including negatives) collapse to 0.0, i.e. no bid.
    """
    if volume < 0.05:
        return 0.0
    return math.floor(volume * 10.0 + 0.5) / 10.0


@dataclass(slots=True)
class Bid:
    """One day-ahead bid: volume [MWh], limit price [currency/MWh], side, hour."""

    volume: float
    price: float
    side: str
    hour: int

    def validate(self) -> None:
        if self.side not in (BUY, SELL):
            raise ValueError(f"bid side must be {BUY!r} or {SELL!r}")
        if not 0 <= self.hour < HOURS_PER_DAY:
            raise ValueError(f"bid hour {self.hour} outside 0..23")
        if self.volume < 0:
            raise ValueError("bid volume must be nonnegative")
        scaled = self.volume * 10.0
        if abs(scaled - math.floor(scaled + 0.5)) > 1e-6:
            raise ValueError(f"bid volume {self.volume} is not a multiple of 0.1 MWh")
        if not self.price >= 0:  # rejects NaN; +inf allowed as always-accept sentinel
            raise ValueError("bid price must be nonnegative")


def clear_bid(bid: Bid, clearing_price: float) -> bool:
    """Market acceptance rule for a single bid.

    A buy bid executes when its price is not below the clearing price, a sell
    bid when its price is not above it.  Zero-volume bids never execute.
    """
    if bid.volume == 0.0:
        return False
    if bid.side == BUY:
        return bid.price >= clearing_price
    return bid.price <= clearing_price


@dataclass(slots=True)
class BidOutcome:
    bid: Bid
    accepted: bool


@dataclass
class EnvConfig:
    """Environment parameters (battery, generation, prosumer scale, penalties)."""

    battery_capacity: float = 2.0        # MWh
    battery_efficiency: float = 0.85     # applied once, on charging
    max_solar_generation: float = 0.4    # MWh per hour at clear sky, before panel losses
    solar_efficiency: float = 0.2
    max_wind_generation: float = 0.05    # MWh per hour at cutoff wind speed
    max_wind_speed: float = 11.0         # m/s; turbines stop above this
    households: int = 100
    consumption_noise_std: float = 0.03
    action_hour: int = 10                # bids scheduled at 10:30 -> hour block 10
    price_stat_window: int = 28          # days for the per-hour rolling median
    penalty_buy_multiplier: float = 2.0
    penalty_sell_multiplier: float = 0.5
    initial_charge: float = 0.5          # starting battery level as a fraction of capacity
    price_scale: float | None = None     # observation normalization; None -> train-split mean
    temperature_range: tuple[float, float] = (-20.0, 40.0)

    def __post_init__(self) -> None:
        if self.battery_capacity <= 0:
            raise ValueError("battery capacity must be positive")
        if not 0 < self.battery_efficiency <= 1:
            raise ValueError("battery efficiency must lie in (0, 1]")
        if not 0 < self.solar_efficiency <= 1:
            raise ValueError("solar efficiency must lie in (0, 1]")
        if min(self.max_solar_generation, self.max_wind_generation, self.max_wind_speed) <= 0:
            raise ValueError("generation limits must be positive")
        if self.households < 0:
            raise ValueError("household count must be nonnegative")
        if not 0 <= self.initial_charge <= 1:
            raise ValueError("initial charge must be a fraction of capacity")

    @property
    def max_hourly_production(self) -> float:
        """Largest producible volume in one hour (clear sky, cutoff wind)."""
        return self.max_solar_generation * self.solar_efficiency + self.max_wind_generation


# Flat key-value config file, keys as in the environment parameter table.
_CONFIG_KEYS = {
    "action_scheduling_hour": "action_hour",
    "battery_capacity": "battery_capacity",
    "battery_efficiency": "battery_efficiency",
    "max_solar_generation": "max_solar_generation",
    "solar_panel_efficiency": "solar_efficiency",
    "max_wind_generation": "max_wind_generation",
    "max_wind_speed": "max_wind_speed",
    "households": "households",
    "consumption_noise_std": "consumption_noise_std",
    "price_stat_window": "price_stat_window",
    "penalty_buy_multiplier": "penalty_buy_multiplier",
    "penalty_sell_multiplier": "penalty_sell_multiplier",
    "initial_charge": "initial_charge",
    "price_scale": "price_scale",
}


def write_env_config(config: EnvConfig, path) -> None:
    with open(path, "w") as fh:
        for key, attr in _CONFIG_KEYS.items():
            value = getattr(config, attr)
            if value is None:
                continue
            fh.write(f"{key} = {value!r}\n")


def read_env_config(path) -> EnvConfig:
    import ast

    kwargs = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown environment config key {key!r}")
            kwargs[_CONFIG_KEYS[key]] = ast.literal_eval(value.strip())
    for int_attr in ("households", "action_hour", "price_stat_window"):
        if int_attr in kwargs:
            kwargs[int_attr] = int(kwargs[int_attr])
    return EnvConfig(**kwargs)


# ---------------------------------------------------------------------------
# Production and consumption formulas
# ---------------------------------------------------------------------------

def hourly_consumption(config: EnvConfig, avg_per_household: float, rho: float) -> float:
    """Household-block consumption for one hour: n * E_avg * |1 + rho| [MWh]."""
    return config.households * avg_per_household * abs(1.0 + rho)


def hourly_solar(config: EnvConfig, cloudiness: int) -> float:
    """Solar production for one hour given cloud cover in Oktas [MWh]."""
    if not 0 <= cloudiness <= 8:
        raise ValueError(f"cloudiness {cloudiness} outside 0..8")
    return config.max_solar_generation * (1.0 - cloudiness / 8.0) * config.solar_efficiency


def hourly_wind(config: EnvConfig, wind_speed: float) -> float:
    """Wind production for one hour; zero above the cutoff speed [MWh]."""
    if wind_speed > config.max_wind_speed:
        return 0.0
    return config.max_wind_generation * wind_speed / config.max_wind_speed


def production_table(dataset: Dataset, config: EnvConfig) -> np.ndarray:
    """(days, 24) production from actual weather, vectorized."""
    solar = (config.max_solar_generation * config.solar_efficiency
             * (1.0 - dataset.cloudiness / 8.0))
    wind = np.where(
        dataset.wind_speed <= config.max_wind_speed,
        config.max_wind_generation * dataset.wind_speed / config.max_wind_speed,
        0.0,
    )
    return solar + wind


def forecast_production(forecast_block: np.ndarray, config: EnvConfig) -> np.ndarray:
    """(24,) production implied by a (3, 24) cloudiness/wind/temperature forecast."""
    cloud = np.clip(forecast_block[0], 0.0, 8.0)
    wind = forecast_block[1]
    solar = config.max_solar_generation * config.solar_efficiency * (1.0 - cloud / 8.0)
    wind_prod = np.where(
        wind <= config.max_wind_speed,
        config.max_wind_generation * np.maximum(wind, 0.0) / config.max_wind_speed,
        0.0,
    )
    return solar + wind_prod


# ---------------------------------------------------------------------------
# Rolling per-hour price statistic
# ---------------------------------------------------------------------------

def rolling_hourly_price_stat(prices: np.ndarray, hour: int, day_index: int,
                              window: int = 28) -> float:
    """Median price at ``hour`` over the ``window`` days before ``day_index``.

    During warm-up (fewer than ``window`` prior days) all available history is
    used; an even count takes the mean of the two middle values.  The day
    itself is excluded, so day 0 has no history at all.
    """
    if day_index <= 0:
        raise ValueError("no price history before day 0; start after at least one warm-up day")
    lo = max(0, day_index - window)
    return float(np.median(prices[lo:day_index, hour]))


def rolling_price_stats(dataset: Dataset, day_index: int, window: int = 28) -> np.ndarray:
    """All 24 per-hour rolling medians at once; cached on the dataset."""
    cache = dataset._pbar_cache.get(window)
    if cache is None:
        cache = np.full((dataset.num_days, HOURS_PER_DAY), np.nan)
        dataset._pbar_cache[window] = cache
    row = cache[day_index]
    if math.isnan(row[0]):
        if day_index <= 0:
            raise ValueError("no price history before day 0; start after at least one warm-up day")
        lo = max(0, day_index - window)
        row[:] = np.median(dataset.prices[lo:day_index], axis=0)
    return row


# ---------------------------------------------------------------------------
# Battery projection shared by the simulator and the midnight estimator
# ---------------------------------------------------------------------------

def project_battery_level(charge: float, capacity: float, efficiency: float,
                          buys, sells, production, consumption) -> float:
    """Battery level after netting the given hourly flows, losses on charge only."""
    for buy, sell, prod, cons in zip(buys, sells, production, consumption):
        delta = prod + buy - cons - sell
        if delta >= 0.0:
            charge = min(capacity, charge + efficiency * delta)
        else:
            charge = max(0.0, charge + delta)
    return charge


# ---------------------------------------------------------------------------
# Decision context (observation) and day results
# ---------------------------------------------------------------------------

@dataclass
class DecisionContext:
    """Everything a strategy may look at when bidding for the next day.

    Snapshotted at the scheduling time of ``day``; the bids produced from it
    are for delivery day ``day + 1``.
    """

    day: int
    date: dt.date
    prices_today: np.ndarray          # (24,) prices of the decision day
    rel_charge: float                 # battery level at the decision snapshot / capacity
    est_midnight: float               # projected relative level at midnight
    month_index: int                  # 0..11
    weekday: int                      # 0 = Monday
    pbar: np.ndarray                  # (24,) rolling per-hour median price
    vbar: float                       # max producible volume per hour
    profile: np.ndarray               # (24,) per-household consumption profile
    households: int
    _dataset: Dataset
    _prices_norm: np.ndarray          # (24,) prices_today / price_scale
    _profile_norm: np.ndarray         # (24,) profile / max(profile)
    _forecast_norm: np.ndarray | None # (72,) normalized forecast block

    @property
    def forecast_next(self) -> np.ndarray | None:
        """(3, 24) next-day cloudiness/wind/temperature forecast, None if absent."""
        if self._forecast_norm is None:
            return None
        return self._dataset.forecast_block(self.day + 1)

    def observation(self, include_weather: bool = True) -> np.ndarray:
        """Normalized state vector: 141 values, or 69 without the forecast block."""
        n = 141 if include_weather else 69
        obs = np.zeros(n)
        obs[0:24] = self._prices_norm
        obs[24:48] = self._profile_norm
        obs[48] = self.rel_charge
        obs[49] = self.est_midnight
        obs[50 + self.month_index] = 1.0
        obs[62 + self.weekday] = 1.0
        if include_weather:
            if self._forecast_norm is None:
                raise ValueError("weather observation requested but no forecast block present")
            obs[69:141] = self._forecast_norm
        return obs


@dataclass
class DayResult:
    """Full trace of one simulated delivery day."""

    day: int
    prices: np.ndarray            # (24,) clearing prices
    bid_outcomes: list[BidOutcome]
    buy_volumes: np.ndarray       # (24,) executed purchase volume per hour
    sell_volumes: np.ndarray      # (24,) executed sale volume per hour
    production: np.ndarray        # (24,) MWh generated
    consumption: np.ndarray       # (24,) MWh consumed
    charge_input: np.ndarray      # (24,) MWh fed into the battery (before losses)
    discharge: np.ndarray         # (24,) MWh drawn from the battery
    unscheduled_buys: np.ndarray  # (24,) forced purchases at 2x price
    unscheduled_sells: np.ndarray # (24,) forced sales at 0.5x price
    battery_trace: np.ndarray     # (25,) level at each hour boundary
    cash_deltas: np.ndarray       # (24,) per-hour profit
    reward: float                 # sum of cash deltas


DAY_RESULT_COLUMNS = ["day", "hour", "price", "buy_exec", "sell_exec",
                      "uns_buy", "uns_sell", "battery_level", "cash_delta"]


def export_day_results(results: list[DayResult], path) -> None:
    """Write per-hour traces; battery_level is the level at the end of the hour."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DAY_RESULT_COLUMNS)
        for res in results:
            for h in range(HOURS_PER_DAY):
                w.writerow([
                    res.day, h, repr(float(res.prices[h])),
                    repr(float(res.buy_volumes[h])), repr(float(res.sell_volumes[h])),
                    repr(float(res.unscheduled_buys[h])), repr(float(res.unscheduled_sells[h])),
                    repr(float(res.battery_trace[h + 1])), repr(float(res.cash_deltas[h])),
                ])


def export_bid_outcomes(results: list[DayResult], path) -> None:
    """Write one row per bid: day,hour,side,volume,price,accepted."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "hour", "side", "volume", "price", "accepted"])
        for res in results:
            for outcome in res.bid_outcomes:
                bid = outcome.bid
                w.writerow([res.day, bid.hour, bid.side, repr(float(bid.volume)),
                            repr(float(bid.price)), int(outcome.accepted)])


# ---------------------------------------------------------------------------
# The environment
# ---------------------------------------------------------------------------

class TradingEnv:
    """Replay-driven day-step trading environment.

    ``reset(start_day)`` positions the simulation at the decision point on
    ``start_day - 1`` (with an empty inherited schedule) and returns the
    context for bidding on ``start_day``.  Each ``step(bids)`` clears the bids
    against the next delivery day, simulates its 24 hours, and returns the
    decision context for the following day, the day's profit, and the full
    :class:`DayResult`.  ``done`` is signalled when the replay tape runs out
    of forecast data for the next decision.  ``collect=False`` skips the
    per-day trace, which roughly halves the cost of training rollouts.
    """

    def __init__(self, dataset: Dataset, config: EnvConfig | None = None,
                 rng: np.random.Generator | int | None = None):
        self.dataset = dataset
        self.config = config or EnvConfig()
        if isinstance(rng, np.random.Generator):
            self.rng = rng
        else:
            self.rng = np.random.default_rng(rng)
        cfg = self.config
        self._production = production_table(dataset, cfg)
        self._production_rows = self._production.tolist()
        self._price_rows = dataset.prices.tolist()
        base_consumption = cfg.households * dataset.profile.avg_per_household
        self._base_consumption = base_consumption
        self._base_consumption_list = base_consumption.tolist()
        self._price_scale = cfg.price_scale or self._default_price_scale()
        self._prices_norm = dataset.prices / self._price_scale
        profile_max = dataset.profile.avg_per_household.max()
        self._profile_norm = (dataset.profile.avg_per_household / profile_max
                              if profile_max > 0 else np.zeros(HOURS_PER_DAY))
        if dataset.has_forecasts:
            t_lo, t_hi = cfg.temperature_range
            self._forecast_norm = np.concatenate(
                [
                    dataset.forecast_cloudiness / 8.0,
                    dataset.forecast_wind_speed / cfg.max_wind_speed,
                    (dataset.forecast_temperature - t_lo) / (t_hi - t_lo),
                ],
                axis=1,
            )
            fc_solar = (cfg.max_solar_generation * cfg.solar_efficiency
                        * (1.0 - np.clip(dataset.forecast_cloudiness, 0.0, 8.0) / 8.0))
            fc_wind = np.where(
                dataset.forecast_wind_speed <= cfg.max_wind_speed,
                cfg.max_wind_generation * np.maximum(dataset.forecast_wind_speed, 0.0)
                / cfg.max_wind_speed,
                0.0,
            )
            self._forecast_production_rows = (fc_solar + fc_wind).tolist()
        else:
            self._forecast_norm = None
            self._forecast_production_rows = None
        self._forecast_ok = [dataset.forecast_available(d) for d in range(dataset.num_days)]
        self._forecast_ok.append(False)  # sentinel for day num_days
        self.charge = cfg.initial_charge * cfg.battery_capacity
        self.cash = 0.0
        self._next_day: int | None = None
        self._schedule_buys = [0.0] * HOURS_PER_DAY
        self._schedule_sells = [0.0] * HOURS_PER_DAY

    def _default_price_scale(self) -> float:
        split = self.dataset.split
        if split is not None:
            lo, hi = split.train
            return float(self.dataset.prices[lo:hi].mean())
        return float(self.dataset.prices.mean())

    @property
    def price_scale(self) -> float:
        return self._price_scale

    # -- episode control ----------------------------------------------------

    def reset(self, start_day: int) -> DecisionContext:
        """Start an episode whose first delivery day is ``start_day``.

        Needs one prior day for the decision context and a forecast for that
        prior day (forecasts exist from day 1), so ``start_day >= 2``.
        """
        if start_day < 2:
            raise ValueError("start_day must be at least 2 (one decision day plus forecasts)")
        if start_day >= self.dataset.num_days:
            raise ValueError("start_day beyond the dataset")
        if not self.dataset.forecast_available(start_day):
            raise ValueError(f"no forecast for day {start_day}; generate forecasts first")
        cfg = self.config
        self.charge = cfg.initial_charge * cfg.battery_capacity
        self.cash = 0.0
        self._next_day = start_day
        self._schedule_buys = [0.0] * HOURS_PER_DAY
        self._schedule_sells = [0.0] * HOURS_PER_DAY
        decision_day = start_day - 1
        ctx = self._build_context(decision_day)
        # Play out the remainder of the decision day with no scheduled bids so
        # the realized midnight level follows the same dynamics the estimator
        # assumes.
        self._simulate_hours(decision_day, cfg.action_hour, HOURS_PER_DAY,
                             self._schedule_buys, self._schedule_sells, None)
        return ctx

    def step(self, bids: list[Bid], collect: bool = True, trusted: bool = False
             ) -> tuple[DecisionContext | None, float, DayResult | None, bool]:
        if self._next_day is None:
            raise RuntimeError("call reset() before step()")
        day = self._next_day
        if day >= self.dataset.num_days:
            raise RuntimeError("replay tape exhausted; reset() the environment")
        prices = self._price_rows[day]

        outcomes: list[BidOutcome] = []
        buy_vol = [0.0] * HOURS_PER_DAY
        sell_vol = [0.0] * HOURS_PER_DAY
        for bid in bids:
            if not trusted:
                bid.validate()
            if bid.volume == 0.0:
                continue
            price = prices[bid.hour]
            if bid.side == BUY:
                accepted = bid.price >= price
                if accepted:
                    buy_vol[bid.hour] += bid.volume
            else:
                accepted = bid.price <= price
                if accepted:
                    sell_vol[bid.hour] += bid.volume
            if collect:
                outcomes.append(BidOutcome(bid, accepted))

        if collect:
            result = DayResult(
                day=day,
                prices=self.dataset.prices[day].copy(),
                bid_outcomes=outcomes,
                buy_volumes=np.array(buy_vol),
                sell_volumes=np.array(sell_vol),
                production=self._production[day].copy(),
                consumption=np.zeros(HOURS_PER_DAY),
                charge_input=np.zeros(HOURS_PER_DAY),
                discharge=np.zeros(HOURS_PER_DAY),
                unscheduled_buys=np.zeros(HOURS_PER_DAY),
                unscheduled_sells=np.zeros(HOURS_PER_DAY),
                battery_trace=np.zeros(HOURS_PER_DAY + 1),
                cash_deltas=np.zeros(HOURS_PER_DAY),
                reward=0.0,
            )
            result.battery_trace[0] = self.charge
        else:
            result = None

        action_hour = self.config.action_hour
        reward = self._simulate_hours(day, 0, action_hour, buy_vol, sell_vol, result)

        # Decision snapshot for the *next* delivery day, taken mid-delivery.
        self._schedule_buys = buy_vol
        self._schedule_sells = sell_vol
        done = not self._forecast_ok[day + 1]
        ctx = None if done else self._build_context(day)

        reward += self._simulate_hours(day, action_hour, HOURS_PER_DAY,
                                       buy_vol, sell_vol, result)
        if result is not None:
            result.reward = reward
        self._next_day = day + 1
        return ctx, reward, result, done

    @property
    def next_delivery_day(self) -> int | None:
        return self._next_day

    # -- internals ----------------------------------------------------------

    def _simulate_hours(self, day: int, hour_lo: int, hour_hi: int,
                        buy_vol: list[float], sell_vol: list[float],
                        result: DayResult | None) -> float:
        cfg = self.config
        capacity = cfg.battery_capacity
        eta = cfg.battery_efficiency
        buy_mult = cfg.penalty_buy_multiplier
        sell_mult = cfg.penalty_sell_multiplier
        prices = self._price_rows[day]
        production = self._production_rows[day]
        base_cons = self._base_consumption_list
        count = hour_hi - hour_lo
        if count <= 0:
            return 0.0
        rho = self.rng.normal(0.0, cfg.consumption_noise_std, count).tolist()
        charge = self.charge
        cash = 0.0
        for i in range(count):
            h = hour_lo + i
            cons = base_cons[h] * abs(1.0 + rho[i])
            buy = buy_vol[h]
            sell = sell_vol[h]
            price = prices[h]
            delta = production[h] + buy - cons - sell
            uns_buy = 0.0
            uns_sell = 0.0
            charge_in = 0.0
            discharge = 0.0
            if delta >= 0.0:
                headroom = (capacity - charge) / eta
                if headroom < 0.0:
                    headroom = 0.0
                if delta <= headroom:
                    charge_in = delta
                else:
                    charge_in = headroom
                    uns_sell = delta - headroom
                charge = charge + eta * charge_in
                if charge > capacity:
                    charge = capacity
            else:
                deficit = -delta
                if deficit <= charge:
                    discharge = deficit
                else:
                    discharge = charge
                    uns_buy = deficit - charge
                charge -= discharge
            hour_cash = (sell - buy) * price \
                + uns_sell * sell_mult * price \
                - uns_buy * buy_mult * price
            cash += hour_cash
            if result is not None:
                result.consumption[h] = cons
                result.charge_input[h] = charge_in
                result.discharge[h] = discharge
                result.unscheduled_buys[h] = uns_buy
                result.unscheduled_sells[h] = uns_sell
                result.cash_deltas[h] = hour_cash
                result.battery_trace[h + 1] = charge
        self.charge = charge
        self.cash += cash
        return cash

    def _build_context(self, decision_day: int) -> DecisionContext:
        cfg = self.config
        dataset = self.dataset
        est = self.estimate_midnight_level(decision_day)
        next_day = decision_day + 1
        has_next = self._forecast_ok[next_day]
        return DecisionContext(
            day=decision_day,
            date=dataset.date_of(decision_day),
            prices_today=dataset.prices[decision_day],
            rel_charge=self.charge / cfg.battery_capacity,
            est_midnight=est,
            month_index=dataset.month_of(decision_day) - 1,
            weekday=dataset.weekday_of(decision_day),
            pbar=rolling_price_stats(dataset, decision_day, cfg.price_stat_window),
            vbar=cfg.max_hourly_production,
            profile=dataset.profile.avg_per_household,
            households=cfg.households,
            _dataset=dataset,
            _prices_norm=self._prices_norm[decision_day],
            _profile_norm=self._profile_norm,
            _forecast_norm=self._forecast_norm[next_day] if has_next else None,
        )

    def estimate_midnight_level(self, decision_day: int) -> float:
        """Projected relative battery level at the upcoming midnight.

        Simulates the remaining hours of the decision day with the already
        cleared bid schedule, production implied by the day's weather forecast,
        and expected consumption (noise at its mean of zero).
        """
        cfg = self.config
        if self._forecast_production_rows is None or not self._forecast_ok[decision_day]:
            raise ValueError(f"no forecast available for day {decision_day}")
        lo = cfg.action_hour
        capacity = cfg.battery_capacity
        eta = cfg.battery_efficiency
        prod = self._forecast_production_rows[decision_day]
        cons = self._base_consumption_list
        buys = self._schedule_buys
        sells = self._schedule_sells
        charge = self.charge
        for h in range(lo, HOURS_PER_DAY):
            delta = prod[h] + buys[h] - cons[h] - sells[h]
            if delta >= 0.0:
                charge = charge + eta * delta
                if charge > capacity:
                    charge = capacity
            else:
                charge = charge + delta
                if charge < 0.0:
                    charge = 0.0
        return charge / capacity


# ---------------------------------------------------------------------------
# Reference balance
# ---------------------------------------------------------------------------

def reference_balance(dataset: Dataset, config: EnvConfig,
                      day_range: tuple[int, int]) -> float:
    """No-skill baseline over ``day_range``: daily net production valued at
    the day's average price, summed over days."""
    lo, hi = day_range
    if not 0 <= lo <= hi <= dataset.num_days:
        raise ValueError(f"day range ({lo}, {hi}) outside the dataset")
    production = production_table(dataset, config)[lo:hi].sum(axis=1)
    daily_consumption = config.households * dataset.profile.avg_per_household.sum()
    mean_prices = dataset.prices[lo:hi].mean(axis=1)
    return float(((production - daily_consumption) * mean_prices).sum())
