"""Bidding strategies: parameter vectors in, 48-slot bid sets out.

Three families are implemented:

* a timing strategy that always buys in the four cheapest night hours and
  sells in the four expensive evening hours, trading a total volume that
  shrinks or grows with the projected battery level;
* an opportunistic strategy with per-hour log-scale volume and price offsets
  around the rolling median price and the maximum producible volume;
* the neural black-box strategy, where a 4x24 action matrix (buy/sell log
  volumes and log prices per hour) is decoded into bids the same way.

All of them are pure functions of their inputs; exploration noise for the
neural policy is passed in explicitly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .market import BUY, SELL, Bid, round_volume
from .nets import PolicyParams, forward

ACTION_ROWS = 4           # buy volume, buy price, sell volume, sell price
ACTION_HOURS = 24
ACTION_SIZE = ACTION_ROWS * ACTION_HOURS
ACTION_CLIP = 3.0

TIMING_BUY_HOURS = (0, 1, 2, 3)
TIMING_SELL_HOURS = (17, 18, 19, 20)

OPPORTUNISTIC_SIZE = 100
LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TimingParams:
    """Volume scale and battery-level sensitivity of the timing strategy [MWh].

    Both coefficients are positive in the intended regime; the bid builder
    clamps any negative volumes that other values would produce, so raw
    optimizer samples are safe to evaluate.
    """

    alpha1: float
    alpha2: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2])

    @classmethod
    def from_vector(cls, vec) -> "TimingParams":
        a1, a2 = np.asarray(vec, dtype=float)
        return cls(float(a1), float(a2))


@dataclass(frozen=True)
class OpportunisticParams:
    """100 coefficients: 4 battery-level couplings plus 4 per-hour offsets.

    With 1-based numbering, alpha_1..alpha_4 couple the projected battery
    level into buy volume, sell volume, buy price and sell price; for each
    hour h, alpha_{4h+5}, alpha_{4h+6} are log-volume offsets and
    alpha_{4h+7}, alpha_{4h+8} log-price offsets.
    """

    alpha: tuple

    def __post_init__(self) -> None:
        if len(self.alpha) != OPPORTUNISTIC_SIZE:
            raise ValueError(f"expected {OPPORTUNISTIC_SIZE} coefficients, got {len(self.alpha)}")

    def as_vector(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)

    @classmethod
    def from_vector(cls, vec) -> "OpportunisticParams":
        return cls(tuple(float(v) for v in vec))

    @staticmethod
    def volume_offset_indices() -> np.ndarray:
        """0-based positions of the per-hour log-volume offsets (alpha_{4h+5,6})."""
        idx = []
        for h in range(ACTION_HOURS):
            idx.extend([4 * h + 4, 4 * h + 5])
        return np.array(idx)


def timing_bids(params: TimingParams, est_level: float) -> list[Bid]:
    """Night buys at +inf, evening sells at 0; volumes shifted by battery level.

    The fuller the storage is projected to be at midnight, the less is bought
    and the more is sold.  Sentinel prices guarantee acceptance.
    """
    bids = []
    buy_volume = round_volume(max(0.0, (params.alpha1 - params.alpha2 * est_level)) / 4.0)
    sell_volume = round_volume(max(0.0, (params.alpha1 + params.alpha2 * est_level)) / 4.0)
    if buy_volume > 0.0:
        for hour in TIMING_BUY_HOURS:
            bids.append(Bid(buy_volume, math.inf, BUY, hour))
    if sell_volume > 0.0:
        for hour in TIMING_SELL_HOURS:
            bids.append(Bid(sell_volume, 0.0, SELL, hour))
    return bids


def opportunistic_bids(params: OpportunisticParams, est_level: float,
                       vbar: float, pbar: np.ndarray) -> list[Bid]:
    """Per-hour buy/sell pairs priced around the rolling median.

    Volumes scale ``vbar`` and prices scale the hour's median by exponentials
    of the per-hour offsets plus the battery-level couplings.
    """
    a = params.alpha
    pbar = pbar.tolist() if isinstance(pbar, np.ndarray) else pbar
    bids = []
    for hour in range(ACTION_HOURS):
        base = 4 * hour
        buy_volume = round_volume(vbar * math.exp(a[base + 4] + a[0] * est_level))
        if buy_volume > 0.0:
            buy_price = pbar[hour] * math.exp(a[base + 6] + a[2] * est_level)
            bids.append(Bid(buy_volume, buy_price, BUY, hour))
        sell_volume = round_volume(vbar * math.exp(a[base + 5] + a[1] * est_level))
        if sell_volume > 0.0:
            sell_price = pbar[hour] * math.exp(a[base + 7] + a[3] * est_level)
            bids.append(Bid(sell_volume, sell_price, SELL, hour))
    return bids


def blackbox_bids(action: np.ndarray, vbar: float, pbar: np.ndarray) -> list[Bid]:
    """Decode a (4, 24) action matrix into up to 48 bids.

    Rows are buy log-volume, buy log-price, sell log-volume, sell log-price;
    a row value of 3 scales the base volume or price by e^3, about 20x.
    """
    action = np.asarray(action, dtype=float)
    if action.shape != (ACTION_ROWS, ACTION_HOURS):
        raise ValueError(f"action must have shape (4, 24), got {action.shape}")
    scaled = np.exp(action).tolist()
    pbar = pbar.tolist() if isinstance(pbar, np.ndarray) else pbar
    buy_vol_row, buy_price_row, sell_vol_row, sell_price_row = scaled
    bids = []
    for hour in range(ACTION_HOURS):
        volume = round_volume(vbar * buy_vol_row[hour])
        if volume > 0.0:
            bids.append(Bid(volume, pbar[hour] * buy_price_row[hour], BUY, hour))
        volume = round_volume(vbar * sell_vol_row[hour])
        if volume > 0.0:
            bids.append(Bid(volume, pbar[hour] * sell_price_row[hour], SELL, hour))
    return bids


def sample_action(policy: PolicyParams, obs: np.ndarray,
                  xi: np.ndarray) -> tuple[np.ndarray, float]:
    """Draw an action from the Gaussian policy given pre-drawn unit noise.

    Returns the clipped (4, 24) action matrix and the log-density of the
    pre-clip sample under the diagonal Gaussian; the clip to [-3, 3] is
    treated as part of the environment side of the interface.
    """
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (policy.input_size,):
        raise ValueError(f"observation length {obs.shape} != policy input {policy.input_size}")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (policy.action_size,):
        raise ValueError(f"noise length {xi.shape} != action size {policy.action_size}")
    mean = forward(policy.actor, obs)
    raw = mean + xi * np.exp(policy.log_std)
    log_prob = float(np.sum(-policy.log_std - 0.5 * LOG2PI - 0.5 * xi ** 2))
    action = np.clip(raw, -ACTION_CLIP, ACTION_CLIP).reshape(ACTION_ROWS, ACTION_HOURS)
    return action, log_prob


def mean_action(policy: PolicyParams, obs: np.ndarray) -> np.ndarray:
    """Deterministic (noise-free) action used for validation and deployment."""
    mean = forward(policy.actor, np.asarray(obs, dtype=float))
    return np.clip(mean, -ACTION_CLIP, ACTION_CLIP).reshape(ACTION_ROWS, ACTION_HOURS)


# ---------------------------------------------------------------------------
# Parameter (de)serialization
# ---------------------------------------------------------------------------

TIMING = "timing"
OPPORTUNISTIC = "opportunistic"
BLACKBOX = "blackbox"


def save_strategy_params(path, kind: str, params) -> None:
    """JSON document with a ``strategy_kind`` discriminator.

    Timing and opportunistic parameters are stored inline; a black-box entry
    records the path of the policy weight file instead.
    """
    if kind == TIMING:
        payload = {"strategy_kind": kind, "alpha": list(map(float, params.as_vector()))}
    elif kind == OPPORTUNISTIC:
        payload = {"strategy_kind": kind, "alpha": list(map(float, params.as_vector()))}
    elif kind == BLACKBOX:
        payload = {"strategy_kind": kind, "policy_path": str(params)}
    else:
        raise ValueError(f"unknown strategy kind {kind!r}")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_strategy_params(path):
    """Returns (kind, params); black-box entries yield the policy path."""
    with open(path) as fh:
        payload = json.load(fh)
    kind = payload["strategy_kind"]
    if kind == TIMING:
        return kind, TimingParams.from_vector(payload["alpha"])
    if kind == OPPORTUNISTIC:
        return kind, OpportunisticParams.from_vector(payload["alpha"])
    if kind == BLACKBOX:
        return kind, payload["policy_path"]
    raise ValueError(f"unknown strategy kind {kind!r}")
