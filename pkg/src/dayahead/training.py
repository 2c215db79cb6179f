"""Training procedures: strategy evaluation, CMA-ES wiring, and the
advantage actor-critic loop with generalized advantage estimation.

The actor-critic trainer rolls the Gaussian bidding policy through 90-day
windows sampled from the training split, computes GAE advantages, and takes
one joint RMSprop step per rollout.  Periodically the deterministic (mean
action) policy is scored on a fixed validation window; the parameters with
the best validation reward are the ones later scored on the test range, never
the final ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cmaes import CmaesConfig, CmaesHistory, cmaes_optimize
from .data import Dataset
from .market import EnvConfig, TradingEnv, DayResult
from .nets import (PolicyParams, RmsPropState, backward, clip_gradient_norm,
                   forward, forward_cached, init_policy, rmsprop_step)
from .strategies import (ACTION_CLIP, ACTION_SIZE, OPPORTUNISTIC, TIMING,
                         OpportunisticParams, TimingParams, blackbox_bids,
                         opportunistic_bids, timing_bids)

LOG2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Strategy adapters: anything mapping a DecisionContext to a bid list
# ---------------------------------------------------------------------------

def timing_strategy(params: TimingParams):
    return lambda ctx: timing_bids(params, ctx.est_midnight)


def opportunistic_strategy(params: OpportunisticParams):
    return lambda ctx: opportunistic_bids(params, ctx.est_midnight, ctx.vbar, ctx.pbar)


def policy_strategy(policy: PolicyParams, include_weather: bool = True):
    """Deterministic mean-action wrapper around a trained policy."""
    from .strategies import mean_action

    def bids(ctx):
        action = mean_action(policy, ctx.observation(include_weather))
        return blackbox_bids(action, ctx.vbar, ctx.pbar)

    return bids


def fixed_action_strategy(action: np.ndarray):
    """Always plays the same (4, 24) action matrix; the zero matrix is the
    canonical untrained baseline."""
    action = np.asarray(action, dtype=float)

    def bids(ctx):
        return blackbox_bids(action, ctx.vbar, ctx.pbar)

    return bids


def parametric_strategy(kind: str, vector: np.ndarray):
    if kind == TIMING:
        return timing_strategy(TimingParams.from_vector(vector))
    if kind == OPPORTUNISTIC:
        return opportunistic_strategy(OpportunisticParams.from_vector(vector))
    raise ValueError(f"unknown parametric strategy {kind!r}")


def parametric_dimension(kind: str) -> int:
    if kind == TIMING:
        return 2
    if kind == OPPORTUNISTIC:
        return 100
    raise ValueError(f"unknown parametric strategy {kind!r}")


def evaluate_strategy(bids_fn, dataset: Dataset, config: EnvConfig,
                      day_range: tuple[int, int], seed: int,
                      collect_results: bool = False):
    """Cumulative profit of ``bids_fn`` over the delivery days in ``day_range``.

    Deterministic per seed: the seed drives consumption noise only, the
    strategy itself must be a pure function of the context.  With
    ``collect_results`` the per-day traces are returned as well.  Bids are
    trusted (not re-validated): strategies built from this package emit
    compliant volumes by construction.
    """
    lo, hi = day_range
    env = TradingEnv(dataset, config, rng=np.random.default_rng(seed))
    ctx = env.reset(lo)
    total = 0.0
    results: list[DayResult] = []
    for _ in range(lo, hi):
        ctx, reward, result, done = env.step(bids_fn(ctx), collect=collect_results,
                                             trusted=True)
        total += reward
        if collect_results:
            results.append(result)
        if done:
            break
    if collect_results:
        return total, results
    return total


# ---------------------------------------------------------------------------
# CMA-ES wiring for the parametric strategies
# ---------------------------------------------------------------------------

def initial_parameter_mean(kind: str, rng: np.random.Generator) -> np.ndarray:
    """Standard-normal initial mean; opportunistic volume offsets start at
    N(-2, 1) so that early samples do not flood the market with huge bids."""
    n = parametric_dimension(kind)
    mean = rng.normal(0.0, 1.0, n)
    if kind == OPPORTUNISTIC:
        mean[OpportunisticParams.volume_offset_indices()] -= 2.0
    return mean


def optimize_parametric(kind: str, dataset: Dataset, env_config: EnvConfig,
                        cma_config: CmaesConfig, seed: int,
                        eval_range: tuple[int, int] | None = None,
                        ) -> tuple[np.ndarray, CmaesHistory]:
    """CMA-ES over the training split; returns the final mean parameters."""
    if dataset.split is None:
        raise ValueError("dataset needs split boundaries before optimization")
    if eval_range is None:
        lo, hi = dataset.split.train
        eval_range = (max(2, lo), hi)
    seeds = np.random.SeedSequence(seed).spawn(2)
    init_rng = np.random.default_rng(seeds[0])
    objective_seed = int(seeds[1].generate_state(1)[0])

    def objective(vector: np.ndarray) -> float:
        return evaluate_strategy(parametric_strategy(kind, vector), dataset,
                                 env_config, eval_range, objective_seed)

    x0 = initial_parameter_mean(kind, init_rng)
    cfg = CmaesConfig(population=cma_config.population, sigma0=cma_config.sigma0,
                      generations=cma_config.generations, seed=seed)
    return cmaes_optimize(objective, x0, cfg)


# ---------------------------------------------------------------------------
# Generalized advantage estimation
# ---------------------------------------------------------------------------

def gae_advantages(rewards: np.ndarray, values: np.ndarray, bootstrap: float,
                   gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and value targets for one rollout.

    ``bootstrap`` is the value estimate past the last step: 0 at a true
    episode end, V(s_T) when the episode merely continues past the rollout.
    Returns (advantages, returns) with returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must have equal length")
    n = rewards.shape[0]
    advantages = np.empty(n)
    acc = 0.0
    next_value = float(bootstrap)
    for t in range(n - 1, -1, -1):
        delta = rewards[t] + gamma * next_value - values[t]
        acc = delta + gamma * lam * acc
        advantages[t] = acc
        next_value = values[t]
    return advantages, advantages + values


# ---------------------------------------------------------------------------
# A2C
# ---------------------------------------------------------------------------

@dataclass
class A2cConfig:
    total_days: int = 200_000        # training budget in simulated days
    episode_length: int = 90
    n_steps: int = 90                # days per update (one episode per rollout)
    gamma: float = 0.9
    gae_lambda: float = 0.9
    learning_rate: float = 1e-4
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    rms_decay: float = 0.99
    rms_eps: float = 1e-5
    max_grad_norm: float = 0.5
    eval_frequency: int = 2_250      # days between validation evaluations
    eval_days: int = 90
    hidden_size: int = 200
    log_std_init: float = -1.0
    include_weather: bool = True
    test_days: int = 365

    def __post_init__(self) -> None:
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("gae_lambda must lie in [0, 1]")
        if self.n_steps <= 0 or self.episode_length <= 0:
            raise ValueError("n_steps and episode_length must be positive")


@dataclass
class EvalPoint:
    step: int
    val_reward: float
    is_best: bool


@dataclass
class TrainingRun:
    """Everything a finished training run reports."""

    eval_log: list[EvalPoint]
    best_policy: PolicyParams
    best_val_reward: float
    best_step: int
    seed: int
    test_income: float | None = None

    def log_rows(self) -> list[tuple[int, float, int]]:
        return [(p.step, p.val_reward, int(p.is_best)) for p in self.eval_log]


class A2cUpdater:
    """One joint actor-critic RMSprop update per rollout.

    The critic regresses on GAE returns computed with the pre-update value
    snapshot; the actor ascends log-probability weighted advantages.  Losses
    are averaged over the rollout, SB-style, and the combined gradient is
    norm-clipped before the optimizer step.
    """

    def __init__(self, policy: PolicyParams, config: A2cConfig):
        self.policy = policy
        self.config = config
        self._params = policy.parameters()
        self._rms: RmsPropState | None = None

    def update(self, observations: np.ndarray, noise: np.ndarray,
               rewards: np.ndarray, bootstrap: float) -> dict:
        cfg = self.config
        policy = self.policy
        t_steps = observations.shape[0]

        means, actor_cache = forward_cached(policy.actor, observations)
        values_col, critic_cache = forward_cached(policy.critic, observations)
        values = values_col[:, 0]
        advantages, returns = gae_advantages(rewards, values, bootstrap,
                                             cfg.gamma, cfg.gae_lambda)

        sigma = np.exp(policy.log_std)
        log_probs = np.sum(-policy.log_std - 0.5 * LOG2PI - 0.5 * noise ** 2, axis=1)
        policy_loss = float(-(log_probs * advantages).mean())
        value_errors = values - returns
        value_loss = float((value_errors ** 2).mean())
        entropy = float(np.sum(policy.log_std + 0.5 * (LOG2PI + 1.0)))

        # d policy_loss / d mean = -A * xi / sigma, averaged over steps
        actor_out_grad = (-advantages[:, None] * noise / sigma[None, :]) / t_steps
        grad_log_std = -(advantages[:, None] * (noise ** 2 - 1.0)).sum(axis=0) / t_steps
        if cfg.ent_coef != 0.0:
            grad_log_std -= cfg.ent_coef  # d entropy / d log_std = 1 per dimension
        critic_out_grad = (cfg.vf_coef * 2.0 * value_errors[:, None]) / t_steps

        actor_grads = backward(policy.actor, actor_cache, actor_out_grad)
        critic_grads = backward(policy.critic, critic_cache, critic_out_grad)
        grads = [*actor_grads.weights, *actor_grads.biases,
                 *critic_grads.weights, *critic_grads.biases, grad_log_std]
        grad_norm = clip_gradient_norm(grads, cfg.max_grad_norm)
        if not math.isfinite(grad_norm):
            raise FloatingPointError("non-finite gradient; training diverged")
        self._rms = rmsprop_step(self._params, grads, self._rms,
                                 lr=cfg.learning_rate, decay=cfg.rms_decay,
                                 eps=cfg.rms_eps)
        return {
            "policy_loss": policy_loss,
            "value_loss": value_loss,
            "entropy": entropy,
            "grad_norm": grad_norm,
            "mean_advantage": float(advantages.mean()),
        }


def _rollout(env: TradingEnv, policy: PolicyParams, start_day: int,
             n_steps: int, noise_rng: np.random.Generator,
             include_weather: bool):
    """Roll the stochastic policy for ``n_steps`` days from ``start_day``."""
    ctx = env.reset(start_day)
    obs = np.empty((n_steps, policy.input_size))
    noise = np.empty((n_steps, policy.action_size))
    rewards = np.empty(n_steps)
    sigma = np.exp(policy.log_std)
    for t in range(n_steps):
        s = ctx.observation(include_weather)
        xi = noise_rng.standard_normal(policy.action_size)
        raw = forward(policy.actor, s) + xi * sigma
        action = np.clip(raw, -ACTION_CLIP, ACTION_CLIP).reshape(4, 24)
        ctx, reward, _, done = env.step(blackbox_bids(action, ctx.vbar, ctx.pbar),
                                        collect=False, trusted=True)
        obs[t] = s
        noise[t] = xi
        rewards[t] = reward
        if done and t != n_steps - 1:
            raise RuntimeError("training window ran off the replay tape")
    return obs, noise, rewards


def evaluate_policy(policy: PolicyParams, dataset: Dataset, config: EnvConfig,
                    day_range: tuple[int, int], seed: int,
                    include_weather: bool = True, collect_results: bool = False):
    """Deterministic-mean-policy profit over ``day_range``."""
    return evaluate_strategy(policy_strategy(policy, include_weather), dataset,
                             config, day_range, seed,
                             collect_results=collect_results)


def a2c_train(dataset: Dataset, env_config: EnvConfig, config: A2cConfig,
              seed: int, progress=None) -> TrainingRun:
    """Full training run: rollouts, updates, periodic validation, final test.

    All randomness (init, window sampling, environment noise, exploration
    noise, evaluation noise) derives from ``seed``.
    """
    if dataset.split is None:
        raise ValueError("dataset needs split boundaries before training")
    train_lo, train_hi = dataset.split.train
    val_lo, val_hi = dataset.split.validation
    test_lo, test_hi = dataset.split.test

    ss = np.random.SeedSequence(seed)
    init_seed, window_seed, env_seed, noise_seed, val_seed, test_seed = ss.spawn(6)
    window_rng = np.random.default_rng(window_seed)
    noise_rng = np.random.default_rng(noise_seed)
    val_eval_seed = int(val_seed.generate_state(1)[0])
    test_eval_seed = int(test_seed.generate_state(1)[0])

    input_size = 141 if config.include_weather else 69
    env = TradingEnv(dataset, env_config, rng=np.random.default_rng(env_seed))
    policy = init_policy(
        input_size, hidden_size=config.hidden_size, seed=np.random.default_rng(init_seed),
        log_std_init=config.log_std_init,
        meta={
            "include_weather": config.include_weather,
            "price_scale": env.price_scale,
            "temperature_range": list(env_config.temperature_range),
            "max_wind_speed": env_config.max_wind_speed,
        },
    )
    updater = A2cUpdater(policy, config)

    first_start = max(2, train_lo)
    last_start = train_hi - config.episode_length
    if last_start < first_start:
        raise ValueError("training split shorter than one episode")
    val_start = max(2, val_lo)
    val_range = (val_start, min(val_hi, val_start + config.eval_days))

    eval_log: list[EvalPoint] = []
    best_policy = policy.copy()
    best_val = -math.inf
    best_step = 0
    steps = 0
    next_eval = config.eval_frequency

    while steps < config.total_days:
        start = int(window_rng.integers(first_start, last_start + 1))
        obs, noise, rewards = _rollout(env, policy, start, config.n_steps,
                                       noise_rng, config.include_weather)
        # Fixed-length episodes end at the rollout boundary: no bootstrap.
        info = updater.update(obs, noise, rewards, bootstrap=0.0)
        steps += config.n_steps

        if steps >= next_eval or steps >= config.total_days:
            val_reward = evaluate_policy(policy, dataset, env_config, val_range,
                                         val_eval_seed, config.include_weather)
            is_best = val_reward > best_val
            if is_best:
                best_val = val_reward
                best_policy = policy.copy()
                best_step = steps
            eval_log.append(EvalPoint(steps, float(val_reward), is_best))
            while next_eval <= steps:
                next_eval += config.eval_frequency
            if progress is not None:
                progress(steps, val_reward, info)

    run = TrainingRun(eval_log=eval_log, best_policy=best_policy,
                      best_val_reward=best_val, best_step=best_step, seed=seed)
    test_start = max(2, test_lo)
    test_range = (test_start, min(test_hi, test_start + config.test_days))
    run.test_income = float(evaluate_policy(best_policy, dataset, env_config,
                                            test_range, test_eval_seed,
                                            config.include_weather))
    return run


# ---------------------------------------------------------------------------
# Battery capacity sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    capacity: float
    incomes: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.incomes))

    @property
    def std(self) -> float:
        if len(self.incomes) < 2:
            return 0.0
        return float(np.std(self.incomes, ddof=1))


def battery_sweep(capacities: list[float], dataset: Dataset,
                  env_config: EnvConfig, a2c_config: A2cConfig,
                  seeds: list[int], progress=None) -> list[SweepRow]:
    """Train and test the neural strategy independently per battery capacity.

    Rows come back sorted by capacity.  Each (capacity, seed) pair is a fully
    independent training run with its own derived seed.
    """
    from dataclasses import replace

    if any(c <= 0 for c in capacities):
        raise ValueError("capacities must be positive")
    rows = []
    for capacity in sorted(capacities):
        incomes = []
        for seed in seeds:
            cfg = replace(env_config, battery_capacity=capacity)
            run = a2c_train(dataset, cfg, a2c_config, seed)
            incomes.append(run.test_income)
            if progress is not None:
                progress(capacity, seed, run.test_income)
        rows.append(SweepRow(capacity=capacity, incomes=incomes))
    return rows
