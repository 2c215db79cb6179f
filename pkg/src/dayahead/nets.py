"""Minimal feed-forward networks with exact analytic gradients.

Just enough machinery for the trading policy: affine layers with tanh hidden
activations and a linear output, reverse-mode gradients checked against
finite differences in the test suite, orthogonal initialization, and a plain
RMSprop optimizer.  Everything is numpy; a policy is a pair of such networks
(actor and critic) plus a learned state-independent log-std vector.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TANH = "tanh"
IDENTITY = "identity"  # used by tests with closed-form gradients


@dataclass
class MLP:
    """Fully connected network; weights[i] has shape (out_i, in_i)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = TANH

    def __post_init__(self) -> None:
        if self.activation not in (TANH, IDENTITY):
            raise ValueError(f"unsupported activation {self.activation!r}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: bias length {b.shape[0]} != rows {w.shape[0]}")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i}: input size mismatch")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MLP":
        return MLP([w.copy() for w in self.weights],
                   [b.copy() for b in self.biases], self.activation)


def create_mlp(sizes: list[int], activation: str = TANH) -> MLP:
    """Zero-initialized network with the given layer sizes (input first)."""
    if len(sizes) < 2:
        raise ValueError("need at least input and output sizes")
    weights = [np.zeros((sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return MLP(weights, biases, activation)


@dataclass
class Gradients:
    """Per-parameter partials, shape-matched to the owning network."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


def forward(net: MLP, x: np.ndarray) -> np.ndarray:
    """Evaluate the network; accepts a single vector or a (batch, in) matrix."""
    y, _ = forward_cached(net, x, need_cache=False)
    return y


def forward_cached(net: MLP, x: np.ndarray, need_cache: bool = True):
    """Evaluate and keep the per-layer activations needed by ``backward``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.shape[1] != net.input_size:
        raise ValueError(f"input size {a.shape[1]} != network input {net.input_size}")
    cache = [a] if need_cache else None
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        a = a @ w.T + b
        if i < last and net.activation == TANH:
            a = np.tanh(a)
        if need_cache:
            cache.append(a)
    return (a[0] if single else a), cache


def backward(net: MLP, cache: list[np.ndarray], output_gradient: np.ndarray) -> Gradients:
    """Exact gradients of a scalar loss given d loss / d output.

    ``cache`` comes from ``forward_cached``; batched output gradients are
    summed over the batch, matching the gradient of a summed loss.
    """
    g = np.asarray(output_gradient, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != cache[-1].shape:
        raise ValueError(f"output gradient shape {g.shape} != output shape {cache[-1].shape}")
    n_layers = len(net.weights)
    d_weights: list[np.ndarray] = [None] * n_layers
    d_biases: list[np.ndarray] = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        a_prev = cache[i]
        d_weights[i] = g.T @ a_prev
        d_biases[i] = g.sum(axis=0)
        if i > 0:
            g = g @ net.weights[i]
            if net.activation == TANH:
                g = g * (1.0 - cache[i] ** 2)
    return Gradients(d_weights, d_biases)


def orthogonal_init(net: MLP, rng: np.random.Generator | int,
                    gains: float | list[float] = 1.0) -> MLP:
    """Orthogonally initialize every weight matrix in place; zero the biases.

    Whichever of rows/columns is smaller ends up orthonormal, scaled by the
    layer gain.  ``gains`` is a single value or one per layer.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if np.isscalar(gains):
        gains = [float(gains)] * len(net.weights)
    if len(gains) != len(net.weights):
        raise ValueError("need one gain per layer")
    for w, b, gain in zip(net.weights, net.biases, gains):
        rows, cols = w.shape
        a = rng.standard_normal((max(rows, cols), min(rows, cols)))
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))  # fix the sign ambiguity for a unique Q
        w[:] = gain * (q if rows >= cols else q.T)
        b[:] = 0.0
    return net


# ---------------------------------------------------------------------------
# RMSprop
# ---------------------------------------------------------------------------

@dataclass
class RmsPropState:
    square_avg: list[np.ndarray]


def rmsprop_step(params: list[np.ndarray], grads: list[np.ndarray],
                 state: RmsPropState | None, lr: float = 1e-4,
                 decay: float = 0.99, eps: float = 1e-5) -> RmsPropState:
    """One RMSprop update, in place on ``params``; returns the carried state.

    Accumulates an exponential moving average of squared gradients and steps
    by lr * g / (sqrt(avg) + eps).  Non-finite gradients abort: they signal a
    diverging training run rather than something to silently clip.
    """
    if state is None:
        state = RmsPropState([np.zeros_like(p) for p in params])
    if len(params) != len(grads) or len(params) != len(state.square_avg):
        raise ValueError("params, grads and state must align")
    for p, g, avg in zip(params, grads, state.square_avg):
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient in RMSprop update")
        avg *= decay
        avg += (1.0 - decay) * g * g
        p -= lr * g / (np.sqrt(avg) + eps)
    return state


def clip_gradient_norm(grads: list[np.ndarray], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most ``max_norm``."""
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = np.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return float(norm)


# ---------------------------------------------------------------------------
# The trading policy: actor + critic + log-std
# ---------------------------------------------------------------------------

POLICY_FORMAT_VERSION = 1


@dataclass
class PolicyParams:
    """Trainable parameters of the Gaussian bidding policy.

    The actor maps an observation to the 96 action means; exploration noise
    is scaled by a learned, state-independent log-std vector.  The critic has
    the same architecture with a scalar output.  ``meta`` carries whatever the
    policy needs to be deployable standalone, in particular the observation
    normalization constants.
    """

    actor: MLP
    critic: MLP
    log_std: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def input_size(self) -> int:
        return self.actor.input_size

    @property
    def action_size(self) -> int:
        return self.actor.output_size

    def parameters(self) -> list[np.ndarray]:
        """All trainable arrays, in a stable order (actor, critic, log-std)."""
        out: list[np.ndarray] = []
        for net in (self.actor, self.critic):
            out.extend(net.weights)
            out.extend(net.biases)
        out.append(self.log_std)
        return out

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.actor.copy(), self.critic.copy(),
                            self.log_std.copy(), dict(self.meta))


def init_policy(input_size: int, hidden_size: int = 200, action_size: int = 96,
                seed: int | np.random.Generator = 0, log_std_init: float = -1.0,
                hidden_gain: float = 1.0, policy_gain: float = 0.01,
                value_gain: float = 1.0, meta: dict | None = None) -> PolicyParams:
    """Fresh orthogonally-initialized actor-critic pair.

    The small policy-head gain keeps initial actions near zero, i.e. initial
    bids near the median price and the rounding threshold.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    actor = create_mlp([input_size, hidden_size, action_size])
    critic = create_mlp([input_size, hidden_size, 1])
    orthogonal_init(actor, rng, [hidden_gain, policy_gain])
    orthogonal_init(critic, rng, [hidden_gain, value_gain])
    log_std = np.full(action_size, float(log_std_init))
    return PolicyParams(actor, critic, log_std, meta or {})


def save_policy(path, policy: PolicyParams) -> None:
    """Serialize a policy to ``.npz`` (exact float64 round trip)."""
    arrays = {}
    for prefix, net in (("actor", policy.actor), ("critic", policy.critic)):
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{prefix}_w{i}"] = w
            arrays[f"{prefix}_b{i}"] = b
    arrays["log_std"] = policy.log_std
    header = {
        "format_version": POLICY_FORMAT_VERSION,
        "actor_layers": len(policy.actor.weights),
        "critic_layers": len(policy.critic.weights),
        "meta": policy.meta,
    }
    arrays["header"] = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_policy(path) -> PolicyParams:
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header["format_version"] != POLICY_FORMAT_VERSION:
            raise ValueError(f"unsupported policy format {header['format_version']}")
        nets = {}
        for prefix in ("actor", "critic"):
            n = header[f"{prefix}_layers"]
            weights = [data[f"{prefix}_w{i}"].copy() for i in range(n)]
            biases = [data[f"{prefix}_b{i}"].copy() for i in range(n)]
            nets[prefix] = MLP(weights, biases)
        return PolicyParams(nets["actor"], nets["critic"],
                            data["log_std"].copy(), header.get("meta", {}))
