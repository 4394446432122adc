"""Per-user linear Q-learning: one adaptive linear unit per candidate SBS.

Q(x, a) = w_a . x + b_a, trained by the Widrow-Hoff (LMS) rule against an
exponential-moving-average target. Scoring and updates deliberately use
plain sequential loops so the compiled slot kernel reproduces them bit for
bit.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class DivergenceError(RuntimeError):
    """A Q update produced a non-finite parameter."""


@dataclass
class LearnParams:
    learning_rate: float = 0.01
    ema_alpha: float = 0.3
    discount: float = 0.9
    epsilon: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.ema_alpha <= 1.0:
            raise ValueError("ema_alpha must lie in [0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass
class QApproximator:
    """One user's per-action weight matrix (actions x features) and biases."""

    weights: np.ndarray
    bias: np.ndarray
    hyper: LearnParams = field(default_factory=LearnParams)

    @classmethod
    def zeros(cls, num_actions, num_features, hyper=None):
        return cls(
            weights=np.zeros((num_actions, num_features)),
            bias=np.zeros(num_actions),
            hyper=hyper or LearnParams(),
        )

    @property
    def num_actions(self):
        return self.weights.shape[0]


def _features(obs):
    return obs.features if hasattr(obs, "features") else obs


def q_value(approx, obs, action):
    """w_a . x + b_a, accumulated sequentially over features."""
    x = _features(obs)
    if not 0 <= action < approx.num_actions:
        raise ValueError(f"action {action} out of range")
    w = approx.weights[action]
    if len(x) != len(w):
        raise ValueError(f"feature length {len(x)} != weight length {len(w)}")
    acc = 0.0
    for j in range(len(w)):
        acc += w[j] * x[j]
    return acc + approx.bias[action]


def ema_target(q_current, reward, q_max_next, alpha, gamma):
    """Exponential-moving-average bootstrap target.

    y = (1 - alpha) * Q + alpha * (r + gamma * max_a Q'); the bootstrap
    maximum is evaluated on the same observation as Q.
    """
    return (1.0 - alpha) * q_current + alpha * (reward + gamma * q_max_next)


def widrow_hoff_update(approx, obs, action, target_y):
    """One LMS step on the chosen action: w += lr*(y - Q)*x, b += lr*(y - Q).

    Mutates and returns ``approx``; no other action's parameters change.
    Raises DivergenceError if the update leaves a non-finite parameter.
    """
    x = _features(obs)
    q = q_value(approx, obs, action)
    err = approx.hyper.learning_rate * (target_y - q)
    if not math.isfinite(err):
        raise DivergenceError(
            f"non-finite LMS step for action {action}: target={target_y!r} q={q!r}"
        )
    w = approx.weights[action]
    for j in range(len(w)):
        w[j] += err * x[j]
    approx.bias[action] += err
    if not math.isfinite(approx.bias[action]):
        raise DivergenceError(
            f"bias for action {action} diverged to {approx.bias[action]!r}"
        )
    return approx


def greedy_action(q_values):
    """Argmax with ties broken by the lowest index."""
    best = 0
    best_q = -math.inf
    for a, q in enumerate(q_values):
        if q > best_q:
            best_q = q
            best = a
    return best


def select_action(approx, obs, rng):
    """Epsilon-greedy choice over the user's candidate actions.

    Always consumes exactly two uniform draws from ``rng`` (explore flag and
    explore choice) so the stream shape never depends on epsilon or on the
    Q values.
    """
    u_explore = rng.random()
    u_choice = rng.random()
    n = approx.num_actions
    if u_explore < approx.hyper.epsilon:
        k = int(u_choice * n)
        return min(k, n - 1)
    return greedy_action([q_value(approx, obs, a) for a in range(n)])
