"""Synchronized multi-agent engine over flat state arrays.

The per-slot hot loop lives in a compiled Cython kernel
(``cellassoc._slotkernel``) with a pure-Python twin selected automatically
when the extension is missing; both consume the same pre-drawn uniforms and
produce bit-identical trajectories. The world owns the flattened per-user
candidate sets, similarity lists, channel gains, Q parameters and load
caches, and exposes read-side views (per-user approximators, histories,
per-slot metrics) for the scenario drivers in ``sim``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import learning, radio
from ._slotkernel_py import step_slot as _step_slot_py

try:
    from ._slotkernel import step_slot as _step_slot_compiled
except ImportError:  # extension not built; fall back to the Python twin
    _step_slot_compiled = None

HAVE_COMPILED_KERNEL = _step_slot_compiled is not None


def kernel_name(kernel="auto"):
    if kernel == "auto":
        return "compiled" if HAVE_COMPILED_KERNEL else "python"
    return kernel


def _resolve_kernel(kernel):
    name = kernel_name(kernel)
    if name == "compiled":
        if _step_slot_compiled is None:
            raise RuntimeError("compiled slot kernel is not available")
        return _step_slot_compiled
    if name == "python":
        return _step_slot_py
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass
class SlotMetrics:
    """Per-slot aggregates; cohort means are NaN while a cohort is empty."""

    slot: int
    mean_reward_imitator: float
    mean_reward_non_imitator: float
    per_sbs_load: np.ndarray
    load_std: float
    jain_index: float


def jain_index(loads):
    """Jain's fairness index (sum x)^2 / (S * sum x^2), NaN on all-zero loads."""
    loads = np.asarray(loads, dtype=float)
    s2 = float((loads * loads).sum())
    if s2 == 0.0:
        return math.nan
    s1 = float(loads.sum())
    return s1 * s1 / (len(loads) * s2)


class World:
    """Mutable simulation state for one scenario run.

    ``entry_slot[u]`` gates activity (users act from that slot on);
    ``is_imitator`` is the declared cohort used for metrics, while the
    imitation machinery itself (reward penalty and extra observation
    features) runs only for users with ``is_imitator`` and ``beta != 0``,
    so beta = 0 collapses both cohorts onto identical dynamics.
    """

    def __init__(self, topology, params, hyper, entry_slot, is_imitator, rng,
                 kernel="auto"):
        U = topology.num_users
        S = topology.num_sbs
        if len(entry_slot) != U or len(is_imitator) != U:
            raise ValueError("cohort arrays must have one entry per user")
        self.topology = topology
        self.params = params
        self.hyper = hyper
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.kernel = kernel_name(kernel)
        self._step = _resolve_kernel(kernel)

        self.entry_slot = np.asarray(entry_slot, dtype=np.intc)
        self.is_imitator = np.asarray(is_imitator, dtype=bool)
        self.eff_imit = (self.is_imitator & (params.beta != 0.0)).astype(np.uint8)

        cand_start = np.zeros(U + 1, dtype=np.intc)
        cand_flat = []
        for u in range(U):
            cand_flat.extend(int(s) for s in topology.candidate_sets[u])
            cand_start[u + 1] = len(cand_flat)
        self.cand_flat = np.asarray(cand_flat, dtype=np.intc)
        self.cand_start = cand_start

        self.gain_flat = np.zeros(len(self.cand_flat))
        for u in range(U):
            for i in range(cand_start[u], cand_start[u + 1]):
                d = topology.user_sbs_distance(u, int(self.cand_flat[i]))
                self.gain_flat[i] = radio.channel_gain(d, params)

        sim_start = np.zeros(U + 1, dtype=np.intc)
        sim_flat = []
        for u in range(U):
            row = topology.similarity[u]
            sim_flat.extend(v for v in np.flatnonzero(row) if v != u)
            sim_start[u + 1] = len(sim_flat)
        self.sim_flat = np.asarray(sim_flat, dtype=np.intc)
        self.sim_start = sim_start

        ncands = np.diff(cand_start)
        self.nf = np.where(self.eff_imit == 1, 3 * ncands, 2 * ncands).astype(np.intc)
        sizes = (ncands.astype(np.int64)) * self.nf
        self.w_off = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.int64)
        self.w_flat = np.zeros(int(sizes.sum()))
        self.b_flat = np.zeros(len(self.cand_flat))
        self.cache = np.zeros(len(self.cand_flat), dtype=np.intc)

        self.assignment = np.full(U, -1, dtype=np.intc)
        self.loads = np.zeros(S, dtype=np.intc)
        self.slot = 0

        max_nf = int(self.nf.max()) if U else 0
        self._featbuf = np.zeros((U, max_nf))
        self._rewards = np.zeros(U)
        self._chosen = np.zeros(U, dtype=np.intc)
        self._q_sel = np.zeros(U)
        self._q_max = np.zeros(U)
        self._new_assign = np.zeros(U, dtype=np.intc)

        self.metrics = []
        self.reward_history = []
        self.assignment_history = []
        self.load_history = []

    @property
    def num_users(self):
        return self.topology.num_users

    @property
    def num_sbs(self):
        return self.topology.num_sbs

    def active_mask(self, t=None):
        t = self.slot if t is None else t
        return self.entry_slot <= t

    def approximator(self, u):
        """Zero-copy QApproximator view over user u's parameters."""
        c0, c1 = int(self.cand_start[u]), int(self.cand_start[u + 1])
        nc, nfu = c1 - c0, int(self.nf[u])
        off = int(self.w_off[u])
        return learning.QApproximator(
            weights=self.w_flat[off:off + nc * nfu].reshape(nc, nfu),
            bias=self.b_flat[c0:c1],
            hyper=self.hyper,
        )

    def user_cache(self, u):
        c0, c1 = int(self.cand_start[u]), int(self.cand_start[u + 1])
        return self.cache[c0:c1]

    def step(self):
        """Run one synchronized slot; returns its SlotMetrics."""
        t = self.slot
        U = self.num_users
        u_explore = self.rng.random(U)
        u_choice = self.rng.random(U)
        n_active = int(np.count_nonzero(self.entry_slot <= t))
        h = self.hyper
        p = self.params
        diverged = self._step(
            t, n_active, U,
            h.epsilon, h.learning_rate, h.ema_alpha, h.discount, p.beta,
            p.bandwidth, p.tx_power, p.noise_power, p.iota, p.kappa,
            self.entry_slot, self.eff_imit,
            self.cand_flat, self.cand_start, self.gain_flat,
            self.sim_flat, self.sim_start,
            self.w_off, self.nf,
            self.assignment, self.loads, self.cache,
            self.w_flat, self.b_flat,
            u_explore, u_choice,
            self._rewards, self._chosen,
            self._featbuf, self._q_sel, self._q_max,
            self._new_assign,
        )
        if diverged >= 0:
            raise learning.DivergenceError(
                f"Q update diverged for user {diverged} at slot {t}"
            )

        active = self.entry_slot <= t
        rewards = self._rewards
        m_imit = active & self.is_imitator
        m_non = active & ~self.is_imitator
        mean_imit = float(rewards[m_imit].mean()) if m_imit.any() else math.nan
        mean_non = float(rewards[m_non].mean()) if m_non.any() else math.nan
        loads = self.loads.copy()
        metrics = SlotMetrics(
            slot=t,
            mean_reward_imitator=mean_imit,
            mean_reward_non_imitator=mean_non,
            per_sbs_load=loads,
            load_std=float(np.std(loads)),
            jain_index=jain_index(loads),
        )
        self.metrics.append(metrics)
        self.reward_history.append(rewards.copy())
        self.assignment_history.append(self.assignment.copy())
        self.load_history.append(loads)
        self.slot += 1
        return metrics

    def run(self, num_slots):
        return [self.step() for _ in range(num_slots)]

    def weight_rows(self):
        """(user, action, weight_index, value) rows; the bias follows the
        weights of its action under weight_index = feature count."""
        for u in range(self.num_users):
            approx = self.approximator(u)
            nfu = int(self.nf[u])
            for a in range(approx.num_actions):
                for j in range(nfu):
                    yield u, a, j, float(approx.weights[a, j])
                yield u, a, nfu, float(approx.bias[a])
