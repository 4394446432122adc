"""Single-user decision layer: state-space bounds, load estimation, observations.

Each user sees the network only through its own reward. Because the rate is
strictly decreasing in the cell load and exactly invertible, a user recovers
the load of its current SBS by integer bisection on the observed rate; loads
of other candidate SBSs come from a stale per-user cache (last value seen
while visiting, zero before the first visit), which is what makes the
decision problem genuinely partially observed.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import radio

ENUMERATION_LIMIT = 1_000_000


class LoadEstimateError(ValueError):
    """Observed reward lies outside the feasible rate range."""


@dataclass
class AssociationState:
    """Global association state: per-SBS load counts and per-user SBS index.

    ``assignment[u] = -1`` marks a user that is not associated (inactive or
    not yet entered). Loads always equal the histogram of nonnegative
    assignments.
    """

    loads: np.ndarray
    assignment: np.ndarray

    @classmethod
    def from_assignment(cls, assignment, num_sbs):
        assignment = np.asarray(assignment, dtype=int)
        loads = np.bincount(assignment[assignment >= 0], minlength=num_sbs)
        return cls(loads=loads, assignment=assignment)

    def is_consistent(self):
        expect = np.bincount(
            self.assignment[self.assignment >= 0], minlength=len(self.loads)
        )
        return np.array_equal(expect, self.loads)


@dataclass
class Observation:
    """Per-user feature vector, all entries in [0, 1].

    Layout over the user's C candidates: C normalized estimated loads,
    C one-hot entries for the current SBS, and for imitators C more entries
    with the fraction of similar (associated) neighbors at each candidate.
    """

    features: np.ndarray

    def __post_init__(self):
        f = self.features
        if len(f) and (f.min() < 0.0 or f.max() > 1.0):
            raise ValueError("observation features must lie in [0, 1]")


def state_space_bound(b_u, caps_N, total_users):
    """The two binomial bounds on a user's load-state count.

    Returns (C(sum_{s<=b_u} N_s - b_u + 1, b_u - 1), C(U - b_u + 1, b_u - 1));
    the second dominates the first whenever sum(N_s) <= U.
    """
    caps_N = list(caps_N)
    if not 1 <= b_u <= len(caps_N):
        raise ValueError("b_u must be between 1 and len(caps_N)")
    if any(n < 0 for n in caps_N):
        raise ValueError("caps must be nonnegative")
    cap_sum = sum(caps_N[:b_u])
    top_tight = cap_sum - b_u + 1
    top_loose = total_users - b_u + 1
    if top_tight < 0 or top_loose < 0:
        raise ValueError("binomial top argument is negative")
    return math.comb(top_tight, b_u - 1), math.comb(top_loose, b_u - 1)


def enumerate_states(b_u, caps_N):
    """Exhaustively count load tuples (n_1..n_{b_u}) with 0 <= n_s <= N_s.

    Oracle for small instances only; refuses when the product of (N_s + 1)
    exceeds ENUMERATION_LIMIT.
    """
    caps_N = list(caps_N)
    if not 1 <= b_u <= len(caps_N):
        raise ValueError("b_u must be between 1 and len(caps_N)")
    caps_N = caps_N[:b_u]
    size = 1
    for n in caps_N:
        if n < 0:
            raise ValueError("caps must be nonnegative")
        size *= n + 1
        if size > ENUMERATION_LIMIT:
            raise ValueError(f"instance too large to enumerate (> {ENUMERATION_LIMIT})")
    count = 0
    for _ in itertools.product(*(range(n + 1) for n in caps_N)):
        count += 1
    return count


def _bisect_load(observed, gain_h, nmax, bandwidth, tx_power, noise_w, iota, kappa):
    # Integer bisection on the strictly decreasing rate r(n). The compiled
    # slot kernel mirrors this loop exactly; keep branches in sync.
    if observed >= radio._rate(gain_h, 1, bandwidth, tx_power, noise_w, iota, kappa):
        return 1
    if observed <= radio._rate(gain_h, nmax, bandwidth, tx_power, noise_w, iota, kappa):
        return nmax
    lo, hi = 1, nmax
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if radio._rate(gain_h, mid, bandwidth, tx_power, noise_w, iota, kappa) >= observed:
            lo = mid
        else:
            hi = mid
    r_lo = radio._rate(gain_h, lo, bandwidth, tx_power, noise_w, iota, kappa)
    r_hi = radio._rate(gain_h, hi, bandwidth, tx_power, noise_w, iota, kappa)
    return lo if (r_lo - observed) <= (observed - r_hi) else hi


def estimate_load(observed_reward, gain_h, params, max_users, tol=1e-6):
    """Invert an observed rate back to the integer cell load.

    Exact whenever the observation equals throughput(gain_h, n) for some
    integer n in [1, max_users]; raises LoadEstimateError when the value lies
    more than ``tol`` outside the feasible range [r(max_users), r(1)].

    Imitators must strip their (known) imitation penalty from the reward
    before calling; only the throughput component is monotone in the load.
    """
    if gain_h <= 0:
        raise ValueError("gain_h must be positive")
    if max_users < 1:
        raise ValueError("max_users must be >= 1")
    r_top = radio.throughput(gain_h, 1, params)
    r_bot = radio.throughput(gain_h, max_users, params)
    if observed_reward > r_top + tol:
        raise LoadEstimateError(
            f"observed reward {observed_reward!r} exceeds the single-user rate {r_top!r}"
        )
    if observed_reward < r_bot - tol:
        raise LoadEstimateError(
            f"observed reward {observed_reward!r} is below the full-load rate {r_bot!r}"
        )
    return _bisect_load(
        observed_reward,
        gain_h,
        max_users,
        params.bandwidth,
        params.tx_power,
        params.noise_power,
        params.iota,
        params.kappa,
    )


def build_observation(user, state, topology, cache, is_imitator, total_active):
    """Assemble one user's feature vector from the frozen slot-start state.

    ``cache`` holds the user's last load estimate per candidate SBS (its own
    current SBS entry is refreshed from the latest reward by the engine;
    unvisited SBSs stay 0). Features are normalized by the number of active
    users. Imitator features count similar, currently associated neighbors
    per candidate (self excluded); with no such neighbor they are all zero.
    """
    cands = topology.candidate_sets[user]
    nc = len(cands)
    n = 3 * nc if is_imitator else 2 * nc
    x = np.zeros(n, dtype=float)
    for k in range(nc):
        x[k] = cache[k] / total_active
    cur = state.assignment[user]
    for k in range(nc):
        if cur == cands[k]:
            x[nc + k] = 1.0
    if is_imitator:
        sim_row = topology.similarity[user]
        counts = [0] * nc
        denom = 0
        for v in range(len(state.assignment)):
            if v == user or not sim_row[v]:
                continue
            sv = state.assignment[v]
            if sv < 0:
                continue
            denom += 1
            for k in range(nc):
                if cands[k] == sv:
                    counts[k] += 1
                    break
        if denom > 0:
            for k in range(nc):
                x[2 * nc + k] = counts[k] / denom
    return Observation(features=x)
