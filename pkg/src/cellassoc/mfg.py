"""Discrete-time mean-field game on the SBS graph.

The population is a distribution pi(t) over SBSs. Users at SBS s act through
a row-stochastic row P_s(t) supported on the closed neighborhood of s; the
population flows by pi(t+1) = P(t)^T pi(t). Values satisfy the backward
dynamic-programming recursion with terminal V(T-1) = 0, and an equilibrium
transition matrix is one from which no state's users can improve their
average reward by unilaterally replacing their row.

The per-edge reward is the population-level link rate: the rate formula
evaluated at load max(1, round(U * pi_j)) with the mean channel gain of the
users covering SBS j, so it depends on the target state j and pi only. That
makes the row objective linear in the row, the maximum is attained at a
vertex, and the backward pass reduces to per-row argmax sweeps.

Exact ties in a row's argmax keep the row's own state (inertia); remaining
ties break to the lowest index. Without inertia a symmetric instance would
oscillate instead of sitting at its uniform fixed point.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import radio

ROW_SUM_TOL = 1e-9
MAX_SWEEPS = 100


@dataclass
class MeanFieldState:
    """Solution trajectory: pi (T x S), P ((T-1) x S x S), V (T x S)."""

    pi: np.ndarray
    P: np.ndarray
    V: np.ndarray
    horizon_T: int
    converged: bool = True
    iterations: int = 0
    residual: float = 0.0


class MfReward:
    """Edge-reward rule r_sj(pi) for a fixed topology, population and radio.

    Precomputes the mean gain of the users covering each SBS (falling back
    to the all-user mean when nobody covers it) and the closed neighborhoods
    that constrain row supports.
    """

    def __init__(self, topology, params, total_users=None):
        self.params = params
        self.total_users = total_users if total_users is not None else topology.num_users
        S = topology.num_sbs
        self.num_sbs = S
        self.closed = [topology.closed_neighbors(s) for s in range(S)]
        gains = np.zeros((topology.num_users, S))
        for u in range(topology.num_users):
            for s in range(S):
                gains[u, s] = radio.channel_gain(topology.user_sbs_distance(u, s), params)
        mean_gain = np.zeros(S)
        for s in range(S):
            covering = [u for u in range(topology.num_users)
                        if s in topology.candidate_sets[u]]
            if covering:
                mean_gain[s] = gains[covering, s].mean()
            else:
                mean_gain[s] = gains[:, s].mean()
        self.mean_gain = mean_gain

    def load_at(self, pi_j):
        # max(1, round(U * pi_j)), rounding half up for a deterministic tie rule
        return max(1, int(math.floor(self.total_users * pi_j + 0.5)))

    def edge_reward(self, pi, s, j):
        if j not in self.closed[s]:
            raise ValueError(f"SBS {j} is not in the closed neighborhood of {s}")
        return radio.throughput(self.mean_gain[j], self.load_at(pi[j]), self.params)

    def reward_vector(self, pi):
        """r_j(pi) for every target SBS j (independent of the source row)."""
        return np.array(
            [radio.throughput(self.mean_gain[j], self.load_at(pi[j]), self.params)
             for j in range(self.num_sbs)]
        )


def _check_simplex(pi):
    pi = np.asarray(pi, dtype=float)
    if (pi < 0).any():
        raise ValueError("distribution has negative entries")
    if abs(pi.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError(f"distribution sums to {pi.sum()!r}, not 1")
    return pi


def _check_rows(P):
    P = np.asarray(P, dtype=float)
    if (P < 0).any():
        raise ValueError("transition matrix has negative entries")
    bad = np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOL
    if bad.any():
        raise ValueError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
    return P


def forward_step(pi, P):
    """Population flow: pi_j(t+1) = sum_s P_sj * pi_s(t)."""
    pi = _check_simplex(pi)
    P = _check_rows(P)
    return P.T @ pi


def mf_edge_reward(reward, pi, s, j):
    """Population-level rate earned by users moving from SBS s to SBS j."""
    return reward.edge_reward(pi, s, j)


def average_reward(reward, pi, P, V, s):
    """e_s(pi, P, V) = sum_j P_sj * (r_j(pi) + V_j) over the row's support."""
    r = reward.reward_vector(pi)
    acc = 0.0
    for j in reward.closed[s]:
        acc += P[s, j] * (r[j] + V[j])
    return acc


def _argmax_row(reward, scores, s):
    closed = reward.closed[s]
    best = max(scores[j] for j in closed)
    if scores[s] == best:
        return s
    for j in closed:
        if scores[j] == best:
            return j
    raise AssertionError("unreachable")


def best_response_row(reward, pi, P, V, s):
    """Vertex row maximizing sum_j q_j * (r_j(pi) + V_j) over the support.

    The objective is linear in q (the reward does not depend on the row), so
    a vertex always attains the maximum; ``P`` is accepted for interface
    symmetry but cannot influence the result.
    """
    r = reward.reward_vector(pi)
    scores = r + np.asarray(V, dtype=float)
    j = _argmax_row(reward, scores, s)
    q = np.zeros(reward.num_sbs)
    q[j] = 1.0
    return q


def nash_check(reward, pi, P, V, tol):
    """True iff no row can gain more than ``tol`` by a unilateral change.

    By linearity it suffices to test vertex deviations: for every s and every
    j in the closed neighborhood, e_s(pi, P, V) >= r_j + V_j - tol.
    """
    r = reward.reward_vector(pi)
    scores = r + np.asarray(V, dtype=float)
    for s in range(reward.num_sbs):
        e_s = average_reward(reward, pi, P, V, s)
        best = max(scores[j] for j in reward.closed[s])
        if e_s < best - tol:
            return False
    return True


def _backward_pass(reward, pi_traj, T):
    """Best-response sweeps per slot, backward from the zero terminal value."""
    S = reward.num_sbs
    V = np.zeros((T, S))
    P = np.zeros((max(T - 1, 0), S, S))
    for t in range(T - 2, -1, -1):
        r = reward.reward_vector(pi_traj[t])
        scores = r + V[t + 1]
        rows = np.full(S, -1, dtype=int)
        for _ in range(MAX_SWEEPS):
            new_rows = np.array([_argmax_row(reward, scores, s) for s in range(S)])
            if np.array_equal(new_rows, rows):
                break
            rows = new_rows
        P[t] = 0.0
        for s in range(S):
            P[t, s, rows[s]] = 1.0
            V[t, s] = scores[rows[s]]
    return P, V


def _forward_traj(pi0, P, T):
    pi = np.zeros((T, len(pi0)))
    pi[0] = pi0
    for t in range(T - 1):
        pi[t + 1] = forward_step(pi[t], P[t])
    return pi


def solve_mfg(topology, params, pi0, horizon_T, max_iters=500, damping=0.5,
              tol=1e-8, total_users=None):
    """Fixed point of the backward best-response / forward flow alternation.

    Starting from a flat trajectory at pi0: back out (P, V) against the
    current trajectory, push pi0 forward through P, and move the trajectory
    a ``damping`` fraction toward the result; stop when the undamped forward
    trajectory agrees with the current one to within ``tol`` in max norm.
    On convergence a polish pass regenerates the trajectory exactly from the
    forward equation and re-derives (P, V), so the returned triple satisfies
    both the forward equation and the per-slot equilibrium check exactly.

    Non-convergence is reported in the result (``converged``/``residual``),
    never raised.
    """
    if horizon_T < 1:
        raise ValueError("horizon_T must be >= 1")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    pi0 = _check_simplex(pi0)
    S = len(pi0)
    reward = MfReward(topology, params, total_users)
    if reward.num_sbs != S:
        raise ValueError("pi0 length does not match the SBS count")

    if horizon_T == 1:
        return MeanFieldState(
            pi=pi0[None, :].copy(), P=np.zeros((0, S, S)), V=np.zeros((1, S)),
            horizon_T=1,
        )

    pi = np.tile(pi0, (horizon_T, 1))
    residual = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        P, V = _backward_pass(reward, pi, horizon_T)
        pi_new = _forward_traj(pi0, P, horizon_T)
        residual = float(np.abs(pi_new - pi).max())
        pi = (1.0 - damping) * pi + damping * pi_new
        if residual < tol:
            converged = True
            break

    if converged:
        # Snap to an exactly self-consistent triple; the edge rewards are
        # piecewise constant in pi, so P is stable under the tiny correction.
        converged = False
        for _ in range(10):
            P, V = _backward_pass(reward, pi, horizon_T)
            pi_exact = _forward_traj(pi0, P, horizon_T)
            P2, V2 = _backward_pass(reward, pi_exact, horizon_T)
            if np.array_equal(P2, P):
                pi, P, V = pi_exact, P2, V2
                converged = True
                break
            residual = float(np.abs(pi_exact - pi).max())
            pi = pi_exact

    return MeanFieldState(
        pi=pi, P=P, V=V, horizon_T=horizon_T,
        converged=converged, iterations=iterations, residual=residual,
    )
