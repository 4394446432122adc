"""Physical-layer math: channel gain, interference, congestion, throughput, reward.

The interference and congestion costs are linear in the co-cell load,
``I(n) = iota*(n-1)`` and ``c(n) = kappa*(n-1)``, which keeps the per-link
rate strictly decreasing in the load and exactly invertible (the load
estimator relies on both properties).
"""

import math
from dataclasses import dataclass

C_LIGHT = 2.99792458e8  # m/s


@dataclass
class RadioParams:
    """Radio and reward parameters shared by all users.

    Powers are in watts, bandwidth and carrier frequency in Hz; the noise
    density is in dBm/Hz. ``iota`` (W per interfering user) and ``kappa``
    (bit/s per co-cell user) must be positive so interference and congestion
    strictly increase with load. ``beta`` (bit/s per dissimilar association)
    weights the imitation penalty; beta = 0 turns imitation off.
    """

    bandwidth: float = 1e7
    carrier_freq: float = 9e8
    pathloss_exp: float = 2.0
    noise_density_dbm: float = -173.9
    tx_power: float = 0.1
    iota: float = 1e-13
    kappa: float = 1e5
    beta: float = 1e5

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")
        if self.pathloss_exp <= 0:
            raise ValueError("pathloss_exp must be positive")
        if self.tx_power < 0:
            raise ValueError("tx_power must be nonnegative")
        if self.iota <= 0:
            raise ValueError("iota must be positive (interference strictly increasing)")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive (congestion strictly increasing)")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    @property
    def wavelength(self):
        return C_LIGHT / self.carrier_freq

    @property
    def ref_gain(self):
        """Free-space power gain at 1 m, (wavelength / 4 pi)^2."""
        return (self.wavelength / (4.0 * math.pi)) ** 2

    @property
    def noise_power(self):
        """Thermal noise power over the full bandwidth, watts."""
        return 10.0 ** ((self.noise_density_dbm - 30.0) / 10.0) * self.bandwidth


@dataclass
class LinkState:
    """Deterministic user-SBS link: distance and resulting power gain."""

    gain_h: float
    distance: float

    def __post_init__(self):
        if self.gain_h <= 0:
            raise ValueError("gain_h must be positive")
        if self.distance <= 0:
            raise ValueError("distance must be positive")


def channel_gain(distance, params):
    """Power gain of a link: free-space gain at 1 m times distance^(-eta)."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return params.ref_gain * distance ** (-params.pathloss_exp)


def link_state(distance, params):
    return LinkState(gain_h=channel_gain(distance, params), distance=distance)


def interference(load_n, params):
    """Uplink interference seen with ``load_n`` users on the cell (watts)."""
    if load_n < 1:
        raise ValueError("load_n counts the user itself and must be >= 1")
    return params.iota * (load_n - 1)


def congestion_cost(load_n, params):
    """Throughput drop from sharing the cell with ``load_n - 1`` others (bit/s)."""
    if load_n < 1:
        raise ValueError("load_n counts the user itself and must be >= 1")
    return params.kappa * (load_n - 1)


def _rate(gain_h, load_n, bandwidth, tx_power, noise_w, iota, kappa):
    # Shared scalar core; the compiled slot kernel mirrors this expression
    # op-for-op, so keep the evaluation order stable.
    interf = iota * (load_n - 1)
    sinr = tx_power * gain_h / (noise_w + interf)
    return bandwidth * math.log2(1.0 + sinr) - kappa * (load_n - 1)


def throughput(gain_h, load_n, params):
    """Achievable rate on a cell with ``load_n`` users total (bit/s).

    B*log2(1 + p*h / (sigma^2 + I(n))) - c(n); strictly decreasing in n.
    """
    if gain_h <= 0:
        raise ValueError("gain_h must be positive")
    if load_n < 1:
        raise ValueError("load_n must be >= 1")
    return _rate(
        gain_h,
        load_n,
        params.bandwidth,
        params.tx_power,
        params.noise_power,
        params.iota,
        params.kappa,
    )


def user_reward(user, chosen_sbs, assignment, loads, topology, params, gain_h,
                is_imitator):
    """Per-slot reward of one user given the post-move association state.

    Non-imitators earn the plain throughput. Imitators additionally pay
    ``beta`` for every similar user currently associated with a different
    SBS (the user itself never contributes).
    """
    cands = topology.candidate_sets[user]
    if chosen_sbs not in cands:
        raise ValueError(
            f"SBS {chosen_sbs} is not in the candidate set of user {user}"
        )
    thr = throughput(gain_h, int(loads[chosen_sbs]), params)
    if not is_imitator:
        return thr
    count = 0
    sim_row = topology.similarity[user]
    for v in range(len(assignment)):
        if v == user or not sim_row[v]:
            continue
        if assignment[v] >= 0 and assignment[v] != chosen_sbs:
            count += 1
    return thr - params.beta * count
