"""Flat key=value run configuration with documented defaults.

Lines are ``key = value``; ``#`` starts a comment; keys are case-sensitive
and unknown keys are rejected. Missing keys take the defaults below, which
reproduce the headline scenario: 700 users around 10 SBSs, path-loss
exponent 2, 900 MHz carrier, -173.9 dBm/Hz noise density, two 500-slot
phases with 100 imitator + 100 non-imitator entrants.
"""

from dataclasses import dataclass, fields

from . import learning, radio, topology


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration entry."""


def _parse_bool(text):
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise ValueError("expected true/false")


def _parse_seed_range(text):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise ValueError("expected a..b")
    lo, hi = int(lo), int(hi)
    if lo < 0 or hi < lo:
        raise ValueError("need 0 <= a <= b")
    return (lo, hi)


@dataclass
class SimConfig:
    users: int = 700
    sbs: int = 10
    area_side: float = 1000.0
    coverage_radius: float = None   # default area_side / 2
    link_radius: float = None       # default area_side / 2
    d_sim: float = None             # default area_side / 10
    bandwidth: float = 1e7
    carrier_freq: float = 9e8
    pathloss_exp: float = 2.0
    noise_density_dbm: float = -173.9
    tx_power: float = 0.1
    iota: float = 1e-13
    kappa: float = 1e5
    beta: float = 1e5
    learning_rate: float = 0.01
    alpha: float = 0.3
    gamma: float = 0.9
    epsilon: float = 0.1
    phase1_slots: int = 500
    phase2_slots: int = 500
    phase2_imitators: int = 100
    phase2_non_imitators: int = 100
    entrants: int = 200
    case_slots: int = 100
    mfg_horizon: int = 16
    mfg_damping: float = 0.5
    mfg_tol: float = 1e-8
    mfg_max_iters: int = 500
    seed: int = 42
    seeds: tuple = None
    smooth: int = 50
    out: str = "out"
    dump_weights: bool = False

    def validate(self):
        checks = [
            (self.users >= 1, "users must be >= 1"),
            (self.sbs >= 1, "sbs must be >= 1"),
            (self.area_side > 0, "area_side must be positive"),
            (self.coverage_radius is None or self.coverage_radius > 0,
             "coverage_radius must be positive"),
            (self.link_radius is None or self.link_radius >= 0,
             "link_radius must be nonnegative"),
            (self.d_sim is None or self.d_sim >= 0, "d_sim must be nonnegative"),
            (self.bandwidth > 0, "bandwidth must be positive"),
            (self.carrier_freq > 0, "carrier_freq must be positive"),
            (self.pathloss_exp > 0, "pathloss_exp must be positive"),
            (self.tx_power >= 0, "tx_power must be nonnegative"),
            (self.iota > 0, "iota must be positive"),
            (self.kappa > 0, "kappa must be positive"),
            (self.beta >= 0, "beta must be nonnegative"),
            (self.learning_rate > 0, "learning_rate must be positive"),
            (0.0 <= self.alpha <= 1.0, "alpha must lie in [0, 1]"),
            (0.0 <= self.gamma < 1.0, "gamma must lie in [0, 1)"),
            (0.0 <= self.epsilon <= 1.0, "epsilon must lie in [0, 1]"),
            (self.phase1_slots >= 1, "phase1_slots must be >= 1"),
            (self.phase2_slots >= 0, "phase2_slots must be >= 0"),
            (self.phase2_imitators >= 0, "phase2_imitators must be >= 0"),
            (self.phase2_non_imitators >= 0, "phase2_non_imitators must be >= 0"),
            (self.entrants >= 0, "entrants must be >= 0"),
            (self.case_slots >= 1, "case_slots must be >= 1"),
            (self.mfg_horizon >= 1, "mfg_horizon must be >= 1"),
            (0.0 < self.mfg_damping <= 1.0, "mfg_damping must lie in (0, 1]"),
            (self.mfg_tol > 0, "mfg_tol must be positive"),
            (self.mfg_max_iters >= 1, "mfg_max_iters must be >= 1"),
            (self.seed >= 0, "seed must be nonnegative"),
            (self.smooth >= 1, "smooth must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    # derived pieces

    @property
    def phase1_users(self):
        return self.users - self.phase2_imitators - self.phase2_non_imitators

    @property
    def warmup_users(self):
        return self.users - self.entrants

    def radio_params(self):
        return radio.RadioParams(
            bandwidth=self.bandwidth,
            carrier_freq=self.carrier_freq,
            pathloss_exp=self.pathloss_exp,
            noise_density_dbm=self.noise_density_dbm,
            tx_power=self.tx_power,
            iota=self.iota,
            kappa=self.kappa,
            beta=self.beta,
        )

    def learn_params(self):
        return learning.LearnParams(
            learning_rate=self.learning_rate,
            ema_alpha=self.alpha,
            discount=self.gamma,
            epsilon=self.epsilon,
        )

    def build_topology(self, seed):
        return topology.place_uniform(
            self.users, self.sbs, self.area_side, seed,
            coverage_radius=self.coverage_radius,
            link_radius=self.link_radius,
            d_sim=self.d_sim,
        )


_INT_KEYS = {
    "users", "sbs", "phase1_slots", "phase2_slots", "phase2_imitators",
    "phase2_non_imitators", "entrants", "case_slots", "mfg_horizon",
    "mfg_max_iters", "seed", "smooth",
}
_PARSERS = {}
for f in fields(SimConfig):
    if f.name == "seeds":
        _PARSERS[f.name] = _parse_seed_range
    elif f.name == "out":
        _PARSERS[f.name] = str
    elif f.name == "dump_weights":
        _PARSERS[f.name] = _parse_bool
    elif f.name in _INT_KEYS:
        _PARSERS[f.name] = int
    else:
        _PARSERS[f.name] = float


def parse_config(path):
    """Read, type-check and range-check a config file; missing keys default."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip()
            val = val.strip()
            if key not in _PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _PARSERS[key](val)
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}: {exc}"
                ) from exc
    cfg = SimConfig(**values)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
