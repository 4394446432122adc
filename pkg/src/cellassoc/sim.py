"""Scenario drivers and metric analysis.

Two scripted experiments: a two-phase run (a warm-up cohort learns alone,
then imitator and non-imitator cohorts enter together) and the load-balance
case study (one warm-up, then 200 entrants that are imitators in case 1 and
non-imitators in case 2, compared over the post-entry window).

The case study branches by replay: both cases rebuild the same world from
the same seed and run the identical warm-up, which is bit-reproducible
because the per-slot RNG draw shape does not depend on cohort flags. The
warm-up trajectories therefore agree exactly and the cases diverge only
after the entrants activate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import World, jain_index


@dataclass
class Cohort:
    """A user group: declared type, activation slot, and headcount."""

    name: str
    is_imitator: bool
    entry_slot: int
    size: int


def build_world(cfg, cohorts, seed=None, kernel="auto"):
    """Place the full topology and assemble per-user cohort arrays.

    One master seed feeds two spawned streams: user/SBS placement and the
    per-slot simulation draws.
    """
    total = sum(c.size for c in cohorts)
    if total != cfg.users:
        raise ValueError(f"cohort sizes sum to {total}, config says {cfg.users} users")
    seed = cfg.seed if seed is None else seed
    topo_ss, sim_ss = np.random.SeedSequence(seed).spawn(2)
    topo = cfg.build_topology(topo_ss)
    entry = np.concatenate([np.full(c.size, c.entry_slot, dtype=int) for c in cohorts])
    imit = np.concatenate([np.full(c.size, c.is_imitator, dtype=bool) for c in cohorts])
    return World(
        topo, cfg.radio_params(), cfg.learn_params(), entry, imit,
        np.random.default_rng(sim_ss), kernel,
    )


@dataclass
class TwoPhaseResult:
    config: object
    seed: int
    cohorts: list
    world: World
    metrics: list = field(default_factory=list)

    @property
    def rewards(self):
        return np.stack(self.world.reward_history)

    @property
    def assignments(self):
        return np.stack(self.world.assignment_history)

    @property
    def loads(self):
        return np.stack(self.world.load_history)


def run_two_phase(cfg, seed=None, kernel="auto"):
    """Warm-up cohort from slot 0, entrant cohorts from slot phase1_slots."""
    if cfg.phase1_users < 1:
        from .config import ConfigError
        raise ConfigError("phase-2 entrants must leave at least one phase-1 user")
    cohorts = [
        Cohort("phase1_non_imitator", False, 0, cfg.phase1_users),
        Cohort("phase2_imitator", True, cfg.phase1_slots, cfg.phase2_imitators),
        Cohort("phase2_non_imitator", False, cfg.phase1_slots, cfg.phase2_non_imitators),
    ]
    cohorts = [c for c in cohorts if c.size > 0]
    world = build_world(cfg, cohorts, seed, kernel)
    metrics = world.run(cfg.phase1_slots + cfg.phase2_slots)
    return TwoPhaseResult(
        config=cfg, seed=cfg.seed if seed is None else seed,
        cohorts=cohorts, world=world, metrics=metrics,
    )


@dataclass
class CaseResult:
    name: str
    world: World
    metrics: list
    avg_loads: np.ndarray
    load_std: float
    jain_index: float


@dataclass
class LoadBalanceResult:
    config: object
    seed: int
    warmup_slots: int
    cases: dict


def run_load_balance_cases(cfg, seed=None, kernel="auto"):
    """Shared warm-up, then imitator entrants (case 1) vs non-imitator (case 2).

    Per case, the post-entry window of ``case_slots`` slots is summarized by
    the per-SBS load averaged over the window plus the window means of the
    per-slot load standard deviation and Jain index.
    """
    if cfg.warmup_users < 1:
        from .config import ConfigError
        raise ConfigError("entrants must leave at least one warm-up user")
    cases = {}
    for name, flag in (("imitator", True), ("non_imitator", False)):
        cohorts = [
            Cohort("warmup_non_imitator", False, 0, cfg.warmup_users),
            Cohort("entrants", flag, cfg.phase1_slots, cfg.entrants),
        ]
        cohorts = [c for c in cohorts if c.size > 0]
        world = build_world(cfg, cohorts, seed, kernel)
        metrics = world.run(cfg.phase1_slots + cfg.case_slots)
        post = np.stack(world.load_history[cfg.phase1_slots:])
        cases[name] = CaseResult(
            name=name,
            world=world,
            metrics=metrics,
            avg_loads=post.mean(axis=0),
            load_std=float(np.mean([np.std(row) for row in post])),
            jain_index=float(np.mean([jain_index(row) for row in post])),
        )
    return LoadBalanceResult(
        config=cfg, seed=cfg.seed if seed is None else seed,
        warmup_slots=cfg.phase1_slots, cases=cases,
    )


# analysis helpers


def cohort_series(metrics, imitator):
    """Per-slot mean-reward series of one cohort (NaN while empty)."""
    attr = "mean_reward_imitator" if imitator else "mean_reward_non_imitator"
    return np.array([getattr(m, attr) for m in metrics])


def moving_average(series, window):
    """Trailing moving average; NaN until the window is full."""
    series = np.asarray(series, dtype=float)
    out = np.full(len(series), math.nan)
    if window <= 0 or len(series) < window:
        return out
    csum = np.cumsum(series)
    out[window - 1] = csum[window - 1] / window
    out[window:] = (csum[window:] - csum[:-window]) / window
    return out


def settle_slot(series, window=50, final_window=100, frac=0.95):
    """First index where the trailing MA reaches ``frac`` of the final level.

    The final level is the raw mean over the last ``final_window`` entries.
    Returns None when the moving average never gets there.
    """
    series = np.asarray(series, dtype=float)
    if len(series) == 0:
        return None
    final = series[-min(final_window, len(series)):].mean()
    ma = moving_average(series, window)
    hits = np.flatnonzero(ma >= frac * final)
    return int(hits[0]) if len(hits) else None


def detect_cycle(assignment_history, window=50):
    """Smallest period of the association pattern over the last ``window``
    slots, or None if it does not settle into one (diagnostic only)."""
    hist = np.asarray(assignment_history)
    if len(hist) < window:
        return None
    tail = hist[-window:]
    for period in range(1, window // 2 + 1):
        if np.array_equal(tail[period:], tail[:-period]):
            return period
    return None
