"""Command-line entry point: two-phase, load-balance, mfg-solve.

Outputs are plain CSV with fixed column order, LF line endings and
full-precision (shortest round-trip) floats, so identical config + seed
reproduces byte-identical files. Exit codes: 0 success, 1 config or I/O
error, 2 non-convergence or divergence.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import mfg, sim
from .config import ConfigError, SimConfig, parse_config
from .learning import DivergenceError

COHORT_ORDER = ("imitator", "non_imitator")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _write_rows(path, header, rows):
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_metrics_csv(path, metrics):
    rows = []
    for m in metrics:
        rows.append([m.slot, "imitator", float(m.mean_reward_imitator),
                     float(m.load_std), float(m.jain_index)])
        rows.append([m.slot, "non_imitator", float(m.mean_reward_non_imitator),
                     float(m.load_std), float(m.jain_index)])
    _write_rows(path, ["slot", "cohort", "mean_reward", "load_std", "jain_index"], rows)


def write_loads_csv(path, metrics, num_sbs):
    header = ["slot"] + [f"load_{s}" for s in range(num_sbs)]
    rows = [[m.slot] + [int(x) for x in m.per_sbs_load] for m in metrics]
    _write_rows(path, header, rows)


def write_summary_csv(path, metrics, window):
    header = ["cohort", "convergence_slot", "final_mean_reward",
              "final_load_std", "final_jain_index"]
    load_std = np.array([m.load_std for m in metrics])
    jain = np.array([m.jain_index for m in metrics])
    tail = min(100, len(metrics)) or 1
    rows = []
    for cohort in COHORT_ORDER:
        series = sim.cohort_series(metrics, cohort == "imitator")
        active = np.flatnonzero(~np.isnan(series))
        if len(active) == 0:
            rows.append([cohort, None, math.nan, math.nan, math.nan])
            continue
        start = int(active[0])
        sub = series[start:]
        settle = sim.settle_slot(sub, window=window)
        rows.append([
            cohort,
            None if settle is None else start + settle,
            float(sub[-min(100, len(sub)):].mean()),
            float(load_std[-tail:].mean()),
            float(jain[-tail:].mean()),
        ])
    _write_rows(path, header, rows)


def write_weights_csv(path, world):
    _write_rows(path, ["user", "action", "weight_index", "value"], world.weight_rows())


def write_trajectory_csv(path, state):
    S = state.pi.shape[1]
    header = ["t"] + [f"pi_{s}" for s in range(S)] + [f"V_{s}" for s in range(S)]
    rows = []
    for t in range(state.horizon_T):
        rows.append([t] + [float(x) for x in state.pi[t]] + [float(x) for x in state.V[t]])
    _write_rows(path, header, rows)


def _standard_outputs(outdir, metrics, num_sbs, window, suffix, world=None,
                      dump_weights=False):
    write_metrics_csv(os.path.join(outdir, f"metrics{suffix}.csv"), metrics)
    write_loads_csv(os.path.join(outdir, f"loads{suffix}.csv"), metrics, num_sbs)
    write_summary_csv(os.path.join(outdir, f"summary{suffix}.csv"), metrics, window)
    if dump_weights and world is not None:
        write_weights_csv(os.path.join(outdir, f"weights{suffix}.csv"), world)


def _cmd_two_phase(cfg, outdir, seed, suffix):
    result = sim.run_two_phase(cfg, seed=seed)
    _standard_outputs(outdir, result.metrics, cfg.sbs, cfg.smooth, suffix,
                      world=result.world, dump_weights=cfg.dump_weights)
    return 0


def _cmd_load_balance(cfg, outdir, seed, suffix):
    result = sim.run_load_balance_cases(cfg, seed=seed)
    compare_rows = []
    for name in COHORT_ORDER:
        case = result.cases[name]
        casedir = os.path.join(outdir, f"case_{name}")
        os.makedirs(casedir, exist_ok=True)
        _standard_outputs(casedir, case.metrics, cfg.sbs, cfg.smooth, suffix,
                          world=case.world, dump_weights=cfg.dump_weights)
        for s in range(cfg.sbs):
            compare_rows.append([name, s, float(case.avg_loads[s]),
                                 float(case.load_std), float(case.jain_index)])
    _write_rows(
        os.path.join(outdir, f"load_balance{suffix}.csv"),
        ["case", "sbs", "avg_load", "load_std", "jain_index"],
        compare_rows,
    )
    return 0


def _cmd_mfg_solve(cfg, outdir, seed, suffix):
    topo_ss, _ = np.random.SeedSequence(seed).spawn(2)
    topo = cfg.build_topology(topo_ss)
    pi0 = np.full(cfg.sbs, 1.0 / cfg.sbs)
    state = mfg.solve_mfg(
        topo, cfg.radio_params(), pi0, cfg.mfg_horizon,
        max_iters=cfg.mfg_max_iters, damping=cfg.mfg_damping, tol=cfg.mfg_tol,
    )
    write_trajectory_csv(os.path.join(outdir, f"trajectory{suffix}.csv"), state)
    # keep the standard trio present with stable schemas
    _standard_outputs(outdir, [], cfg.sbs, cfg.smooth, suffix)
    if not state.converged:
        print(
            f"mfg-solve did not converge after {state.iterations} iterations "
            f"(residual {state.residual:.3e})",
            file=sys.stderr,
        )
        return 2
    return 0


_COMMANDS = {
    "two-phase": _cmd_two_phase,
    "load-balance": _cmd_load_balance,
    "mfg-solve": _cmd_mfg_solve,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cellassoc",
        description="imitation-based user-cell association experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="path to a key = value config file")
        sp.add_argument("--out", help="output directory (default from config)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--smooth", type=int, help="summary moving-average window")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config) if args.config else SimConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        if args.smooth is not None:
            cfg.smooth = args.smooth
        if args.out is not None:
            cfg.out = args.out
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 1

    if cfg.seeds is not None:
        lo, hi = cfg.seeds
        runs = [(s, f".seed{s}") for s in range(lo, hi + 1)]
    else:
        runs = [(cfg.seed, "")]

    code = 0
    for seed, suffix in runs:
        try:
            code = max(code, _COMMANDS[args.command](cfg, cfg.out, seed, suffix))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        except DivergenceError as exc:
            print(f"divergence: {exc}", file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
