"""Compare the compiled slot kernel against the pure-Python fallback.

Runs the same scenario with both kernels, checks the trajectories are
bit-identical, and reports wall time per slot plus the speedup.

    python benchmarks/bench_kernel.py [--users 150] [--sbs 8] [--slots 200]
"""

import argparse
import time

import numpy as np

from cellassoc import HAVE_COMPILED_KERNEL, SimConfig
from cellassoc.sim import Cohort, build_world


def run(cfg, kernel, slots):
    cohorts = [
        Cohort("warm", False, 0, cfg.users - cfg.entrants),
        Cohort("entrants", True, slots // 2, cfg.entrants),
    ]
    world = build_world(cfg, cohorts, kernel=kernel)
    start = time.perf_counter()
    world.run(slots)
    elapsed = time.perf_counter() - start
    return world, elapsed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--users", type=int, default=150)
    ap.add_argument("--sbs", type=int, default=8)
    ap.add_argument("--slots", type=int, default=200)
    ap.add_argument("--entrants", type=int, default=50)
    args = ap.parse_args()

    cfg = SimConfig(users=args.users, sbs=args.sbs, entrants=args.entrants).validate()

    if not HAVE_COMPILED_KERNEL:
        print("compiled kernel not available; build the extension first "
              "(pip install -e . --no-build-isolation)")
        return

    world_c, t_c = run(cfg, "compiled", args.slots)
    world_p, t_p = run(cfg, "python", args.slots)

    same = (
        np.array_equal(np.stack(world_c.assignment_history),
                       np.stack(world_p.assignment_history))
        and np.array_equal(np.stack(world_c.reward_history),
                           np.stack(world_p.reward_history), equal_nan=True)
        and np.array_equal(world_c.w_flat, world_p.w_flat)
    )

    agent_steps = args.users * args.slots
    print(f"scenario: {args.users} users, {args.sbs} SBSs, {args.slots} slots")
    print(f"trajectories bit-identical: {same}")
    print(f"compiled: {t_c:8.3f} s total  {t_c / args.slots * 1e3:8.3f} ms/slot  "
          f"{t_c / agent_steps * 1e6:8.2f} us/agent-step")
    print(f"python:   {t_p:8.3f} s total  {t_p / args.slots * 1e3:8.3f} ms/slot  "
          f"{t_p / agent_steps * 1e6:8.2f} us/agent-step")
    print(f"speedup:  {t_p / t_c:.1f}x")


if __name__ == "__main__":
    main()
