"""Pure-Python slot kernel, the import-time fallback for the compiled one.

Same signature and the same floating-point operation order as
``_slotkernel.pyx``, so both produce bit-identical trajectories; see
tests/test_kernel_equivalence.py. Roughly two orders of magnitude slower
(``benchmarks/bench_kernel.py`` measures it).

One slot proceeds in four phases over users in ascending index order:
  A. build each active user's features from the frozen slot-start state,
     score actions, pick one (epsilon-greedy on pre-drawn uniforms);
  B. apply all moves simultaneously and recount loads;
  C. compute post-move rewards, refresh the own-SBS load estimate by
     bisection on the throughput component, and take one LMS step;
  D. commit the new assignment.
Returns -1, or the index of the first user whose update went non-finite.
"""

import math

from .mdp import _bisect_load
from .radio import _rate


def step_slot(t, n_active, total_users,
              eps, lam, alpha, gamma, beta,
              bw, txp, noise_w, iota, kappa,
              entry_slot, eff_imit,
              cand_flat, cand_start, gain_flat,
              sim_flat, sim_start,
              w_off, nf,
              assignment, loads, cache,
              w_flat, b_flat,
              u_explore, u_choice,
              rewards, chosen,
              featbuf, q_sel, q_max, new_assign):
    U = len(assignment)
    S = len(loads)

    # phase A: observe and select against the frozen slot-start state
    for u in range(U):
        if entry_slot[u] > t:
            new_assign[u] = assignment[u]
            rewards[u] = math.nan
            chosen[u] = -1
            continue
        c0 = cand_start[u]
        nc = cand_start[u + 1] - c0
        nfu = nf[u]
        for k in range(nc):
            featbuf[u, k] = cache[c0 + k] / n_active
        for k in range(nc):
            featbuf[u, nc + k] = 1.0 if assignment[u] == cand_flat[c0 + k] else 0.0
        if eff_imit[u]:
            for k in range(nc):
                featbuf[u, 2 * nc + k] = 0.0
            denom = 0
            for vi in range(sim_start[u], sim_start[u + 1]):
                sv = assignment[sim_flat[vi]]
                if sv < 0:
                    continue
                denom += 1
                for k in range(nc):
                    if cand_flat[c0 + k] == sv:
                        featbuf[u, 2 * nc + k] += 1.0
                        break
            if denom > 0:
                for k in range(nc):
                    featbuf[u, 2 * nc + k] = featbuf[u, 2 * nc + k] / denom

        best = 0
        best_q = -math.inf
        for a in range(nc):
            acc = 0.0
            woff = w_off[u] + a * nfu
            for j in range(nfu):
                acc += w_flat[woff + j] * featbuf[u, j]
            qv = acc + b_flat[c0 + a]
            if qv > best_q:
                best_q = qv
                best = a
        if u_explore[u] < eps:
            a = int(u_choice[u] * nc)
            if a >= nc:
                a = nc - 1
        else:
            a = best
        acc = 0.0
        woff = w_off[u] + a * nfu
        for j in range(nfu):
            acc += w_flat[woff + j] * featbuf[u, j]
        chosen[u] = a
        q_sel[u] = acc + b_flat[c0 + a]
        q_max[u] = best_q
        new_assign[u] = cand_flat[c0 + a]

    # phase B: simultaneous moves
    for s in range(S):
        loads[s] = 0
    for u in range(U):
        if new_assign[u] >= 0 and entry_slot[u] <= t:
            loads[new_assign[u]] += 1

    # phase C: post-move rewards, load estimate, one LMS step per user
    for u in range(U):
        if entry_slot[u] > t:
            continue
        a = chosen[u]
        c0 = cand_start[u]
        s_new = new_assign[u]
        g = gain_flat[c0 + a]
        thr = _rate(g, loads[s_new], bw, txp, noise_w, iota, kappa)
        r = thr
        if eff_imit[u]:
            cnt = 0
            for vi in range(sim_start[u], sim_start[u + 1]):
                v = sim_flat[vi]
                if entry_slot[v] <= t and new_assign[v] != s_new:
                    cnt += 1
            r = thr - beta * cnt
        rewards[u] = r
        cache[c0 + a] = _bisect_load(thr, g, total_users, bw, txp, noise_w, iota, kappa)
        y = (1.0 - alpha) * q_sel[u] + alpha * (r + gamma * q_max[u])
        err = lam * (y - q_sel[u])
        if not math.isfinite(err):
            return u
        nfu = nf[u]
        woff = w_off[u] + a * nfu
        for j in range(nfu):
            w_flat[woff + j] += err * featbuf[u, j]
        b_flat[c0 + a] += err
        if not math.isfinite(b_flat[c0 + a]):
            return u

    # phase D: commit
    for u in range(U):
        assignment[u] = new_assign[u]
    return -1
