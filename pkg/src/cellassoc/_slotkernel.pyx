# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot kernel: one synchronized decide/move/reward/learn slot.

Line-for-line mirror of ``_slotkernel_py.step_slot`` (same phases, same
floating-point operation order); both call into libm, so trajectories are
bit-identical. Keep the two files in sync.
"""

from libc.math cimport log2, isfinite, NAN, INFINITY


cdef inline double _rate(double g, double n, double bw, double txp,
                         double noise_w, double iota, double kappa) noexcept nogil:
    cdef double interf = iota * (n - 1.0)
    cdef double sinr = txp * g / (noise_w + interf)
    return bw * log2(1.0 + sinr) - kappa * (n - 1.0)


cdef inline long _bisect_load(double observed, double g, long nmax, double bw,
                              double txp, double noise_w, double iota,
                              double kappa) noexcept nogil:
    cdef long lo, hi, mid
    cdef double r_lo, r_hi
    if observed >= _rate(g, 1.0, bw, txp, noise_w, iota, kappa):
        return 1
    if observed <= _rate(g, <double>nmax, bw, txp, noise_w, iota, kappa):
        return nmax
    lo = 1
    hi = nmax
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if _rate(g, <double>mid, bw, txp, noise_w, iota, kappa) >= observed:
            lo = mid
        else:
            hi = mid
    r_lo = _rate(g, <double>lo, bw, txp, noise_w, iota, kappa)
    r_hi = _rate(g, <double>hi, bw, txp, noise_w, iota, kappa)
    if (r_lo - observed) <= (observed - r_hi):
        return lo
    return hi


def step_slot(long t, long n_active, long total_users,
              double eps, double lam, double alpha, double gamma, double beta,
              double bw, double txp, double noise_w, double iota, double kappa,
              int[::1] entry_slot, unsigned char[::1] eff_imit,
              int[::1] cand_flat, int[::1] cand_start, double[::1] gain_flat,
              int[::1] sim_flat, int[::1] sim_start,
              long long[::1] w_off, int[::1] nf,
              int[::1] assignment, int[::1] loads, int[::1] cache,
              double[::1] w_flat, double[::1] b_flat,
              double[::1] u_explore, double[::1] u_choice,
              double[::1] rewards, int[::1] chosen,
              double[:, ::1] featbuf, double[::1] q_sel, double[::1] q_max,
              int[::1] new_assign):
    cdef long U = assignment.shape[0]
    cdef long S = loads.shape[0]
    cdef long u, k, j, a, vi, v, best, c0, nc, nfu, denom, cnt, s_new, sv
    cdef long long woff
    cdef double acc, best_q, qv, g, thr, r, y, err

    # phase A: observe and select against the frozen slot-start state
    for u in range(U):
        if entry_slot[u] > t:
            new_assign[u] = assignment[u]
            rewards[u] = NAN
            chosen[u] = -1
            continue
        c0 = cand_start[u]
        nc = cand_start[u + 1] - c0
        nfu = nf[u]
        for k in range(nc):
            featbuf[u, k] = (<double>cache[c0 + k]) / (<double>n_active)
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
                    featbuf[u, 2 * nc + k] = featbuf[u, 2 * nc + k] / (<double>denom)

        best = 0
        best_q = -INFINITY
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
            a = <long>(u_choice[u] * nc)
            if a >= nc:
                a = nc - 1
        else:
            a = best
        acc = 0.0
        woff = w_off[u] + a * nfu
        for j in range(nfu):
            acc += w_flat[woff + j] * featbuf[u, j]
        chosen[u] = <int>a
        q_sel[u] = acc + b_flat[c0 + a]
        q_max[u] = best_q
        new_assign[u] = cand_flat[c0 + a]

    # phase B: simultaneous moves
    for j in range(S):
        loads[j] = 0
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
        thr = _rate(g, <double>loads[s_new], bw, txp, noise_w, iota, kappa)
        r = thr
        if eff_imit[u]:
            cnt = 0
            for vi in range(sim_start[u], sim_start[u + 1]):
                v = sim_flat[vi]
                if entry_slot[v] <= t and new_assign[v] != s_new:
                    cnt += 1
            r = thr - beta * (<double>cnt)
        rewards[u] = r
        cache[c0 + a] = <int>_bisect_load(thr, g, total_users, bw, txp,
                                          noise_w, iota, kappa)
        y = (1.0 - alpha) * q_sel[u] + alpha * (r + gamma * q_max[u])
        err = lam * (y - q_sel[u])
        if not isfinite(err):
            return u
        nfu = nf[u]
        woff = w_off[u] + a * nfu
        for j in range(nfu):
            w_flat[woff + j] += err * featbuf[u, j]
        b_flat[c0 + a] += err
        if not isfinite(b_flat[c0 + a]):
            return u

    # phase D: commit
    for u in range(U):
        assignment[u] = new_assign[u]
    return -1
