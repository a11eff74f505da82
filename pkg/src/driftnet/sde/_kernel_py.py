"""Pure-Python stepper for the interacting-drift S.D.E.

This is the fallback backend and the reference the compiled kernel is tested
against: both consume the same bit-generator stream in the same order and
evaluate every floating-point expression identically, so paths agree bit for
bit. Keep any edit here in lockstep with _kernel.pyx.

Per step, alive coordinates receive dB_i - ((W psi) + eta)_i dt; psi is then
recomputed from K_{t^T} psi = X + (t^T) eta. Hits are detected either by the
sign of the endpoint (linear interpolation of the crossing) or, under the
bridge rule, with probability exp(-2 x_before x_after / h).
"""

import math

OK = 0
HIT_HORIZON = 1
NEAR_SINGULAR = 2
STEP_BUDGET = 3
RECORD_OVERFLOW = 4

HIT_BRIDGE = 0
HIT_LINEAR = 1

BRIDGE_EXP_CUTOFF = 50.0   # skip the uniform when exp(-q) < ~2e-22
INF = math.inf


def _lu_factor(a, piv, n):
    """Partial-pivot LU in place; returns (umax, umin, det_positive)."""
    neg = 0
    umax = 0.0
    umin = INF
    for k in range(n):
        p = k
        mx = abs(a[k][k])
        for r in range(k + 1, n):
            v = abs(a[r][k])
            if v > mx:
                mx = v
                p = r
        if mx == 0.0:
            return 0.0, 0.0, False
        if p != k:
            a[k], a[p] = a[p], a[k]
            neg += 1
        piv[k] = p
        ukk = a[k][k]
        au = abs(ukk)
        if au > umax:
            umax = au
        if au < umin:
            umin = au
        if ukk < 0.0:
            neg += 1
        for r in range(k + 1, n):
            m = a[r][k] / ukk
            a[r][k] = m
            row_r = a[r]
            row_k = a[k]
            for c in range(k + 1, n):
                row_r[c] -= m * row_k[c]
    return umax, umin, (neg % 2) == 0


def _lu_solve(a, piv, b, n):
    for k in range(n):
        p = piv[k]
        if p != k:
            b[k], b[p] = b[p], b[k]
        for r in range(k + 1, n):
            b[r] -= a[r][k] * b[k]
    for k in range(n - 1, -1, -1):
        s = b[k]
        for c in range(k + 1, n):
            s -= a[k][c] * b[c]
        b[k] = s / a[k][k]


def run_replica(W, theta, eta, dt, t_max, floor, growth, hit_rule, cond_limit,
                max_steps, rng, t_hit, psi_final,
                probes=None, probe_x=None, probe_psi=None, probe_qv=None,
                vprobes=None, vprobe_x=None,
                levels=None, level_t=None, level_x=None,
                rec_grid=None, rec_x=None, rec_psi=None, rec_db=None):
    """Simulate one replica. Returns (status, n_steps, record_length).

    Output buffers are filled in place; t_hit gets +inf for coordinates still
    alive on an abnormal exit.
    """
    n = len(theta)
    w = [[float(W[i][j]) for j in range(n)] for i in range(n)]
    th = [float(theta[i]) for i in range(n)]
    et = [float(eta[i]) for i in range(n)]
    wzero = all(w[i][j] == 0.0 for i in range(n) for j in range(n))

    x = th[:]
    psi = th[:]
    tcap = [0.0] * n
    alive = [True] * n
    n_alive = n
    for i in range(n):
        t_hit[i] = INF

    want_qv = probe_qv is not None
    qv = [[0.0] * n for _ in range(n)] if want_qv else None
    n_probes = len(probes) if probes is not None else 0
    pp = 0
    n_vp = len(vprobes) if vprobes is not None else 0
    vpp = [0] * n
    track_levels = levels is not None
    if track_levels:
        lev = [float(levels[i]) for i in range(n)]
        pend = [True] * n
        for i in range(n):
            level_t[i] = INF
            level_x[i] = 0.0
            if lev[i] >= th[i]:
                level_t[i] = 0.0
                level_x[i] = th[i]
                pend[i] = False
    recording = rec_grid is not None
    rec_cap = len(rec_grid) if recording else 0
    rec_len = 0
    if recording:
        if rec_cap < 1:
            return RECORD_OVERFLOW, 0, 0
        rec_grid[0] = 0.0
        for i in range(n):
            rec_x[0][i] = x[i]
            rec_psi[0][i] = psi[i]
            rec_db[0][i] = 0.0
        rec_len = 1

    # probes at time zero (state is the initial condition)
    while pp < n_probes and probes[pp] <= 0.0:
        for i in range(n):
            probe_x[pp][i] = x[i]
            probe_psi[pp][i] = psi[i]
            if want_qv:
                for j in range(n):
                    probe_qv[pp][i][j] = 0.0
        pp += 1
    for i in range(n):
        while vpp[i] < n_vp and vprobes[vpp[i]][i] <= 0.0:
            vprobe_x[vpp[i]][i] = x[i]
            vpp[i] += 1

    t = 0.0
    steps = 0
    z = [0.0] * n
    drift = [0.0] * n
    dbrow = [0.0] * n
    amat = [[0.0] * n for _ in range(n)]
    rhs = [0.0] * n
    piv = [0] * n
    status = OK

    while n_alive > 0:
        if steps >= max_steps:
            status = STEP_BUDGET
            break

        h = dt
        if wzero and growth > 0.0:
            g = growth * t
            if g > h:
                h = g
        for i in range(n):
            if alive[i] and x[i] < floor:
                h *= 0.25   # single shrink level while below the floor
                break

        # clamp the step end to the earliest pending event
        target = t + h
        tag = 0
        if t_max < target:
            target = t_max
            tag = 1
        if pp < n_probes and probes[pp] < target:
            target = probes[pp]
            tag = 2
        for i in range(n):
            if vpp[i] < n_vp:
                vt = vprobes[vpp[i]][i]
                if vt < target:
                    target = vt
                    tag = 3
        if tag != 0:
            h = target - t
        if h <= 0.0:
            status = HIT_HORIZON
            break

        for i in range(n):
            if alive[i]:
                z[i] = rng.standard_normal()
        sh = math.sqrt(h)
        for i in range(n):
            if alive[i]:
                d = et[i]
                if not wzero:
                    wi = w[i]
                    for j in range(n):
                        d += wi[j] * psi[j]
                drift[i] = d

        for i in range(n):
            if not alive[i]:
                dbrow[i] = 0.0
                continue
            xo = x[i]
            db = sh * z[i]
            dbrow[i] = db
            xn = xo + db - drift[i] * h
            hit = False
            tau = 0.0
            if xn <= 0.0:
                tau = t + h * (xo / (xo - xn))
                hit = True
            elif hit_rule == HIT_BRIDGE:
                q = 2.0 * xo * xn / h
                if q <= BRIDGE_EXP_CUTOFF:
                    u = rng.random()
                    if u < math.exp(-q):
                        tau = t + h * (xo / (xo + xn))
                        hit = True
            if track_levels and pend[i]:
                li = lev[i]
                if hit:
                    if xn < li:
                        tl = t + h * ((xo - li) / (xo - xn))
                        if tl > tau:
                            tl = tau
                        level_t[i] = tl
                    else:
                        level_t[i] = tau   # crossed inside the hidden dip
                    level_x[i] = li
                    pend[i] = False
                elif xn <= li:
                    level_t[i] = t + h * ((xo - li) / (xo - xn))
                    level_x[i] = li
                    pend[i] = False
            if hit:
                t_hit[i] = tau
                tcap[i] = tau
                x[i] = 0.0
                alive[i] = False
                n_alive -= 1
            else:
                x[i] = xn

        t = target if tag != 0 else t + h
        for i in range(n):
            if alive[i]:
                tcap[i] = t
        steps += 1

        if wzero:
            for i in range(n):
                p_new = x[i] + tcap[i] * et[i]
                if want_qv:
                    z[i] = p_new - psi[i]   # reuse z as dpsi scratch
                psi[i] = p_new
        else:
            for i in range(n):
                ti = tcap[i]
                ai = amat[i]
                wi = w[i]
                for j in range(n):
                    ai[j] = -ti * wi[j]
                ai[i] += 1.0
                rhs[i] = x[i] + ti * et[i]
            umax, umin, det_pos = _lu_factor(amat, piv, n)
            if not det_pos or umax > cond_limit * umin:
                status = NEAR_SINGULAR
                break
            _lu_solve(amat, piv, rhs, n)
            for i in range(n):
                if want_qv:
                    z[i] = rhs[i] - psi[i]
                psi[i] = rhs[i]
        if want_qv:
            for i in range(n):
                zi = z[i]
                qi = qv[i]
                for j in range(n):
                    qi[j] += zi * z[j]

        if recording:
            if rec_len >= rec_cap:
                status = RECORD_OVERFLOW
                break
            rec_grid[rec_len] = t
            for i in range(n):
                rec_x[rec_len][i] = x[i]
                rec_psi[rec_len][i] = psi[i]
                rec_db[rec_len][i] = dbrow[i]
            rec_len += 1

        while pp < n_probes and probes[pp] <= t:
            for i in range(n):
                probe_x[pp][i] = x[i]
                probe_psi[pp][i] = psi[i]
                if want_qv:
                    for j in range(n):
                        probe_qv[pp][i][j] = qv[i][j]
            pp += 1
        for i in range(n):
            while vpp[i] < n_vp and vprobes[vpp[i]][i] <= t:
                vprobe_x[vpp[i]][i] = x[i]
                vpp[i] += 1

    if status == OK:
        # all coordinates absorbed: state is frozen from here on
        while pp < n_probes:
            for i in range(n):
                probe_x[pp][i] = x[i]
                probe_psi[pp][i] = psi[i]
                if want_qv:
                    for j in range(n):
                        probe_qv[pp][i][j] = qv[i][j]
            pp += 1
        for i in range(n):
            while vpp[i] < n_vp:
                vprobe_x[vpp[i]][i] = 0.0
                vpp[i] += 1

    for i in range(n):
        psi_final[i] = psi[i]
    return status, steps, rec_len
