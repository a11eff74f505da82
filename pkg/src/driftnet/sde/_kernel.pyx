# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepper for the interacting-drift S.D.E.

Op-for-op twin of _kernel_py.run_replica: same stream consumption, same
floating-point expression order (built with -ffp-contract=off), so paths are
bit-identical to the fallback. Edit both together.
"""

from libc.math cimport exp, sqrt, fabs, INFINITY

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)

DEF NMAX = 32

OK = 0
HIT_HORIZON = 1
NEAR_SINGULAR = 2
STEP_BUDGET = 3
RECORD_OVERFLOW = 4

HIT_BRIDGE = 0
HIT_LINEAR = 1

cdef double BRIDGE_EXP_CUTOFF = 50.0


cdef bint _lu_factor(double *a, int *piv, int n, double *umax_out,
                     double *umin_out, bint *det_pos) noexcept nogil:
    cdef int neg = 0, k, r, c, p
    cdef double umax = 0.0, umin = INFINITY, mx, v, ukk, au, m, tmp
    for k in range(n):
        p = k
        mx = fabs(a[k * n + k])
        for r in range(k + 1, n):
            v = fabs(a[r * n + k])
            if v > mx:
                mx = v
                p = r
        if mx == 0.0:
            umax_out[0] = 0.0
            umin_out[0] = 0.0
            det_pos[0] = False
            return False
        if p != k:
            for c in range(n):
                tmp = a[k * n + c]
                a[k * n + c] = a[p * n + c]
                a[p * n + c] = tmp
            neg += 1
        piv[k] = p
        ukk = a[k * n + k]
        au = fabs(ukk)
        if au > umax:
            umax = au
        if au < umin:
            umin = au
        if ukk < 0.0:
            neg += 1
        for r in range(k + 1, n):
            m = a[r * n + k] / ukk
            a[r * n + k] = m
            for c in range(k + 1, n):
                a[r * n + c] -= m * a[k * n + c]
    umax_out[0] = umax
    umin_out[0] = umin
    det_pos[0] = (neg % 2) == 0
    return True


cdef void _lu_solve(double *a, int *piv, double *b, int n) noexcept nogil:
    cdef int k, r, c, p
    cdef double s, tmp
    for k in range(n):
        p = piv[k]
        if p != k:
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        for r in range(k + 1, n):
            b[r] -= a[r * n + k] * b[k]
    for k in range(n - 1, -1, -1):
        s = b[k]
        for c in range(k + 1, n):
            s -= a[k * n + c] * b[c]
        b[k] = s / a[k * n + k]


def run_replica(double[:, ::1] W, double[::1] theta, double[::1] eta,
                double dt, double t_max, double floor, double growth,
                int hit_rule, double cond_limit, long max_steps, rng,
                double[::1] t_hit, double[::1] psi_final,
                double[::1] probes=None, double[:, ::1] probe_x=None,
                double[:, ::1] probe_psi=None, double[:, :, ::1] probe_qv=None,
                double[:, ::1] vprobes=None, double[:, ::1] vprobe_x=None,
                double[::1] levels=None, double[::1] level_t=None,
                double[::1] level_x=None,
                double[::1] rec_grid=None, double[:, ::1] rec_x=None,
                double[:, ::1] rec_psi=None, double[:, ::1] rec_db=None):
    """Simulate one replica. Returns (status, n_steps, record_length)."""
    cdef int n = theta.shape[0]
    if n > NMAX:
        raise ValueError("kernel supports at most 32 vertices")

    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(
        rng.bit_generator.capsule, "BitGenerator")

    cdef double w[NMAX * NMAX]
    cdef double th[NMAX]
    cdef double et[NMAX]
    cdef double x[NMAX]
    cdef double psi[NMAX]
    cdef double tcap[NMAX]
    cdef double z[NMAX]
    cdef double drift[NMAX]
    cdef double dbrow[NMAX]
    cdef double amat[NMAX * NMAX]
    cdef double rhs[NMAX]
    cdef double qv[NMAX * NMAX]
    cdef double lev[NMAX]
    cdef int piv[NMAX]
    cdef bint alive[NMAX]
    cdef bint pend[NMAX]
    cdef int vpp[NMAX]

    cdef int i, j, k
    cdef bint wzero = True
    for i in range(n):
        th[i] = theta[i]
        et[i] = eta[i]
        for j in range(n):
            w[i * n + j] = W[i, j]
            if W[i, j] != 0.0:
                wzero = False

    cdef int n_alive = n
    for i in range(n):
        x[i] = th[i]
        psi[i] = th[i]
        tcap[i] = 0.0
        alive[i] = True
        t_hit[i] = INFINITY

    cdef bint want_qv = probe_qv is not None
    if want_qv:
        for i in range(n):
            for j in range(n):
                qv[i * n + j] = 0.0
    cdef int n_probes = probes.shape[0] if probes is not None else 0
    cdef int pp = 0
    cdef int n_vp = vprobes.shape[0] if vprobes is not None else 0
    for i in range(n):
        vpp[i] = 0
    cdef bint track_levels = levels is not None
    if track_levels:
        for i in range(n):
            lev[i] = levels[i]
            pend[i] = True
            level_t[i] = INFINITY
            level_x[i] = 0.0
            if lev[i] >= th[i]:
                level_t[i] = 0.0
                level_x[i] = th[i]
                pend[i] = False
    cdef bint recording = rec_grid is not None
    cdef long rec_cap = rec_grid.shape[0] if recording else 0
    cdef long rec_len = 0
    if recording:
        if rec_cap < 1:
            return RECORD_OVERFLOW, 0, 0
        rec_grid[0] = 0.0
        for i in range(n):
            rec_x[0, i] = x[i]
            rec_psi[0, i] = psi[i]
            rec_db[0, i] = 0.0
        rec_len = 1

    while pp < n_probes and probes[pp] <= 0.0:
        for i in range(n):
            probe_x[pp, i] = x[i]
            probe_psi[pp, i] = psi[i]
            if want_qv:
                for j in range(n):
                    probe_qv[pp, i, j] = 0.0
        pp += 1
    for i in range(n):
        while vpp[i] < n_vp and vprobes[vpp[i], i] <= 0.0:
            vprobe_x[vpp[i], i] = x[i]
            vpp[i] += 1

    cdef double t = 0.0
    cdef long steps = 0
    cdef int status = OK
    cdef int tag
    cdef double h, g, target, vt, sh, d, xo, db, xn, tau, q, u, li, tl
    cdef double p_new, zi, ti, umax, umin
    cdef bint hit, det_pos

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
                vt = vprobes[vpp[i], i]
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
                z[i] = random_standard_normal(bg)
        sh = sqrt(h)
        for i in range(n):
            if alive[i]:
                d = et[i]
                if not wzero:
                    for j in range(n):
                        d += w[i * n + j] * psi[j]
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
                    u = random_standard_uniform(bg)
                    if u < exp(-q):
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
                        level_t[i] = tau
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
                    z[i] = p_new - psi[i]
                psi[i] = p_new
        else:
            for i in range(n):
                ti = tcap[i]
                for j in range(n):
                    amat[i * n + j] = -ti * w[i * n + j]
                amat[i * n + i] += 1.0
                rhs[i] = x[i] + ti * et[i]
            _lu_factor(amat, piv, n, &umax, &umin, &det_pos)
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
                for j in range(n):
                    qv[i * n + j] += zi * z[j]

        if recording:
            if rec_len >= rec_cap:
                status = RECORD_OVERFLOW
                break
            rec_grid[rec_len] = t
            for i in range(n):
                rec_x[rec_len, i] = x[i]
                rec_psi[rec_len, i] = psi[i]
                rec_db[rec_len, i] = dbrow[i]
            rec_len += 1

        while pp < n_probes and probes[pp] <= t:
            for i in range(n):
                probe_x[pp, i] = x[i]
                probe_psi[pp, i] = psi[i]
                if want_qv:
                    for j in range(n):
                        probe_qv[pp, i, j] = qv[i * n + j]
            pp += 1
        for i in range(n):
            while vpp[i] < n_vp and vprobes[vpp[i], i] <= t:
                vprobe_x[vpp[i], i] = x[i]
                vpp[i] += 1

    if status == OK:
        while pp < n_probes:
            for i in range(n):
                probe_x[pp, i] = x[i]
                probe_psi[pp, i] = psi[i]
                if want_qv:
                    for j in range(n):
                        probe_qv[pp, i, j] = qv[i * n + j]
            pp += 1
        for i in range(n):
            while vpp[i] < n_vp:
                vprobe_x[vpp[i], i] = 0.0
                vpp[i] += 1

    for i in range(n):
        psi_final[i] = psi[i]
    return status, steps, rec_len
