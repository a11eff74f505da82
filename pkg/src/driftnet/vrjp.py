"""Vertex reinforced jump process in exchangeable time, its Markov-jump
mixture counterpart, and the bridge between the two through psi.

While sitting at i only ell_i grows, so the integrated jump hazard is
Lambda(s) = 2 A (sqrt(c+s) - sqrt(c)) with A = sum_j W_ij sqrt(theta_j+ell_j)
and c = theta_i + ell_i; it inverts in closed form against an Exp(1) draw,
which is the primary sampling scheme (thinning survives in the tests as the
independent oracle).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlockNotPD, IsolatedStart, NonpositivePsi, NonzeroDiagonal
from .network import ConductanceNetwork, h_operator, ldl_pivots


@dataclass
class VrjpRecord:
    """Jump chain with local times and visit counts at the horizon."""

    jump_times: np.ndarray     # times of arrivals, first entry 0.0 at start
    visited: np.ndarray        # vertex sequence, visited[0] = start
    local_times: np.ndarray    # ell_i(t_end)
    jump_counts: np.ndarray    # arrivals at i up to t_end (start counts once)
    t_end: float

    @property
    def n(self) -> int:
        return len(self.local_times)


def _check_jump_net(net: ConductanceNetwork, delta: int):
    if np.diag(net.weights).any():
        raise NonzeroDiagonal("jump processes need zero diagonal conductances")
    if not 0 <= delta < net.n:
        raise IsolatedStart(f"start vertex {delta} out of range")
    if net.n == 1 or not net.weights[delta].any():
        raise IsolatedStart("start vertex has no neighbors")


def vrjp_simulate(net: ConductanceNetwork, theta, delta: int, t_max: float,
                  rng: np.random.Generator) -> VrjpRecord:
    """Self-interacting jump process with rates W_ij sqrt(theta_j+ell_j)/sqrt(theta_i+ell_i)."""
    _check_jump_net(net, delta)
    theta = np.asarray(theta, dtype=float)
    if not (theta > 0).all():
        raise NonpositivePsi("theta must be strictly positive")
    n = net.n
    w = net.weights
    ell = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    counts[delta] = 1
    times = [0.0]
    visited = [delta]
    t = 0.0
    i = delta
    while True:
        sq = np.sqrt(theta + ell)
        a = float(w[i] @ sq)           # diag is zero so the i-term vanishes
        c = float(theta[i] + ell[i])
        e = rng.standard_exponential()
        root = math.sqrt(c) + e / (2.0 * a)
        s = root * root - c
        if t + s >= t_max:
            ell[i] += t_max - t
            break
        ell[i] += s
        t += s
        # destination weights are frozen during the sojourn (only ell_i moved)
        p = w[i] * sq
        p[i] = 0.0
        u = rng.random() * a
        acc = 0.0
        j = n - 1
        for k in range(n):
            acc += p[k]
            if u < acc:
                j = k
                break
        i = j
        counts[i] += 1
        times.append(t)
        visited.append(i)
    return VrjpRecord(jump_times=np.array(times), visited=np.array(visited, dtype=np.int64),
                      local_times=ell, jump_counts=counts, t_end=t_max)


def markov_jump_simulate(net: ConductanceNetwork, psi, delta: int, t_max: float,
                         rng: np.random.Generator) -> VrjpRecord:
    """Markov jump process with constant rates (1/2) W_ij psi_j / psi_i."""
    _check_jump_net(net, delta)
    psi = np.asarray(psi, dtype=float)
    if not (psi > 0).all():
        raise NonpositivePsi("psi must be entrywise positive")
    n = net.n
    rates = 0.5 * net.weights * psi[None, :] / psi[:, None]
    np.fill_diagonal(rates, 0.0)
    total = rates.sum(axis=1)
    ell = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    counts[delta] = 1
    times = [0.0]
    visited = [delta]
    t = 0.0
    i = delta
    while True:
        s = rng.standard_exponential() / total[i]
        if t + s >= t_max:
            ell[i] += t_max - t
            break
        ell[i] += s
        t += s
        u = rng.random() * total[i]
        acc = 0.0
        j = n - 1
        for k in range(n):
            acc += rates[i, k]
            if u < acc:
                j = k
                break
        i = j
        counts[i] += 1
        times.append(t)
        visited.append(i)
    return VrjpRecord(jump_times=np.array(times), visited=np.array(visited, dtype=np.int64),
                      local_times=ell, jump_counts=counts, t_end=t_max)


def psi_from_beta(net: ConductanceNetwork, beta, delta: int) -> np.ndarray:
    """Solve psi_delta = 1, (H_beta psi) = 0 off delta.

    Off delta this reads psi_U = ((H_beta)_{U,U})^{-1} W_{U,delta}; entries
    come out positive on a connected network.
    """
    beta = np.asarray(beta, dtype=float)
    n = net.n
    u = [j for j in range(n) if j != delta]
    psi = np.ones(n)
    if not u:
        return psi
    h = h_operator(net, beta)
    h_uu = h[np.ix_(u, u)]
    pivots = ldl_pivots(h_uu)
    if len(pivots) < len(u) or pivots[-1] <= 0:
        raise BlockNotPD("(H_beta)_{U,U} is not positive definite")
    psi[u] = np.linalg.solve(h_uu, net.weights[u, delta])
    return psi


def empirical_beta(record: VrjpRecord) -> np.ndarray:
    """N_i(t)/ell_i(t) per vertex; NaN flags vertices never visited."""
    out = np.full(record.n, np.nan)
    seen = record.local_times > 0
    out[seen] = record.jump_counts[seen] / record.local_times[seen]
    return out
