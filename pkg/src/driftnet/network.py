"""Conductance networks and the deterministic matrix operators built on them.

The central objects are H_beta = 2*diag(beta) - W, K_t = Id - diag(t)*W and
the deformed parameters (W~, eta~) obtained by shifting the clock of each
vertex. Everything here is pure and operates on dense arrays; vertex counts
are desk scale (n <= 32 in the S.D.E. engine, unrestricted here).
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AsymmetricWeights,
    DisconnectedGraph,
    InfiniteTimeEntry,
    NegativeWeight,
    NotSymmetric,
    SingularK,
)

SYMMETRY_RTOL = 1e-12      # relative asymmetry tolerance on inputs
PIVOT_RTOL = 1e-12         # PD pivot threshold, relative to max diagonal
COND_LIMIT = 1e12          # condition estimate limit for K inversions


@dataclass(frozen=True)
class ConductanceNetwork:
    """Symmetric nonnegative weight matrix with a connected positive-edge graph.

    Diagonal entries may be nonzero; the jump-process module imposes its own
    zero-diagonal requirement.
    """

    n: int
    weights: np.ndarray = field(repr=False)
    require_connected: bool = True

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise AsymmetricWeights(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if np.isnan(w).any():
            raise NegativeWeight("weights contain NaN")
        scale = np.abs(w).max() if w.size else 0.0
        if np.abs(w - w.T).max() > SYMMETRY_RTOL * max(scale, 1.0):
            raise AsymmetricWeights("weights matrix is not symmetric")
        w = 0.5 * (w + w.T)  # exact symmetry below the tolerance
        if (w < 0).any():
            raise NegativeWeight("weights must be nonnegative")
        if self.require_connected and not _connected(w):
            raise DisconnectedGraph("positive off-diagonal entries do not connect the graph")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def edges(self):
        i, j = np.nonzero(np.triu(self.weights, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ConductanceNetwork":
        obj = json.loads(text)
        return build_network(int(obj["n"]), obj["weights"])


def build_network(n: int, weights) -> ConductanceNetwork:
    """Validate and build a network; see ConductanceNetwork for the invariants."""
    if n < 1:
        raise DisconnectedGraph("vertex count must be positive")
    return ConductanceNetwork(n, np.array(weights, dtype=float))


def _connected(w: np.ndarray) -> bool:
    n = w.shape[0]
    if n == 1:
        return True
    seen = np.zeros(n, dtype=bool)
    queue = deque([0])
    seen[0] = True
    while queue:
        i = queue.popleft()
        for j in range(n):
            if j != i and not seen[j] and w[i, j] > 0:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def check_time_vector(t, n: int, allow_inf: bool = True) -> np.ndarray:
    """Validate a per-vertex clock vector: nonnegative, +inf meaning 'not yet hit'."""
    t = np.asarray(t, dtype=float)
    if t.shape != (n,):
        raise InfiniteTimeEntry(f"time vector must have length {n}")
    if np.isnan(t).any() or (t < 0).any():
        raise InfiniteTimeEntry("time entries must be nonnegative")
    if not allow_inf and np.isinf(t).any():
        raise InfiniteTimeEntry("time vector must be finite here")
    return t


def h_operator(net: ConductanceNetwork, beta) -> np.ndarray:
    """H_beta = 2*diag(beta) - W."""
    beta = np.asarray(beta, dtype=float)
    h = -net.weights.copy()
    h[np.diag_indices(net.n)] += 2.0 * beta
    return h


def k_operator(net: ConductanceNetwork, t) -> np.ndarray:
    """K_t = Id - diag(t)*W; requires finite t."""
    t = check_time_vector(t, net.n, allow_inf=False)
    return np.eye(net.n) - t[:, None] * net.weights


def ldl_pivots(m: np.ndarray):
    """Diagonal pivots of the symmetric LDL^T elimination of m.

    Stops early at the first nonpositive pivot (the matrix is then not PD);
    the returned array holds the pivots computed so far.
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    thresh = PIVOT_RTOL * max(np.abs(np.diag(a)).max(), 1e-300)
    pivots = np.empty(n)
    for k in range(n):
        p = a[k, k]
        pivots[k] = p
        if p <= thresh:
            return pivots[: k + 1]
        if k + 1 < n:
            col = a[k + 1:, k] / p
            a[k + 1:, k + 1:] -= np.outer(col, a[k, k + 1:])
    return pivots


def is_positive_definite(m, return_pivots: bool = False):
    """True iff the pivoted symmetric factorization succeeds with positive pivots."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric("matrix must be square")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
        raise NotSymmetric("matrix is asymmetric beyond tolerance")
    pivots = ldl_pivots(m)
    ok = len(pivots) == m.shape[0] and pivots[-1] > 0
    if return_pivots:
        return ok, pivots
    return ok


def logdet_pd(m: np.ndarray) -> float:
    """log det of a PD matrix from the LDL pivots; -inf if not PD."""
    pivots = ldl_pivots(np.asarray(m, dtype=float))
    if len(pivots) < m.shape[0] or pivots[-1] <= 0:
        return -math.inf
    return float(np.log(pivots).sum())


def _solve_k(net: ConductanceNetwork, t: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    k = k_operator(net, t)
    if np.linalg.cond(k) > COND_LIMIT:
        raise SingularK("K_t condition estimate exceeds 1e12")
    try:
        return np.linalg.solve(k, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularK(str(exc)) from None


def h_inverse_extended(net: ConductanceNetwork, t) -> np.ndarray:
    """H_{1/(2t)}^{-1} extended through K_t^{-1} diag(t), valid when some t_i = 0.

    Rows/columns at t_i = 0 vanish; for all-positive t this is the plain
    inverse of H_{1/(2t)}.
    """
    t = check_time_vector(t, net.n, allow_inf=False)
    return _solve_k(net, t, np.diag(t))


@dataclass(frozen=True)
class DeformedParams:
    """Parameters (W~, eta~) of the time-shifted process."""

    w_tilde: np.ndarray
    eta_tilde: np.ndarray


def deform_parameters(net: ConductanceNetwork, eta, s) -> DeformedParams:
    """W~ = W K_s^{-1} and eta~ = eta + W~ (diag(s) eta).

    The caller clamps s to s ∧ T; K_s must be invertible on that range.
    W~ is symmetric because K_s^{-1} diag(s) is.
    """
    s = check_time_vector(s, net.n, allow_inf=False)
    eta = np.asarray(eta, dtype=float)
    # W K^{-1} = (K^{-T} W)^T, and W is symmetric
    w_tilde = _solve_k_transpose(net, s, net.weights).T
    eta_tilde = eta + w_tilde @ (s * eta)
    return DeformedParams(w_tilde=w_tilde, eta_tilde=eta_tilde)


def _solve_k_transpose(net: ConductanceNetwork, t: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    k = k_operator(net, t)
    if np.linalg.cond(k) > COND_LIMIT:
        raise SingularK("K_t condition estimate exceeds 1e12")
    try:
        return np.linalg.solve(k.T, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularK(str(exc)) from None


@dataclass(frozen=True)
class AlgebraResiduals:
    """Relative residuals of the clock-composition identities."""

    factorization: float   # K_{t0+t1} = K~_{t1} K_{t0}
    determinant: float     # det ratio identity
    bilinear: float        # <eta~, H~^{-1} eta~> difference identity

    @property
    def max_residual(self) -> float:
        return max(self.factorization, self.determinant, self.bilinear)


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def algebra_residuals(net: ConductanceNetwork, t0, t1, eta) -> AlgebraResiduals:
    """Residuals of the three identities tying the clocks t0, t0+t1 together.

    All three are < 1e-9 (relative) for well-conditioned inputs; the
    determinant identity falls back to det K_{t0+t1} = det K~_{t1} det K_{t0}
    when some t1_i = 0 (the H-ratio form needs t1 > 0).
    """
    t0 = check_time_vector(t0, net.n, allow_inf=False)
    t1 = check_time_vector(t1, net.n, allow_inf=False)
    eta = np.asarray(eta, dtype=float)
    n = net.n

    k01 = k_operator(net, t0 + t1)
    if np.linalg.cond(k01) > COND_LIMIT:
        raise SingularK("K_{t0+t1} condition estimate exceeds 1e12")
    k0 = k_operator(net, t0)
    w_tilde = _solve_k_transpose(net, t0, net.weights).T
    k1_tilde = np.eye(n) - t1[:, None] * w_tilde

    r_fact = np.abs(k01 - k1_tilde @ k0).max() / max(1.0, np.abs(k01).max())

    det_k0 = float(np.linalg.det(k0))
    if (t1 > 0).all():
        h01 = h_operator(net, 1.0 / (2.0 * (t0 + t1)))
        h1_tilde = np.diag(1.0 / t1) - w_tilde
        lhs = float(np.linalg.det(h01)) / float(np.linalg.det(h1_tilde))
        rhs = float(np.prod(t1 / (t0 + t1))) * det_k0
    else:
        lhs = float(np.linalg.det(k01))
        rhs = float(np.linalg.det(k1_tilde)) * det_k0
    r_det = _rel(lhs, rhs)

    eta_tilde = eta + w_tilde @ (t0 * eta)
    h1_tilde_inv = np.linalg.solve(k1_tilde, np.diag(t1))
    lhs_b = float(eta_tilde @ h1_tilde_inv @ eta_tilde)
    hinv_01 = _solve_k(net, t0 + t1, np.diag(t0 + t1))
    hinv_0 = _solve_k(net, t0, np.diag(t0))
    rhs_b = float(eta @ hinv_01 @ eta) - float(eta @ hinv_0 @ eta)
    r_bil = _rel(lhs_b, rhs_b)

    return AlgebraResiduals(factorization=float(r_fact), determinant=r_det, bilinear=r_bil)
