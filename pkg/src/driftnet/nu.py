"""The multivariate hitting-time potential law: density, Laplace transform,
restriction/conditioning maps and the closed-form verification quantities.

The law lives on {beta : H_beta > 0}. Parameters are a network W, a positive
start vector theta and a nonnegative drift vector eta.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditioningOutOfSupport,
    DisconnectedRestriction,
    DomainViolation,
    EmptySubset,
    InvalidParams,
    OutOfSupport,
    ZeroDriftDenominator,
)
from .network import (
    ConductanceNetwork,
    _connected,
    build_network,
    check_time_vector,
    h_operator,
    is_positive_definite,
    k_operator,
    ldl_pivots,
)

LOG_2_OVER_PI = math.log(2.0 / math.pi)


@dataclass(frozen=True)
class NuParams:
    """(network, theta, eta) with theta > 0 entrywise and eta >= 0."""

    network: ConductanceNetwork
    theta: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.network.n
        theta = np.asarray(self.theta, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        if theta.shape != (n,) or eta.shape != (n,):
            raise InvalidParams("theta and eta must have one entry per vertex")
        if not (theta > 0).all():
            raise InvalidParams("theta must be strictly positive")
        if (eta < 0).any() or np.isnan(eta).any():
            raise InvalidParams("eta must be nonnegative")
        theta.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "eta", eta)

    @property
    def n(self) -> int:
        return self.network.n

    def to_json(self) -> str:
        return json.dumps(
            {
                "network": {"n": self.network.n, "weights": self.network.weights.tolist()},
                "theta": self.theta.tolist(),
                "eta": self.eta.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "NuParams":
        obj = json.loads(text)
        net = build_network(int(obj["network"]["n"]), obj["network"]["weights"])
        return cls(net, np.array(obj["theta"], float), np.array(obj["eta"], float))


def _pd_solve(h: np.ndarray, rhs: np.ndarray):
    """(x, logdet) for PD h via its pivots; None if h is not PD."""
    pivots = ldl_pivots(h)
    if len(pivots) < h.shape[0] or pivots[-1] <= 0:
        return None
    logdet = float(np.log(pivots).sum())
    return np.linalg.solve(h, rhs), logdet


def log_density(params: NuParams, beta) -> float:
    """Log of the density at beta; -inf outside the support {H_beta > 0}."""
    beta = np.asarray(beta, dtype=float)
    h = h_operator(params.network, beta)
    theta, eta = params.theta, params.eta
    solved = _pd_solve(h, eta)
    if solved is None:
        return -math.inf
    hinv_eta, logdet = solved
    return (
        0.5 * params.n * LOG_2_OVER_PI
        - 0.5 * float(theta @ h @ theta)
        - 0.5 * float(eta @ hinv_eta)
        + float(eta @ theta)
        + float(np.log(theta).sum())
        - 0.5 * logdet
    )


def laplace_transform(params: NuParams, lam) -> float:
    """E[exp(-<lam, beta>)] in closed form; needs lam_i + theta_i^2 > 0."""
    lam = np.asarray(lam, dtype=float)
    theta, eta, w = params.theta, params.eta, params.network.weights
    shifted = theta**2 + lam
    if not (shifted > 0).all():
        raise DomainViolation("requires lambda_i + theta_i^2 > 0 for all i")
    root = np.sqrt(shifted)
    expo = (
        -0.5 * float(root @ w @ root)
        + 0.5 * float(theta @ w @ theta)
        + float(eta @ (theta - root))
    )
    return math.exp(expo) * float(np.prod(theta / root))


def marginal_ig_params(params: NuParams, i: int):
    """(mean, shape) of the inverse-Gaussian law of 1/(2 beta_i - W_ii)."""
    w = params.network.weights
    denom = float(params.eta[i]) + float(w[i] @ params.theta) - float(w[i, i] * params.theta[i])
    if denom <= 0:
        raise ZeroDriftDenominator(
            "eta_i + sum_j W_ij theta_j vanishes; the marginal is the inverse-Gamma law"
        )
    return float(params.theta[i]) / denom, float(params.theta[i]) ** 2


def _subset(u, n: int):
    u = sorted(set(int(i) for i in u))
    if not u:
        raise EmptySubset("vertex subset must be nonempty")
    if u[0] < 0 or u[-1] >= n:
        raise EmptySubset(f"vertex indices must lie in [0, {n})")
    return u


def restricted_params(params: NuParams, u, allow_disconnected: bool = False) -> NuParams:
    """Marginal parameters on u: (W_UU, theta_U, eta_U + W_{U,U^c} theta_{U^c})."""
    u = _subset(u, params.n)
    uc = [j for j in range(params.n) if j not in u]
    w = params.network.weights
    w_uu = w[np.ix_(u, u)]
    if not allow_disconnected and not _connected(w_uu):
        raise DisconnectedRestriction("induced subnetwork is disconnected")
    eta_hat = params.eta[u].copy()
    if uc:
        eta_hat += w[np.ix_(u, uc)] @ params.theta[uc]
    net = ConductanceNetwork(len(u), w_uu, require_connected=not allow_disconnected)
    return NuParams(net, params.theta[u], eta_hat)


def conditional_params(params: NuParams, u, beta_u) -> NuParams:
    """Conditional parameters on the complement of u given beta_u.

    W-check may gain nonzero diagonal even when W has none; requires the
    (H_beta)_{U,U} block to be PD at beta_u.
    """
    u = _subset(u, params.n)
    uc = [j for j in range(params.n) if j not in u]
    if not uc:
        raise EmptySubset("conditioning on every vertex leaves nothing")
    beta_u = np.asarray(beta_u, dtype=float)
    w = params.network.weights
    h_uu = 2.0 * np.diag(beta_u) - w[np.ix_(u, u)]
    pivots = ldl_pivots(h_uu)
    if len(pivots) < len(u) or pivots[-1] <= 0:
        raise ConditioningOutOfSupport("(H_beta)_{U,U} is not positive definite")
    cross = np.linalg.solve(h_uu, w[np.ix_(u, uc)])
    w_check = w[np.ix_(uc, uc)] + w[np.ix_(uc, u)] @ cross
    eta_check = params.eta[uc] + w[np.ix_(uc, u)] @ np.linalg.solve(h_uu, params.eta[u])
    net = ConductanceNetwork(len(uc), 0.5 * (w_check + w_check.T))
    return NuParams(net, params.theta[uc], eta_check)


def functional_identity_integrand(params: NuParams, lam, beta) -> float:
    """exp(-<eta, H^{-1} lam> - 0.5 <lam, H^{-1} lam>); its mean under the law
    is exp(-<lam, theta>)."""
    lam = np.asarray(lam, dtype=float)
    if (lam < 0).any():
        raise DomainViolation("lambda must be nonnegative")
    h = h_operator(params.network, np.asarray(beta, dtype=float))
    solved = _pd_solve(h, lam)
    if solved is None:
        raise OutOfSupport("H_beta is not positive definite")
    hinv_lam, _ = solved
    return math.exp(-float(params.eta @ hinv_lam) - 0.5 * float(lam @ hinv_lam))


def radon_nikodym_weight(params: NuParams, t_hit) -> float:
    """Density of the interacting law w.r.t. independent stopped BMs, as a
    function of the hitting-time vector. Zero when H_{1/(2T)} is not PD."""
    t = check_time_vector(t_hit, params.n, allow_inf=False)
    if not (t > 0).all():
        raise DomainViolation("hitting times must be positive")
    if not is_positive_definite(h_operator(params.network, 1.0 / (2.0 * t))):
        return 0.0
    theta, eta, w = params.theta, params.eta, params.network.weights
    k = k_operator(params.network, t)
    expo = (
        0.5 * float(theta @ w @ theta)
        - 0.5 * float(eta @ np.linalg.solve(k, t * eta))
        + float(eta @ theta)
    )
    return math.exp(expo) / math.sqrt(float(np.linalg.det(k)))
