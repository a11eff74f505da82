"""Verification suites binding the modules together.

Each check_* function implements one acceptance-style verification and
returns TestReports; suite runners group them, write artifacts, and are what
both the CLI and the acceptance tests call. Default instances follow the
acceptance criteria (triangle / path / edge networks at unit conductance).
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from . import __version__
from .bessel import bridge_density, sample_bridge, sample_mixture
from .errors import DriftnetError, InvalidParams, ParseError
from .io import write_beta_csv, write_vrjp_csv
from .network import ConductanceNetwork, algebra_residuals, build_network, deform_parameters
from .nu import (
    NuParams,
    conditional_params,
    laplace_transform,
    log_density,
    marginal_ig_params,
    radon_nikodym_weight,
    restricted_params,
)
from .sde import SdeConfig, h_inv_at, sample_beta, sample_paths
from .sde.engine import _run_batch, resolve_config
from .sde import backend
from .stats import (
    TestReport,
    bonferroni,
    empirical_laplace,
    gamma_cdf,
    ig_cdf,
    independence_check,
    ks_one_sample,
    ks_two_sample,
    se_band_report,
    write_reports,
)
from .streams import DOMAIN_BRIDGE, DOMAIN_JUMP, DOMAIN_MISC, DOMAIN_VRJP, substream
from .vrjp import empirical_beta, markov_jump_simulate, psi_from_beta, vrjp_simulate

DEFAULT_SEED = 20260809


# ---------------------------------------------------------------- instances

def one_vertex_params(theta: float = 1.0, eta: float = 0.0) -> NuParams:
    return NuParams(build_network(1, [[0.0]]), np.array([theta]), np.array([eta]))


def edge_params(w: float = 1.0, theta=(1.0, 1.0), eta=(0.0, 0.0)) -> NuParams:
    net = build_network(2, [[0.0, w], [w, 0.0]])
    return NuParams(net, np.array(theta, float), np.array(eta, float))


def triangle_params(w: float = 1.0, theta=(1.0, 1.0, 1.0), eta=(0.0, 0.0, 0.0)) -> NuParams:
    weights = np.full((3, 3), w) - w * np.eye(3)
    return NuParams(build_network(3, weights), np.array(theta, float), np.array(eta, float))


def path3_params(w: float = 1.0, theta=(1.0, 1.0, 1.0), eta=(0.0, 0.0, 0.0)) -> NuParams:
    weights = np.array([[0.0, w, 0.0], [w, 0.0, w], [0.0, w, 0.0]])
    return NuParams(build_network(3, weights), np.array(theta, float), np.array(eta, float))


def random_connected_network(rng: np.random.Generator, n: int,
                             diag_prob: float = 0.2) -> ConductanceNetwork:
    w = np.zeros((n, n))
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = perm[k], perm[int(rng.integers(0, k))]
        w[a, b] = w[b, a] = rng.uniform(0.2, 2.0)
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] == 0 and rng.random() < 0.3:
                w[i, j] = w[j, i] = rng.uniform(0.2, 2.0)
    if rng.random() < diag_prob:
        for i in range(n):
            if rng.random() < 0.5:
                w[i, i] = rng.uniform(0.0, 1.0)
    return build_network(n, w)


LAMBDA_SCALARS = (0.2, 0.5, 1.0, 2.0, 4.0)


def lambda_grid(n: int) -> list[np.ndarray]:
    """10-point grid: uniform rays and single-coordinate rays."""
    grid = [np.full(n, c) for c in LAMBDA_SCALARS]
    for c in LAMBDA_SCALARS:
        v = np.zeros(n)
        v[0] = c
        grid.append(v)
    return grid


# ------------------------------------------------- criterion 1 + 6a: algebra

def check_algebra(seed: int = DEFAULT_SEED, n_instances: int = 1000,
                  tol: float = 1e-9) -> list[TestReport]:
    """Clock-composition identities on random well-conditioned instances."""
    rng = substream(seed, DOMAIN_MISC, 1)
    worst = 0.0
    worst_eta = 0.0
    t_start = time.perf_counter()
    for _ in range(n_instances):
        n = int(rng.integers(1, 7))
        net = random_connected_network(rng, n)
        lam_max = max(float(np.linalg.eigvalsh(net.weights).max()), 0.5)
        t0 = rng.uniform(0.05, 0.35, n) / lam_max
        t1 = rng.uniform(0.05, 0.35, n) / lam_max
        eta = rng.uniform(0.0, 2.0, n)
        res = algebra_residuals(net, t0, t1, eta)
        worst = max(worst, res.max_residual)
        # eta-tilde computed both ways (deformation vs extended-inverse route)
        d = deform_parameters(net, eta, t0)
        k0 = np.eye(n) - t0[:, None] * net.weights
        other = np.linalg.solve(k0, t0 * eta) / t0
        denom = max(1.0, float(np.abs(other).max()))
        worst_eta = max(worst_eta, float(np.abs(d.eta_tilde - other).max()) / denom)
    elapsed = time.perf_counter() - t_start
    return [
        TestReport("algebra-identities", worst, None, n_instances,
                   "pass" if worst < tol else "fail",
                   f"max rel residual < {tol} ({elapsed:.2f}s)"),
        TestReport("algebra-eta-tilde", worst_eta, None, n_instances,
                   "pass" if worst_eta < tol else "fail", f"max rel residual < {tol}"),
    ]


def check_chain_rule(seed: int = DEFAULT_SEED, n_points: int = 1000,
                     tol: float = 1e-8) -> list[TestReport]:
    """log joint = log marginal + log conditional at random support points."""
    rng = substream(seed, DOMAIN_MISC, 2)
    worst = 0.0
    for _ in range(n_points):
        n = int(rng.integers(2, 6))
        net = random_connected_network(rng, n)
        params = NuParams(net, rng.uniform(0.5, 2.0, n), rng.uniform(0.0, 1.5, n))
        beta = 0.5 * (net.weights.sum(axis=1) + rng.uniform(0.05, 3.0, n))
        mask = rng.random(n) < 0.5
        if mask.all():
            mask[int(rng.integers(0, n))] = False
        if not mask.any():
            mask[int(rng.integers(0, n))] = True
        u = np.nonzero(mask)[0].tolist()
        uc = np.nonzero(~mask)[0].tolist()
        lhs = log_density(params, beta)
        rhs = (log_density(restricted_params(params, u, allow_disconnected=True), beta[u])
               + log_density(conditional_params(params, u, beta[u]), beta[uc]))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return [TestReport("density-chain-rule", worst, None, n_points,
                       "pass" if worst < tol else "fail", f"max rel deviation < {tol}")]


# ------------------------------------------- criterion 2: one-vertex laws

def check_one_vertex_gamma(seed: int = DEFAULT_SEED, replicas: int = 100_000,
                           dt: float = 1e-4) -> list[TestReport]:
    params = one_vertex_params(theta=1.0, eta=0.0)
    config = SdeConfig(dt=dt, t_max=1e12, seed=seed)
    draws = sample_beta(params, replicas, config, on_horizon="drop")
    rep = ks_one_sample(draws.beta[:, 0], lambda x: gamma_cdf(0.5, 1.0, x),
                        name="one-vertex-gamma-ks")
    drop = TestReport("one-vertex-gamma-dropped", float(draws.n_dropped), None, replicas,
                      "pass" if draws.n_dropped <= max(5, replicas // 10_000) else "fail",
                      "heavy-tail horizon censoring stays negligible")
    return [rep, drop]


def check_one_vertex_ig(seed: int = DEFAULT_SEED, replicas: int = 100_000,
                        dt: float = 1e-4) -> list[TestReport]:
    params = one_vertex_params(theta=1.0, eta=1.0)
    config = SdeConfig(dt=dt, seed=seed)
    draws = sample_beta(params, replicas, config, on_horizon="drop")
    rep = ks_one_sample(draws.t_hit[:, 0], lambda x: ig_cdf(1.0, 1.0, x),
                        name="one-vertex-ig-ks")
    drop = TestReport("one-vertex-ig-dropped", float(draws.n_dropped), None, replicas,
                      "pass" if draws.n_dropped <= max(5, replicas // 10_000) else "fail",
                      "horizon censoring stays negligible")
    return [rep, drop]


# --------------------------------- criteria 3 & 4: triangle Laplace/marginals

def sample_triangle(seed: int = DEFAULT_SEED, replicas: int = 100_000,
                    dt: float = 1e-4, workers: int = 1):
    params = triangle_params()
    config = SdeConfig(dt=dt, seed=seed)
    return params, sample_beta(params, replicas, config, workers=workers)


def check_laplace(params: NuParams, draws, grid=None, prefix: str = "laplace") -> list[TestReport]:
    grid = lambda_grid(params.n) if grid is None else grid
    reports = []
    for k, lam in enumerate(grid):
        emp, se = empirical_laplace(draws.beta, lam)
        closed = laplace_transform(params, lam)
        reports.append(se_band_report(f"{prefix}-{k}", emp, closed, se,
                                      draws.beta.shape[0]))
    return reports


def check_marginals_ig(params: NuParams, draws, prefix: str = "marginal-ig") -> list[TestReport]:
    reports = []
    w = params.network.weights
    for i in range(params.n):
        mu, shape = marginal_ig_params(params, i)
        s = 1.0 / (2.0 * draws.beta[:, i] - w[i, i])
        reports.append(ks_one_sample(s, lambda x, mu=mu, shape=shape: ig_cdf(mu, shape, x),
                                     name=f"{prefix}-{i}"))
    return bonferroni(reports)


# -------------------------------------------- criterion 5: 1-dependence

def check_dependence(seed: int = DEFAULT_SEED, replicas: int = 30_000,
                     dt: float = 1e-4) -> list[TestReport]:
    params = path3_params()
    config = SdeConfig(dt=dt, seed=seed)
    draws = sample_beta(params, replicas, config)
    reports = []
    for lam1, lam2 in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5)):
        reports.append(independence_check(draws.beta[:, 0], draws.beta[:, 2], lam1, lam2,
                                          name=f"dependence-l{lam1}-l{lam2}"))
    return reports


# ------------------------- criterion 6b: restriction at the sampling level

def check_restricted_laplace(seed: int = DEFAULT_SEED, replicas: int = 30_000,
                             dt: float = 1e-4) -> list[TestReport]:
    full = path3_params()
    sub = restricted_params(full, [0, 1])
    # exact consistency of the closed forms: restricted transform equals the
    # full transform at zero-padded lambda
    worst = 0.0
    for lam in lambda_grid(2):
        padded = np.zeros(3)
        padded[:2] = lam
        a = laplace_transform(sub, lam)
        b = laplace_transform(full, padded)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    exact = TestReport("restricted-laplace-exact", worst, None, len(lambda_grid(2)),
                       "pass" if worst < 1e-12 else "fail", "closed forms agree < 1e-12")
    config = SdeConfig(dt=dt, seed=seed)
    draws = sample_beta(sub, replicas, config)
    return [exact] + check_laplace(sub, draws, grid=lambda_grid(2),
                                   prefix="restricted-laplace")


# ------------------------------ criterion 8: Markov / strong Markov shifts

def _fresh_hits(params: NuParams, config: SdeConfig, rng) -> np.ndarray:
    dt, t_max, floor, growth, rule, max_steps = resolve_config(params, config)
    n = params.n
    t_hit = np.empty(n)
    psi_final = np.empty(n)
    status, _, _ = backend.kernel().run_replica(
        params.network.weights, params.theta, params.eta,
        dt, t_max, floor, growth, rule, 1e12, max_steps, rng, t_hit, psi_final)
    from .sde.engine import _raise_for_status
    _raise_for_status(status, "fresh shifted run")
    return t_hit


def check_markov_shift(seed: int = DEFAULT_SEED, replicas: int = 10_000,
                       dt: float = 1e-4, rule: str = "fixed") -> list[TestReport]:
    """Residual hitting laws against fresh runs with deformed parameters."""
    params = edge_params(theta=(1.0, 1.4), eta=(0.5, 0.25))
    net = params.network
    n = params.n
    config = SdeConfig(dt=dt, seed=seed)
    t0_fixed = np.array([0.08, 0.2])
    levels = 0.5 * params.theta
    if rule == "fixed":
        probes = sample_paths(params, replicas, config,
                              vertex_probes=t0_fixed[None, :])
        t0_all = np.broadcast_to(t0_fixed, (replicas, n))
        x0_all = probes.vx_at[:, 0, :]
    elif rule == "levels":
        probes = sample_paths(params, replicas, config, levels=levels)
        t0_all = probes.level_t
        x0_all = probes.level_x
    else:
        raise InvalidParams("rule must be 'fixed' or 'levels'")
    t_hit = probes.t_hit
    residual = [[] for _ in range(n)]
    fresh = [[] for _ in range(n)]
    for r in range(replicas):
        t0 = t0_all[r]
        surv = t_hit[r] > t0
        if not surv.any():
            continue
        for i in np.nonzero(surv)[0]:
            residual[i].append(t_hit[r, i] - t0[i])
        s = np.minimum(t0, t_hit[r])
        deformed = deform_parameters(net, params.eta, s)
        idx = np.nonzero(surv)[0]
        w_sub = deformed.w_tilde[np.ix_(idx, idx)]
        sub_net = ConductanceNetwork(len(idx), 0.5 * (w_sub + w_sub.T),
                                     require_connected=False)
        sub_params = NuParams(sub_net, x0_all[r][idx], deformed.eta_tilde[idx])
        hits = _fresh_hits(sub_params, config, substream(seed, DOMAIN_MISC, 10_000_000 + r))
        for pos, i in enumerate(idx):
            fresh[i].append(hits[pos])
    reports = []
    for i in range(n):
        reports.append(ks_two_sample(np.array(residual[i]), np.array(fresh[i]),
                                     name=f"markov-{rule}-residual-{i}"))
    return bonferroni(reports)


# ------------------------------------ criterion 11: psi martingale and QV

def check_psi_martingale(seed: int = DEFAULT_SEED, replicas: int = 10_000,
                         dt: float = 1e-4) -> list[TestReport]:
    params = triangle_params(eta=(0.2, 0.3, 0.1))
    config = SdeConfig(dt=dt, seed=seed)
    probe_times = np.array([0.1, 0.25, 0.5])
    probes = sample_paths(params, replicas, config, common_probes=probe_times,
                          want_qv=True)
    reports = []
    m = replicas
    for p, t in enumerate(probe_times):
        for i in range(params.n):
            vals = probes.psi_at[:, p, i]
            se = vals.std(ddof=1) / math.sqrt(m)
            reports.append(se_band_report(f"psi-mean-t{t}-v{i}", float(vals.mean()),
                                          float(params.theta[i]), float(se), m, k=3.0))
        expected = np.empty((m, params.n, params.n))
        for r in range(m):
            expected[r] = h_inv_at(params, float(t), probes.t_hit[r])
        diff = probes.qv_at[:, p] - expected
        for i in range(params.n):
            for j in range(i, params.n):
                d = diff[:, i, j]
                se = d.std(ddof=1) / math.sqrt(m)
                reports.append(se_band_report(f"psi-qv-t{t}-{i}{j}", float(d.mean()),
                                              0.0, float(se), m, k=5.0))
    return reports


# --------------------------------------------- criterion 7: Bessel checks

def check_bessel_kernel(seed: int = DEFAULT_SEED, n_instances: int = 20,
                        tol: float = 1e-8) -> list[TestReport]:
    rng = substream(seed, DOMAIN_MISC, 3)
    worst = 0.0
    for _ in range(n_instances):
        theta = rng.uniform(0.3, 2.0)
        t_end = rng.uniform(0.3, 3.0)
        t = t_end * rng.uniform(0.05, 0.95)
        total, _ = integrate.quad(lambda y: bridge_density(theta, t_end, t, y),
                                  0.0, np.inf, epsabs=1e-12, limit=200)
        worst = max(worst, abs(total - 1.0))
    return [TestReport("bessel-kernel-normalization", worst, None, n_instances,
                       "pass" if worst < tol else "fail", f"|integral - 1| < {tol}")]


def _kernel_cdf(theta: float, t_end: float, t: float):
    rem = t_end - t
    sd = math.sqrt(t * rem / t_end)
    hi = theta * rem / t_end + 10.0 * sd
    ys = np.linspace(0.0, hi, 8193)
    pdf = bridge_density(theta, t_end, t, ys)
    cdf = integrate.cumulative_simpson(pdf, x=ys, initial=0.0)
    cdf /= cdf[-1]
    return lambda x: np.interp(x, ys, cdf)


def check_bessel_sampler(seed: int = DEFAULT_SEED, replicas: int = 100_000) -> list[TestReport]:
    theta, t_end, t = 1.0, 1.0, 0.5
    vals = np.empty(replicas)
    for r in range(replicas):
        rng = substream(seed, DOMAIN_BRIDGE, 5_000_000 + r)
        vals[r] = sample_bridge(theta, t_end, [t], rng).values[0]
    return [ks_one_sample(vals, _kernel_cdf(theta, t_end, t), name="bessel-sampler-vs-kernel")]


def check_mixture_vs_sde(seed: int = DEFAULT_SEED, replicas: int = 20_000,
                         dt: float = 1e-4, probe: float = 0.3) -> list[TestReport]:
    params = edge_params()
    config = SdeConfig(dt=dt, seed=seed)
    direct = sample_paths(params, replicas, config, common_probes=np.array([probe]))
    config2 = SdeConfig(dt=dt, seed=seed + 777_001)
    mixture = sample_mixture(params, replicas, [[probe], [probe]], config2)
    reports = []
    for i in range(params.n):
        reports.append(ks_two_sample(direct.x_at[:, 0, i], mixture.values[i][:, 0],
                                     name=f"mixture-vs-sde-x{i}"))
    return bonferroni(reports)


# ------------------------------------ criterion 9: Radon-Nikodym weight

def _rn_mean(params: NuParams, draws: int, rng) -> tuple[float, float]:
    n = params.n
    theta, eta, w = params.theta, params.eta, params.network.weights
    const = 0.5 * float(theta @ w @ theta) + float(eta @ theta)
    total = 0.0
    total_sq = 0.0
    chunk = 100_000
    left = draws
    while left > 0:
        m = min(chunk, left)
        left -= m
        g = rng.gamma(0.5, 1.0, size=(m, n)) / theta**2
        t = 1.0 / (2.0 * g)
        k = np.broadcast_to(np.eye(n), (m, n, n)) - t[:, :, None] * w[None, :, :]
        det = np.linalg.det(k)
        h = -np.broadcast_to(w, (m, n, n)).copy()
        h[:, np.arange(n), np.arange(n)] += 2.0 * g
        pd = np.linalg.eigvalsh(h)[:, 0] > 0
        weight = np.zeros(m)
        if eta.any():
            rhs = t * eta[None, :]
            sol = np.linalg.solve(k[pd], rhs[pd])
            quad = np.einsum("ri,ri->r", np.broadcast_to(eta, sol.shape), sol)
            weight[pd] = np.exp(const - 0.5 * quad) / np.sqrt(det[pd])
        else:
            weight[pd] = np.exp(const) / np.sqrt(det[pd])
        total += weight.sum()
        total_sq += (weight**2).sum()
    mean = total / draws
    var = max(total_sq / draws - mean**2, 0.0)
    return mean, math.sqrt(var / draws)


def check_rn_weight(seed: int = DEFAULT_SEED, draws: int = 400_000) -> list[TestReport]:
    reports = []
    cases = [
        ("rn-weight-edge", edge_params()),
        ("rn-weight-triangle", triangle_params(eta=(0.3, 0.2, 0.1))),
    ]
    for k, (name, params) in enumerate(cases):
        rng = substream(seed, DOMAIN_MISC, 40 + k)
        mean, se = _rn_mean(params, draws, rng)
        reports.append(se_band_report(name, mean, 1.0, se, draws, k=3.0))
    return reports


# ------------------------------------------ criterion 10: VRJP mixture

def check_vrjp_mixture(seed: int = DEFAULT_SEED, replicas: int = 10_000,
                       horizon: float = 200.0, dt: float = 1e-4) -> list[TestReport]:
    params = triangle_params()
    net = params.network
    delta = 0
    u = [1, 2]
    n = net.n
    occ_direct = np.empty((replicas, n))
    counts_direct = np.empty((replicas, n))
    beta_hat = np.empty((replicas, len(u)))
    for r in range(replicas):
        rec = vrjp_simulate(net, params.theta, delta, horizon, substream(seed, DOMAIN_VRJP, r))
        occ_direct[r] = rec.local_times / horizon
        counts_direct[r] = rec.jump_counts
        beta_hat[r] = empirical_beta(rec)[u]

    sub = restricted_params(params, u)  # eta becomes W_{U,delta} * theta_delta
    config = SdeConfig(dt=dt, seed=seed + 101)
    draws = sample_beta(sub, replicas, config)
    occ_mix = np.empty((replicas, n))
    counts_mix = np.empty((replicas, n))
    for r in range(replicas):
        beta_full = np.ones(n)
        beta_full[u] = draws.beta[r]
        psi = psi_from_beta(net, beta_full, delta)
        rec = markov_jump_simulate(net, psi, delta, horizon,
                                   substream(seed, DOMAIN_JUMP, r))
        occ_mix[r] = rec.local_times / horizon
        counts_mix[r] = rec.jump_counts

    reports = []
    for i in range(n):
        reports.append(ks_two_sample(occ_direct[:, i], occ_mix[:, i],
                                     name=f"vrjp-occupation-{i}"))
        reports.append(ks_two_sample(counts_direct[:, i], counts_mix[:, i],
                                     name=f"vrjp-counts-{i}"))
    for pos, i in enumerate(u):
        mu, shape = marginal_ig_params(sub, pos)
        s = 1.0 / (2.0 * beta_hat[:, pos])
        reports.append(ks_one_sample(s, lambda x, mu=mu, shape=shape: ig_cdf(mu, shape, x),
                                     name=f"vrjp-empirical-beta-ig-{i}"))
    return bonferroni(reports)


# ------------------------------------------------------------ experiment glue

SUITE_NAMES = (
    "sample-beta", "verify-laplace", "verify-marginals", "verify-dependence",
    "verify-markov", "verify-mixture", "vrjp-compare", "bessel-check",
    "algebra", "all",
)


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = DEFAULT_SEED
    replicas: int | None = None
    output_dir: Path = Path("out")
    workers: int = 1
    nu_params: NuParams | None = None
    sde: SdeConfig | None = None
    lambda_grid: list | None = None
    probe_times: list | None = None

    def __post_init__(self):
        if self.suite not in SUITE_NAMES:
            raise InvalidParams(f"unknown suite {self.suite!r}; choose from {SUITE_NAMES}")
        if self.replicas is not None and self.replicas < 1:
            raise InvalidParams("replicas must be >= 1")
        if self.workers < 1:
            raise InvalidParams("workers must be >= 1")
        self.output_dir = Path(self.output_dir)

    def config_hash(self) -> str:
        """Provenance hash: everything that affects results (not output_dir/workers)."""
        payload = {
            "suite": self.suite,
            "seed": self.seed,
            "replicas": self.replicas,
            "nu_params": None if self.nu_params is None else json.loads(self.nu_params.to_json()),
            "sde": None if self.sde is None else {
                "dt": self.sde.dt, "t_max": self.sde.t_max, "hit_rule": self.sde.hit_rule,
                "adaptive_floor": self.sde.adaptive_floor, "max_steps": self.sde.max_steps,
                "growth_rate": self.sde.growth_rate,
            },
            "lambda_grid": self.lambda_grid,
            "probe_times": self.probe_times,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def parse_config(path) -> ExperimentConfig:
    """Load and validate an experiment config (JSON)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "suite" not in obj:
        raise ParseError(f"{path}: config must be an object with a 'suite' field")
    try:
        nu = None
        if "network" in obj:
            net = build_network(int(obj["network"]["n"]), obj["network"]["weights"])
            nu = NuParams(net, np.array(obj["theta"], float), np.array(obj["eta"], float))
        sde = None
        if "sde" in obj:
            s = obj["sde"]
            sde = SdeConfig(
                dt=float(s.get("dt", 1e-3)),
                t_max=s.get("t_max"),
                hit_rule=s.get("hit_rule", "bridge-probability"),
                adaptive_floor=s.get("adaptive_floor"),
                seed=int(s.get("seed", obj.get("seed", DEFAULT_SEED))),
                max_steps=int(s.get("max_steps", 20_000_000)),
            )
        return ExperimentConfig(
            suite=str(obj["suite"]),
            seed=int(obj.get("seed", DEFAULT_SEED)),
            replicas=None if obj.get("replicas") is None else int(obj["replicas"]),
            output_dir=Path(obj.get("output_dir", "out")),
            workers=int(obj.get("workers", 1)),
            nu_params=nu,
            sde=sde,
            lambda_grid=obj.get("lambda_grid"),
            probe_times=obj.get("probe_times"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    except DriftnetError as exc:
        raise InvalidParams(f"{path}: {exc}") from None


@dataclass
class SuiteResult:
    suite: str
    reports: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def _suite_sample_beta(cfg: ExperimentConfig) -> SuiteResult:
    params = cfg.nu_params or triangle_params()
    replicas = cfg.replicas or 10_000
    sde_cfg = cfg.sde or SdeConfig(dt=1e-3, seed=cfg.seed)
    draws = sample_beta(params, replicas, sde_cfg, seed=cfg.seed, workers=cfg.workers)
    out = cfg.output_dir / "beta.csv"
    write_beta_csv(out, draws)
    rep = TestReport("sample-beta", float(replicas - draws.n_dropped), None, replicas,
                     "pass" if draws.n_dropped == 0 else "fail", "all replicas completed")
    return SuiteResult("sample-beta", [rep], [out])


def _suite_verify_laplace(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 100_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    params, draws = sample_triangle(cfg.seed, replicas, dt, workers=cfg.workers)
    grid = None
    if cfg.lambda_grid is not None:
        grid = [np.asarray(v, float) for v in cfg.lambda_grid]
    reports = check_laplace(params, draws, grid=grid)
    reports += check_restricted_laplace(cfg.seed, max(replicas // 3, 1), dt)
    out = cfg.output_dir / "beta.csv"
    write_beta_csv(out, draws)
    return SuiteResult("verify-laplace", reports, [out])


def _suite_verify_marginals(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 100_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    reports = check_one_vertex_gamma(cfg.seed, replicas, dt)
    reports += check_one_vertex_ig(cfg.seed, replicas, dt)
    params, draws = sample_triangle(cfg.seed, replicas, dt, workers=cfg.workers)
    reports += check_marginals_ig(params, draws)
    return SuiteResult("verify-marginals", reports, [])


def _suite_verify_dependence(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 30_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    return SuiteResult("verify-dependence", check_dependence(cfg.seed, replicas, dt), [])


def _suite_verify_markov(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 10_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    reports = check_markov_shift(cfg.seed, replicas, dt, rule="fixed")
    reports += check_markov_shift(cfg.seed, replicas, dt, rule="levels")
    reports += check_psi_martingale(cfg.seed, replicas, dt)
    return SuiteResult("verify-markov", reports, [])


def _suite_verify_mixture(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 20_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    reports = check_mixture_vs_sde(cfg.seed, replicas, dt)
    reports += check_rn_weight(cfg.seed)
    return SuiteResult("verify-mixture", reports, [])


def _suite_vrjp_compare(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 10_000
    dt = cfg.sde.dt if cfg.sde else 1e-4
    return SuiteResult("vrjp-compare", check_vrjp_mixture(cfg.seed, replicas, dt=dt), [])


def _suite_bessel_check(cfg: ExperimentConfig) -> SuiteResult:
    replicas = cfg.replicas or 100_000
    reports = check_bessel_kernel(cfg.seed)
    reports += check_bessel_sampler(cfg.seed, replicas)
    return SuiteResult("bessel-check", reports, [])


def _suite_algebra(cfg: ExperimentConfig) -> SuiteResult:
    reports = check_algebra(cfg.seed)
    reports += check_chain_rule(cfg.seed)
    return SuiteResult("algebra", reports, [])


_RUNNERS = {
    "sample-beta": _suite_sample_beta,
    "verify-laplace": _suite_verify_laplace,
    "verify-marginals": _suite_verify_marginals,
    "verify-dependence": _suite_verify_dependence,
    "verify-markov": _suite_verify_markov,
    "verify-mixture": _suite_verify_mixture,
    "vrjp-compare": _suite_vrjp_compare,
    "bessel-check": _suite_bessel_check,
    "algebra": _suite_algebra,
}


def run_suite(cfg: ExperimentConfig) -> SuiteResult:
    """Execute a suite, write its artifacts, and return the verdicts."""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    if cfg.suite == "all":
        merged = SuiteResult("all")
        for name in _RUNNERS:
            sub = run_suite(ExperimentConfig(
                suite=name, seed=cfg.seed, replicas=cfg.replicas,
                output_dir=cfg.output_dir / name, workers=cfg.workers,
                nu_params=cfg.nu_params, sde=cfg.sde,
                lambda_grid=cfg.lambda_grid, probe_times=cfg.probe_times))
            merged.reports.extend(sub.reports)
            merged.artifacts.extend(sub.artifacts)
        _write_summary(cfg, merged)
        return merged
    result = _RUNNERS[cfg.suite](cfg)
    _write_summary(cfg, result)
    return result


def _write_summary(cfg: ExperimentConfig, result: SuiteResult) -> None:
    reports_path = cfg.output_dir / "reports.jsonl"
    write_reports(reports_path, result.reports)
    summary = {
        "suite": result.suite,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "n_reports": len(result.reports),
        "n_failed": sum(not r.passed for r in result.reports),
        "verdict": "pass" if result.passed else "fail",
    }
    summary_path = cfg.output_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    result.artifacts.extend([reports_path, summary_path])
