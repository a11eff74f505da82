"""Replica orchestration for the interacting-drift S.D.E.

The stepping itself lives in the kernel backends; this module owns
configuration, per-replica streams, worker pools, and the Markov-shift
post-processing (deformed parameters, level rules).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import (
    BeyondHorizon,
    HorizonExceeded,
    IncompleteRecord,
    InvalidParams,
    KNearSingular,
    RuleNeverTriggered,
    SimulationBudgetExceeded,
)
from ..network import DeformedParams, check_time_vector, deform_parameters, k_operator
from ..nu import NuParams
from ..streams import DOMAIN_SDE, substream
from . import backend
from . import _kernel_py as _codes

KERNEL_NMAX = 32

HIT_RULES = {"bridge-probability": 0, "linear-interpolation": 1}


@dataclass(frozen=True)
class SdeConfig:
    """Integrator knobs.

    t_max and adaptive_floor default to the effective-drift heuristics when
    None. Step growth beyond dt applies only to zero-W networks, where the
    drift is constant and the scheme is exact in law at any step size.
    """

    dt: float = 1e-3
    t_max: float | None = None
    hit_rule: str = "bridge-probability"
    adaptive_floor: float | None = None
    seed: int = 0
    max_steps: int = 20_000_000
    growth_rate: float = 1e-3

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidParams("dt must be positive")
        if self.t_max is not None and self.t_max <= 0:
            raise InvalidParams("t_max must be positive")
        if self.hit_rule not in HIT_RULES:
            raise InvalidParams(f"hit_rule must be one of {sorted(HIT_RULES)}")
        if self.adaptive_floor is not None and self.adaptive_floor <= 0:
            raise InvalidParams("adaptive_floor must be positive")
        if self.max_steps < 1:
            raise InvalidParams("max_steps must be positive")


def effective_drift(params: NuParams) -> np.ndarray:
    """eta_i + sum_{j != i} W_ij theta_j, the constant drift of each marginal."""
    w = params.network.weights
    return params.eta + w @ params.theta - np.diag(w) * params.theta


def resolve_config(params: NuParams, config: SdeConfig):
    """Concrete (dt, t_max, floor, growth, hit_rule_code, max_steps)."""
    if params.n > KERNEL_NMAX:
        raise InvalidParams(f"engine supports at most {KERNEL_NMAX} vertices")
    if config.t_max is None:
        drift = effective_drift(params)
        scales = np.where(drift > 0, params.theta / np.where(drift > 0, drift, 1.0),
                          params.theta**2)
        t_max = 50.0 * float(scales.max())
    else:
        t_max = float(config.t_max)
    floor = config.adaptive_floor
    if floor is None:
        floor = 0.05 * float(params.theta.min())
    growth = config.growth_rate if not params.network.weights.any() else 0.0
    return (float(config.dt), t_max, float(floor), float(growth),
            HIT_RULES[config.hit_rule], int(config.max_steps))


@dataclass
class PathRecord:
    """One replica's discretized trajectory.

    x is clamped to 0 from the hit on; y = x + (t^T) eta; increments holds the
    Brownian increments of each accepted step (row k covers grid[k-1]→grid[k]).
    """

    grid: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    increments: np.ndarray
    t_hit: np.ndarray
    n_steps: int

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def complete(self) -> bool:
        return bool(np.isfinite(self.t_hit).all())


def _raise_for_status(status: int, context: str):
    if status == _codes.OK:
        return
    if status == _codes.HIT_HORIZON:
        raise HorizonExceeded(f"{context}: some coordinate alive at t_max")
    if status == _codes.NEAR_SINGULAR:
        raise KNearSingular(
            f"{context}: condition estimate of K exceeded 1e12; try a smaller dt")
    if status == _codes.STEP_BUDGET:
        raise SimulationBudgetExceeded(f"{context}: max_steps exhausted")
    if status == _codes.RECORD_OVERFLOW:
        raise SimulationBudgetExceeded(f"{context}: record buffer exhausted")
    raise SimulationBudgetExceeded(f"{context}: unknown kernel status {status}")


def simulate(params: NuParams, config: SdeConfig, rng: np.random.Generator,
             record_cap: int = 2_000_000) -> PathRecord:
    """Integrate one replica and keep the full grid."""
    n = params.n
    dt, t_max, floor, growth, rule, max_steps = resolve_config(params, config)
    cap = min(max_steps + 1, record_cap)
    rec_grid = np.empty(cap)
    rec_x = np.empty((cap, n))
    rec_psi = np.empty((cap, n))
    rec_db = np.empty((cap, n))
    t_hit = np.empty(n)
    psi_final = np.empty(n)
    status, n_steps, rec_len = backend.kernel().run_replica(
        params.network.weights, params.theta, params.eta,
        dt, t_max, floor, growth, rule, 1e12, max_steps, rng,
        t_hit, psi_final,
        rec_grid=rec_grid, rec_x=rec_x, rec_psi=rec_psi, rec_db=rec_db)
    _raise_for_status(status, "simulate")
    grid = rec_grid[:rec_len].copy()
    x = rec_x[:rec_len].copy()
    psi = rec_psi[:rec_len].copy()
    db = rec_db[1:rec_len].copy()
    tcap = np.minimum(grid[:, None], t_hit[None, :])
    y = x + tcap * params.eta
    return PathRecord(grid=grid, x=x, y=y, psi=psi, increments=db,
                      t_hit=t_hit, n_steps=n_steps)


@dataclass
class BetaSamples:
    """Hitting-time potential samples: beta = 1/(2 T) per completed replica."""

    beta: np.ndarray          # (m, n)
    t_hit: np.ndarray         # (m, n)
    replica_ids: np.ndarray   # (m,)
    n_dropped: int = 0


@dataclass
class ProbeSamples:
    """Per-replica snapshots collected while stepping."""

    t_hit: np.ndarray                 # (m, n)
    psi_final: np.ndarray             # (m, n)
    x_at: np.ndarray | None = None    # (m, P, n) at common probe times
    psi_at: np.ndarray | None = None  # (m, P, n)
    qv_at: np.ndarray | None = None   # (m, P, n, n) cumulative QV of psi
    vx_at: np.ndarray | None = None   # (m, Q, n) per-vertex probe times
    level_t: np.ndarray | None = None  # (m, n) first passage below levels
    level_x: np.ndarray | None = None  # (m, n)


def _run_batch(params, config, seed, indices, probes, want_qv, vprobes, levels,
               collect_hits_only):
    n = params.n
    dt, t_max, floor, growth, rule, max_steps = resolve_config(params, config)
    kern = backend.kernel().run_replica
    m = len(indices)
    t_hit = np.empty((m, n))
    psi_final = np.empty((m, n))
    statuses = np.empty(m, dtype=np.int64)
    kw_proto = {}
    out = {}
    if probes is not None:
        out["x_at"] = np.empty((m, len(probes), n))
        out["psi_at"] = np.empty((m, len(probes), n))
        if want_qv:
            out["qv_at"] = np.empty((m, len(probes), n, n))
    if vprobes is not None:
        out["vx_at"] = np.empty((m, vprobes.shape[0], n))
    if levels is not None:
        out["level_t"] = np.empty((m, n))
        out["level_x"] = np.empty((m, n))
    for row, r in enumerate(indices):
        rng = substream(seed, DOMAIN_SDE, int(r))
        kw = dict(kw_proto)
        if probes is not None:
            kw["probes"] = probes
            kw["probe_x"] = out["x_at"][row]
            kw["probe_psi"] = out["psi_at"][row]
            if want_qv:
                kw["probe_qv"] = out["qv_at"][row]
        if vprobes is not None:
            kw["vprobes"] = vprobes
            kw["vprobe_x"] = out["vx_at"][row]
        if levels is not None:
            kw["levels"] = levels
            kw["level_t"] = out["level_t"][row]
            kw["level_x"] = out["level_x"][row]
        status, _, _ = kern(
            params.network.weights, params.theta, params.eta,
            dt, t_max, floor, growth, rule, 1e12, max_steps, rng,
            t_hit[row], psi_final[row], **kw)
        statuses[row] = status
        if status != _codes.OK and not (collect_hits_only and status == _codes.HIT_HORIZON):
            _raise_for_status(status, f"replica {r}")
    return t_hit, psi_final, statuses, out


def _split(indices, workers):
    chunk = max(1, math.ceil(len(indices) / (workers * 4)))
    return [indices[i:i + chunk] for i in range(0, len(indices), chunk)]


def _parallel_batches(params, config, seed, n_samples, workers, probes, want_qv,
                      vprobes, levels, collect_hits_only):
    indices = np.arange(n_samples, dtype=np.int64)
    if workers <= 1 or n_samples < 4:
        return [_run_batch(params, config, seed, indices, probes, want_qv,
                           vprobes, levels, collect_hits_only)]
    import multiprocessing as mp

    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context("spawn")
    parts = _split(indices, workers)
    args = [(params, config, seed, part, probes, want_qv, vprobes, levels,
             collect_hits_only) for part in parts]
    with ctx.Pool(workers) as pool:
        return pool.starmap(_run_batch, args)


def sample_beta(params: NuParams, n_samples: int, config: SdeConfig,
                seed: int | None = None, workers: int = 1,
                on_horizon: str = "error") -> BetaSamples:
    """Draw beta = 1/(2 T) over independent replicas.

    on_horizon: "error" raises on any replica alive at t_max (default);
    "drop" excludes those replicas and reports the count — meant for the
    heavy-tailed zero-drift laws where no finite horizon covers all mass.
    """
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    if on_horizon not in ("error", "drop"):
        raise InvalidParams("on_horizon must be 'error' or 'drop'")
    seed = config.seed if seed is None else seed
    results = _parallel_batches(params, config, seed, n_samples, workers,
                                None, False, None, None, on_horizon == "drop")
    t_hit = np.concatenate([r[0] for r in results])
    statuses = np.concatenate([r[2] for r in results])
    ok = statuses == _codes.OK
    if not ok.all() and on_horizon == "error":
        _raise_for_status(_codes.HIT_HORIZON, "sample_beta")
    ids = np.nonzero(ok)[0].astype(np.int64)
    t_ok = t_hit[ok]
    return BetaSamples(beta=1.0 / (2.0 * t_ok), t_hit=t_ok, replica_ids=ids,
                       n_dropped=int((~ok).sum()))


def sample_paths(params: NuParams, n_samples: int, config: SdeConfig,
                 seed: int | None = None, common_probes=None, want_qv: bool = False,
                 vertex_probes=None, levels=None, workers: int = 1) -> ProbeSamples:
    """Run replicas while recording snapshots; every replica must complete."""
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    seed = config.seed if seed is None else seed
    probes = None if common_probes is None else np.ascontiguousarray(common_probes, dtype=float)
    if probes is not None and (np.diff(probes) < 0).any():
        raise InvalidParams("common_probes must be nondecreasing")
    vp = None if vertex_probes is None else np.ascontiguousarray(vertex_probes, dtype=float)
    if vp is not None:
        if vp.ndim != 2 or vp.shape[1] != params.n:
            raise InvalidParams("vertex_probes must be (Q, n)")
        if (np.diff(vp, axis=0) < 0).any():
            raise InvalidParams("vertex_probes columns must be nondecreasing")
    lv = None if levels is None else np.ascontiguousarray(levels, dtype=float)
    results = _parallel_batches(params, config, seed, n_samples, workers,
                                probes, want_qv, vp, lv, False)
    t_hit = np.concatenate([r[0] for r in results])
    psi_final = np.concatenate([r[1] for r in results])

    def _cat(key):
        if key not in results[0][3]:
            return None
        return np.concatenate([r[3][key] for r in results])

    return ProbeSamples(t_hit=t_hit, psi_final=psi_final,
                        x_at=_cat("x_at"), psi_at=_cat("psi_at"), qv_at=_cat("qv_at"),
                        vx_at=_cat("vx_at"), level_t=_cat("level_t"),
                        level_x=_cat("level_x"))


def psi_limit(record: PathRecord, params: NuParams) -> np.ndarray:
    """H_{1/(2T)}^{-1} eta computed from the hitting times."""
    if not record.complete:
        raise IncompleteRecord("psi_limit needs every coordinate absorbed")
    k = k_operator(params.network, record.t_hit)
    return np.linalg.solve(k, record.t_hit * params.eta)


def h_inv_at(params: NuParams, t: float, t_hit: np.ndarray) -> np.ndarray:
    """H^{-1}_{1/(2(t^T))} = K_{t^T}^{-1} diag(t^T) for one replica."""
    tcap = np.minimum(t, t_hit)
    k = k_operator(params.network, tcap)
    return np.linalg.solve(k, np.diag(tcap))


@dataclass
class QvReport:
    """Per-path empirical quadratic covariation of psi against the closed form."""

    max_abs_deviation: float
    checked_times: np.ndarray
    empirical_final: np.ndarray
    expected_final: np.ndarray


def quadratic_variation_residual(record: PathRecord, params: NuParams,
                                 n_checkpoints: int = 8) -> QvReport:
    if not record.complete:
        raise IncompleteRecord("quadratic variation needs a complete record")
    dpsi = np.diff(record.psi, axis=0)
    outer = dpsi[:, :, None] * dpsi[:, None, :]
    cum = np.cumsum(outer, axis=0)
    idx = np.unique(np.linspace(1, len(record.grid) - 1, n_checkpoints).astype(int))
    worst = 0.0
    for k in idx:
        expected = h_inv_at(params, float(record.grid[k]), record.t_hit)
        worst = max(worst, float(np.abs(cum[k - 1] - expected).max()))
    expected_final = h_inv_at(params, float(record.grid[-1]), record.t_hit)
    return QvReport(max_abs_deviation=worst, checked_times=record.grid[idx],
                    empirical_final=cum[-1], expected_final=expected_final)


@dataclass
class ShiftState:
    """Conditional law parameters of the process shifted by per-vertex times."""

    deformed: DeformedParams
    x0: np.ndarray
    surviving: np.ndarray       # bool mask: T_i > t0_i
    t0_capped: np.ndarray       # t0 ^ T


def shift_state(record: PathRecord, t0, params: NuParams) -> ShiftState:
    """Parameters (W~, x(t0), eta~) of the shifted process, per Markov property."""
    t0 = check_time_vector(t0, params.n, allow_inf=False)
    horizon = float(record.grid[-1])
    alive_past = (~np.isfinite(record.t_hit)) & (t0 > horizon)
    if alive_past.any():
        raise BeyondHorizon("t0 exceeds the recorded horizon for an alive coordinate")
    s = np.minimum(t0, record.t_hit)
    deformed = deform_parameters(params.network, params.eta, s)
    x0 = np.array([np.interp(t0[i], record.grid, record.x[:, i], right=0.0)
                   for i in range(params.n)])
    x0[t0 >= record.t_hit] = 0.0
    return ShiftState(deformed=deformed, x0=x0, surviving=record.t_hit > t0,
                      t0_capped=s)


def level_rule_times(record: PathRecord, levels) -> tuple[np.ndarray, np.ndarray]:
    """First times the path drops to per-vertex levels, by grid interpolation."""
    levels = np.asarray(levels, dtype=float)
    n = record.n
    t0 = np.full(n, np.inf)
    x0 = np.zeros(n)
    for i in range(n):
        lev = levels[i]
        xi = record.x[:, i]
        if lev >= xi[0]:
            t0[i], x0[i] = 0.0, xi[0]
            continue
        below = np.nonzero(xi <= lev)[0]
        if len(below) == 0:
            continue
        k = below[0]
        g0, g1 = record.grid[k - 1], record.grid[k]
        t0[i] = g0 + (g1 - g0) * (xi[k - 1] - lev) / (xi[k - 1] - xi[k])
        x0[i] = lev
    return t0, x0


def shift_at_multistopping(record: PathRecord, rule, params: NuParams) -> ShiftState:
    """Shift at a multi-stopping time: ("fixed", t0) or ("levels", levels)."""
    kind, value = rule
    if kind == "fixed":
        return shift_state(record, value, params)
    if kind != "levels":
        raise InvalidParams("rule must be ('fixed', t0) or ('levels', levels)")
    t0, x0 = level_rule_times(record, value)
    if np.isinf(t0).any():
        raise RuleNeverTriggered("some coordinate never reached its level")
    s = np.minimum(t0, record.t_hit)
    deformed = deform_parameters(params.network, params.eta, s)
    return ShiftState(deformed=deformed, x0=x0, surviving=record.t_hit > t0,
                      t0_capped=s)
