"""Numerical solver for the coupled stopped S.D.E.s and their Markov shifts."""

from .backend import active_backend, available_backends, use as use_backend
from .engine import (
    BetaSamples,
    PathRecord,
    ProbeSamples,
    QvReport,
    SdeConfig,
    ShiftState,
    effective_drift,
    h_inv_at,
    level_rule_times,
    psi_limit,
    quadratic_variation_residual,
    resolve_config,
    sample_beta,
    sample_paths,
    shift_at_multistopping,
    shift_state,
    simulate,
)

__all__ = [
    "BetaSamples",
    "PathRecord",
    "ProbeSamples",
    "QvReport",
    "SdeConfig",
    "ShiftState",
    "active_backend",
    "available_backends",
    "effective_drift",
    "h_inv_at",
    "level_rule_times",
    "psi_limit",
    "quadratic_variation_residual",
    "resolve_config",
    "sample_beta",
    "sample_paths",
    "shift_at_multistopping",
    "shift_state",
    "simulate",
    "use_backend",
]
