"""driftnet: Brownian motions with interacting drifts on a conductance network.

Samples the hitting-time potential law, solves the coupled stopped S.D.E.s,
and statistically verifies the distributional identities tying them to
Bessel-bridge mixtures and the vertex reinforced jump process.
"""

__version__ = "0.1.0"

from .network import (
    AlgebraResiduals,
    ConductanceNetwork,
    DeformedParams,
    algebra_residuals,
    build_network,
    deform_parameters,
    h_inverse_extended,
    h_operator,
    is_positive_definite,
    k_operator,
)
from .nu import (
    NuParams,
    conditional_params,
    functional_identity_integrand,
    laplace_transform,
    log_density,
    marginal_ig_params,
    radon_nikodym_weight,
    restricted_params,
)

__all__ = [
    "AlgebraResiduals",
    "ConductanceNetwork",
    "DeformedParams",
    "NuParams",
    "__version__",
    "algebra_residuals",
    "build_network",
    "conditional_params",
    "deform_parameters",
    "functional_identity_integrand",
    "h_inverse_extended",
    "h_operator",
    "is_positive_definite",
    "k_operator",
    "laplace_transform",
    "log_density",
    "marginal_ig_params",
    "radon_nikodym_weight",
    "restricted_params",
]
