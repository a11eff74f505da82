"""Exception hierarchy. Each class names the contract it guards."""


class DriftnetError(Exception):
    """Base class for all toolkit errors."""


# --- network construction and matrix operators ---

class AsymmetricWeights(DriftnetError):
    """Weight matrix is not symmetric (conductances must satisfy W[i,j] == W[j,i])."""


class NegativeWeight(DriftnetError):
    """Weight matrix has a negative entry."""


class DisconnectedGraph(DriftnetError):
    """Positive off-diagonal entries do not connect the vertex set."""


class NotSymmetric(DriftnetError):
    """Matrix handed to a symmetric-only routine is asymmetric beyond tolerance."""


class InfiniteTimeEntry(DriftnetError):
    """Time vector contains +inf where a finite entry is required."""


class SingularK(DriftnetError):
    """Id - diag(t)W is singular or too ill-conditioned to invert."""


# --- the multivariate potential law ---

class DomainViolation(DriftnetError):
    """Argument outside the domain of the transform/CDF."""


class ZeroDriftDenominator(DriftnetError):
    """Marginal has zero effective drift; the inverse-Gaussian parametrization degenerates."""


class EmptySubset(DriftnetError):
    """Vertex subset must be nonempty."""


class DisconnectedRestriction(DriftnetError):
    """Induced subnetwork is disconnected; pass allow_disconnected=True to override."""


class ConditioningOutOfSupport(DriftnetError):
    """Conditioning block of H_beta is not positive definite at the given values."""


class OutOfSupport(DriftnetError):
    """beta lies outside the support {H_beta > 0}."""


# --- S.D.E. engine ---

class KNearSingular(DriftnetError):
    """Condition estimate of K along the path exceeded the limit (try a smaller dt)."""


class HorizonExceeded(DriftnetError):
    """Some coordinate was still alive at t_max."""


class SimulationBudgetExceeded(DriftnetError):
    """Per-replica step or record budget exhausted before completion."""


class IncompleteRecord(DriftnetError):
    """Operation requires a record in which every coordinate has hit zero."""


class BeyondHorizon(DriftnetError):
    """Shift time exceeds the recorded horizon for a still-alive coordinate."""


class RuleNeverTriggered(DriftnetError):
    """Multi-stopping rule did not trigger on this path within the horizon."""


# --- Bessel bridges ---

class TimeOutOfRange(DriftnetError):
    """Kernel time must lie strictly inside (0, T)."""


class GridOutOfRange(DriftnetError):
    """Sampling grid must be increasing and contained in [0, T]."""


# --- VRJP ---

class NonzeroDiagonal(DriftnetError):
    """Jump processes require zero diagonal conductances."""


class IsolatedStart(DriftnetError):
    """Start vertex has no neighbors."""


class NonpositivePsi(DriftnetError):
    """Markov jump rates require an entrywise positive psi."""


class BlockNotPD(DriftnetError):
    """(H_beta) restricted to the solve block is not positive definite."""


# --- statistics ---

class EmptySample(DriftnetError):
    """Estimator called on an empty sample."""


# --- experiment configuration ---

class ParseError(DriftnetError):
    """Config file missing or malformed."""


class InvalidParams(DriftnetError):
    """Config violates a module invariant."""
