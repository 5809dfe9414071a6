"""Monte Carlo toolkit for Poisson Boolean percolation with heavy-tailed radii.

Submodules:
    measures      radius measures, band laws, dyadic projection constants
    geometry      windows and regions with vectorized ball predicates
    sampling      exact finite-window samplers, thinning, bit-encoded cells
    connectivity  ball-intersection clusters and event indicators
    estimators    event probabilities, phi, critical searches, pivotality
    hypercube     exact influence analysis and the fair-bit encoding
    exploration   dynamic renormalization and sprinkling experiments
    cli           experiment runner
"""

__version__ = "0.1.0"

from .measures import (CellLaw, DivergentMoment, PointMass, PowerLaw,
                       RadiusMeasure, Truncated, measure_from_config)
from .sampling import Configuration, TruncationBudgetExceeded, sample
from .connectivity import (BigBall, Connection, Crossing, GeneralSeed, Seed,
                           TwoArm, WindowTooSmall, evaluate_event)
from .estimators import (BracketInvalid, CriticalSearch, Estimate,
                         correlation_length, critical_search,
                         delta_derivative, estimate_event, estimate_phi,
                         estimate_pivotal, talagrand_diagnostic,
                         two_arm_decay)

__all__ = [
    "__version__",
    "CellLaw", "DivergentMoment", "PointMass", "PowerLaw", "RadiusMeasure",
    "Truncated", "measure_from_config",
    "Configuration", "TruncationBudgetExceeded", "sample",
    "BigBall", "Connection", "Crossing", "GeneralSeed", "Seed", "TwoArm",
    "WindowTooSmall", "evaluate_event",
    "BracketInvalid", "CriticalSearch", "Estimate", "correlation_length",
    "critical_search", "delta_derivative", "estimate_event", "estimate_phi",
    "estimate_pivotal", "talagrand_diagnostic", "two_arm_decay",
]
