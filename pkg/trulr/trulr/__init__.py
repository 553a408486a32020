"""
This is to allow an API like:

from trulr import WeightedSample, trulr_estimate, BoundarySpec, truncation_boundary
"""

from trulr.models.distributions import (
    Beta,
    ChiSquared,
    FiniteDiscrete,
    MvNormal,
    Normal,
    UniformLaplaceMixture,
    likelihood_ratio,
)
from trulr.models.streams import RandomStream
from trulr.models.enums import BoundaryRule, BoundId
from trulr.divergence import alpha_divergence_closed, alpha_divergence_mc
from trulr.estimators import (
    EstimateReport,
    WeightedSample,
    lr_estimate,
    multi_batch_estimate,
    trulr_estimate,
)
from trulr.boundaries import BoundarySpec, ProblemConstants, truncation_boundary
from trulr.bounds import evaluate_bound
