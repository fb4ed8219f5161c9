"""Favorable-propagation loss on space-constrained uniform linear arrays.

Exact and asymptotic moments of the inner product of two LOS steering
channels, Monte Carlo estimators for those moments and for the MRT ergodic
sum rate, and a harness that regenerates the standard figures as CSV.
"""

from .analytic import (
    EpsilonPolicy,
    MomentSet,
    Provenance,
    asymptotic_mean_scaled,
    asymptotic_moments,
    asymptotic_second_moment_scaled,
    asymptotic_variance_scaled,
    epsilon_correction,
    exact_mean_scaled,
    exact_moments,
    exact_second_moment_scaled,
    exact_variance_scaled,
    jensen_sum_rate_bound,
    lemma_sinc_sum,
    sinc,
    unlimited_reference_moments,
)
from .array_channel import (
    ArrayGeometry,
    ArrayMode,
    ChannelVector,
    UserAngleSet,
    inner_product,
    inner_product_closed_form,
    make_geometry,
    sample_angles,
    steering_channel,
)
from .errors import DomainError, InvariantViolation, OutOfValidityError
from .montecarlo import (
    MomentEstimate,
    RateEstimate,
    TrialPlan,
    estimate_inner_moments,
    estimate_sum_rate_mrt,
    quadrature_second_moment,
)

__version__ = "0.1.0"
