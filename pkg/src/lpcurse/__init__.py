"""Worst-case integration on volume-normalized l_p balls.

Closed-form l_p geometry, exact samplers, concentration experiments, the
fooling-function adversary, and curse-of-dimensionality bound calculators.
"""
from .geometry import (PBallBody, alpha, gamma2, gamma2_lower_bound, isotropic_constant,
                       log_volume_ball, monotonicity_certificate, radius_ratio,
                       small_diameter_check)
from .special import digamma, log_gamma
from .sampling import (SampleBatch, sample_cone, sample_generalized_gaussian, sample_isotropic,
                       sample_uniform)
from .concentration import (ConcentrationReport, empirical_psi_norm, intersection_volume,
                            moment_integral, thin_shell_report)
from .hull import distance_to_hull
from .fooling import (FoolingFunction, admissible_delta, covering_radius,
                      hull_extension_volume_bound, integral_lower_bound, smoothing_profile)
from .complexity import (BoundParameters, SequenceSpec, SmoothnessClass, curse_condition,
                         empirical_adversary_error, lower_bound_count, scaling_reduction,
                         trivial_algorithm_error)

__version__ = "0.1.0"
