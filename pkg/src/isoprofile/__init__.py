"""Isoperimetric profiles and comparison geometry under Ricci lower bounds."""

from .constants import (
    SmallVolumeConstants,
    avr_diameter_bound,
    decomposition_count_bound,
    diameter_bound,
)
from .inequality_checks import (
    CheckReport,
    check_bayle,
    check_bp,
    check_concavity_transform,
    check_derivative_asymptotics,
    check_ratio_bounds,
    check_strict_subadditivity,
    choose_concavity_constant,
    lipschitz_constant,
    minplus_combine,
    second_incremental_quotient,
)
from .model_space import (
    ComparisonParams,
    SLambda,
    cos_k,
    jacobian,
    max_domain,
    model_area,
    model_volume,
    s_lambda,
    sin_k,
    sn,
)
from .needle import NeedleDensity, cd_density_check, needle_isoperimetric, needle_profile, riccati_compare
from .profiles import (
    ConeModel,
    GridSpec,
    SampledProfile,
    SpaceForm,
    cone_profile,
    derivative_bracket,
    model_barrier,
    model_profile,
    radius_for_volume,
    sample_profile,
    small_volume_density_limit,
)
from .tubular import (
    TubeBoundInput,
    jacobian_derivatives_at_zero,
    laplacian_bound,
    model_ball_tube_oracle,
    tube_perimeter_bound,
    tube_volume_bound,
)

__version__ = "0.1.0"
