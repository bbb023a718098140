"""Random projections on the Grassmannian: sampling, moments, and losses.

The package studies how rank-k orthogonal projections of a finite point
cloud trade distance preservation against variance compression.  It
provides invariant-measure sampling of projectors, closed-form moments
of the distortion statistics, Monte Carlo cross-checks, candidate-set
scans with named selection rules, cubature tests for projector designs,
and an augmented-target loss for gradient-trained models.

Hot numerical kernels run through numba when available; set the
environment variable PROJBALANCE_BACKEND to "numpy" or "numba" to force
a backend (see projbalance.kernels.BACKEND for the active choice).
"""

from .errors import (
    CSVFormatError,
    DegenerateDataError,
    DesignFileError,
    DimensionError,
    DistinctPointsError,
    EmptyBandError,
    ProjBalanceError,
    SubspaceTieWarning,
    TransformError,
    UndefinedFitError,
)
from .grassmann import (
    COINCIDENT_FLOOR,
    PointCloud,
    Projector,
    StiefelFrame,
    as_generator,
    frame_frobenius_distance,
    frame_from_json_dict,
    frame_to_json_dict,
    frame_to_projector,
    frobenius_distance,
    haar_sample,
    load_cloud_csv,
    load_frame_csv,
    load_frame_json,
    pca_frame,
    pca_projector,
    project_affine,
    sample_frames,
    save_cloud_csv,
    save_frame_csv,
    save_frame_json,
)
from .objectives import (
    JLParams,
    ProjectionSummary,
    gjl_delta,
    jl_min_dimension,
    jl_satisfied,
    jl_theorem_params,
    relative_distortions,
    summarize,
    summarize_frames,
    total_variance,
)
from .moments import (
    ClosedFormMoments,
    CorrelationBound,
    LsqFit,
    MomentIdentityReport,
    closed_form_moments,
    correlation_lower_bound,
    expected_v_bound,
    lsq_fit,
    moment_identity_profile,
    variance_factor,
    verify_moment_identities,
)
from .montecarlo import HaarPairStats, pair_stats_over_haar, subspace_coords
from .designs import (
    CandidateSet,
    builtin_design,
    builtin_names,
    covering_radius_estimate,
    cubature_strength_test,
    equiangular_lines_design,
    haar_candidate_set,
    load_design,
    save_design,
)
from .selection import RULES, SelectionResult, pareto_scan, select
from .atloss import (
    ATLossSpec,
    FeatureStack,
    FeatureTransform,
    FixedProjector,
    IdentityPolicy,
    PCAOnTargets,
    ResamplePerCall,
    builtin_transforms,
    gaussian_highpass_transform,
    identity_transform,
    linear_transform,
    log_transform,
    loss,
    loss_and_gradient,
    loss_gradient,
    policy_from_json_dict,
    prewitt_transform,
    stack_from_descriptors,
)

__version__ = "0.1.0"

__all__ = [
    "COINCIDENT_FLOOR",
    "COINCIDENT_FLOOR",
    "ATLossSpec",
    "CSVFormatError",
    "CandidateSet",
    "ClosedFormMoments",
    "CorrelationBound",
    "DegenerateDataError",
    "DesignFileError",
    "DimensionError",
    "DistinctPointsError",
    "EmptyBandError",
    "FeatureStack",
    "FeatureTransform",
    "FixedProjector",
    "HaarPairStats",
    "IdentityPolicy",
    "JLParams",
    "LsqFit",
    "MomentIdentityReport",
    "PCAOnTargets",
    "PointCloud",
    "ProjBalanceError",
    "ProjectionSummary",
    "Projector",
    "RULES",
    "ResamplePerCall",
    "SelectionResult",
    "StiefelFrame",
    "SubspaceTieWarning",
    "TransformError",
    "UndefinedFitError",
    "as_generator",
    "builtin_design",
    "builtin_names",
    "builtin_transforms",
    "closed_form_moments",
    "correlation_lower_bound",
    "covering_radius_estimate",
    "cubature_strength_test",
    "equiangular_lines_design",
    "expected_v_bound",
    "frame_frobenius_distance",
    "frame_from_json_dict",
    "frame_to_json_dict",
    "frame_to_projector",
    "frobenius_distance",
    "gaussian_highpass_transform",
    "gjl_delta",
    "haar_candidate_set",
    "haar_sample",
    "identity_transform",
    "jl_min_dimension",
    "jl_satisfied",
    "jl_theorem_params",
    "linear_transform",
    "load_cloud_csv",
    "load_design",
    "load_frame_csv",
    "load_frame_json",
    "log_transform",
    "loss",
    "loss_and_gradient",
    "loss_gradient",
    "lsq_fit",
    "moment_identity_profile",
    "pair_stats_over_haar",
    "pareto_scan",
    "pca_frame",
    "pca_projector",
    "policy_from_json_dict",
    "prewitt_transform",
    "project_affine",
    "relative_distortions",
    "sample_frames",
    "save_cloud_csv",
    "save_design",
    "save_frame_csv",
    "save_frame_json",
    "select",
    "stack_from_descriptors",
    "subspace_coords",
    "summarize",
    "summarize_frames",
    "total_variance",
    "variance_factor",
    "verify_moment_identities",
]
