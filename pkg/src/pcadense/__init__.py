"""Sparse-to-dense depth map interpolation with a learned PCA prior."""

from .densify import (
    MapConfig,
    Reconstruction,
    densify,
    map_estimate,
    nearest_neighbor_densify,
    restrict_basis,
    uncertainty_image,
)
from .errors import (
    BadMagicError,
    DegenerateTrainingSetError,
    FormatError,
    InvariantViolationError,
    NumericalError,
    ParseError,
    PcadenseError,
    TruncatedPayloadError,
    ValidationError,
)
from .geometry import (
    CameraModel,
    EvalReport,
    RigidTransform,
    backproject,
    disparity_to_depth,
    depth_to_disparity,
    error_2d,
    error_3d,
    evaluate_frame,
    project_pi,
    select_samples,
    transform_point,
)
from .pca import (
    PcaBasis,
    compute_mean,
    cumulative_variance_fraction,
    learn_basis,
    project_coeffs,
    reconstruct_coeffs,
    truncate_basis,
)
from .preprocess import box_blur, fill_invalid_nearest
from .synth import SceneParams, generate_scene, generate_training_set
from .types import DepthMap, SparseMeasurement, TrainingSet

__version__ = "0.1.0"

__all__ = [
    "MapConfig",
    "Reconstruction",
    "densify",
    "map_estimate",
    "nearest_neighbor_densify",
    "restrict_basis",
    "uncertainty_image",
    "CameraModel",
    "EvalReport",
    "RigidTransform",
    "backproject",
    "disparity_to_depth",
    "depth_to_disparity",
    "error_2d",
    "error_3d",
    "evaluate_frame",
    "project_pi",
    "select_samples",
    "transform_point",
    "PcaBasis",
    "compute_mean",
    "cumulative_variance_fraction",
    "learn_basis",
    "project_coeffs",
    "reconstruct_coeffs",
    "truncate_basis",
    "box_blur",
    "fill_invalid_nearest",
    "SceneParams",
    "generate_scene",
    "generate_training_set",
    "DepthMap",
    "SparseMeasurement",
    "TrainingSet",
    "PcadenseError",
    "ValidationError",
    "DegenerateTrainingSetError",
    "NumericalError",
    "FormatError",
    "BadMagicError",
    "TruncatedPayloadError",
    "InvariantViolationError",
    "ParseError",
]
