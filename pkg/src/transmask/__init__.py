"""Self-supervised masking, reference losses and evaluation for transparent-object depth completion."""
from .baseline import CompletionResult, complete_depth, nearest_fill
from .core import (
    BinaryMask,
    CameraIntrinsics,
    ConfigError,
    DepthMap,
    DimensionError,
    FormatError,
    MaskingConfig,
    NormalMap,
    RgbImage,
    TrainingPair,
    TransmaskError,
    new_raster,
)
from .geometry import backproject, normal_cosine_map, normals_from_depth
from .losses import LossBreakdown, region_loss, self_supervised_loss, supervised_loss
from .maskgen import MaskSet, artificial_hole, compose_final_mask, erode, synthesize_pair, union
from .metrics import EmptyEvaluationError, MetricsReport, error_map, evaluate

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "CameraIntrinsics",
    "CompletionResult",
    "ConfigError",
    "DepthMap",
    "DimensionError",
    "EmptyEvaluationError",
    "FormatError",
    "LossBreakdown",
    "MaskSet",
    "MaskingConfig",
    "MetricsReport",
    "NormalMap",
    "RgbImage",
    "TrainingPair",
    "TransmaskError",
    "artificial_hole",
    "backproject",
    "complete_depth",
    "compose_final_mask",
    "erode",
    "error_map",
    "evaluate",
    "nearest_fill",
    "new_raster",
    "normal_cosine_map",
    "normals_from_depth",
    "region_loss",
    "self_supervised_loss",
    "supervised_loss",
    "synthesize_pair",
    "union",
]
