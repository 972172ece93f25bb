"""pipeseg: dataset preparation, underwater image enhancement, and
segmentation-quality evaluation for pipeline inspection imagery."""

from .image import ImageBuffer, load_image, resize_bilinear, save_image
from .masks import (
    BinaryMask,
    BoundarySet,
    DistanceField,
    PolygonContour,
    decode_rle,
    distance_transform,
    encode_rle,
    extract_boundary,
    mask_union,
    rasterize_polygon,
)
from .metrics import (
    DatasetMetrics,
    SemanticMetricsRecord,
    aggregate,
    dice,
    evaluate_pair,
    hausdorff,
    iou,
    mad,
)
from .detection import (
    APResult,
    CurvePoint,
    ImageInstances,
    PredictionInstance,
    average_precision,
    confidence_curve,
    map_range,
    match_instances,
    semantic_mask_at_threshold,
)
from .enhance import (
    ClaheConfig,
    DehazeConfig,
    EnhanceConfig,
    GammaConfig,
    apply_enhancement,
    clahe,
    dehaze,
    gamma_correct,
)
from .dataset import DatasetManifest, gt_semantic_mask, ingest, parse_yolo_seg_label, split_manifest
from .runner import RunConfig, RunResult, run_curves, run_evaluate
from .report import RenderedTable, render_table

__version__ = "0.1.0"
