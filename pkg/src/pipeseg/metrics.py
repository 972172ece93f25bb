"""Semantic segmentation quality metrics and dataset aggregation.

Per-image: Dice, IoU, boundary Hausdorff distance, and mean absolute
boundary distance between a predicted and a ground-truth mask. Dataset
level: pixel-summed (micro) Dice/mIoU and per-image (macro) HD/MAD means.

Empty-mask policy: a pair with both masks empty scores dice=iou=1 and
hd=mad=0 (perfect agreement); a pair where exactly one mask is empty
scores dice=iou=0 and hd=mad=sqrt(w^2+h^2), the image diagonal, so a
missed object costs instead of vanishing from the averages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .masks import BinaryMask, BoundarySet, distance_transform, extract_boundary


@dataclass(frozen=True)
class SemanticMetricsRecord:
    """One image's metrics plus the raw pixel counts they derive from."""

    image_id: str
    dice: float
    iou: float
    hd: float
    mad: float
    pred_pixels: int
    gt_pixels: int
    intersection_pixels: int

    def to_json_line(self) -> str:
        return json.dumps(asdict(self))

    @staticmethod
    def from_json_line(line: str) -> "SemanticMetricsRecord":
        return SemanticMetricsRecord(**json.loads(line))


@dataclass(frozen=True)
class DatasetMetrics:
    miou: float
    dice: float
    hd_mean: float
    mad_mean: float
    image_count: int
    undefined_hd_count: int


def _check_dims(pred: BinaryMask, gt: BinaryMask):
    if (pred.width, pred.height) != (gt.width, gt.height):
        raise ValueError(
            f"mask dimensions differ: {pred.width}x{pred.height} vs {gt.width}x{gt.height}"
        )


def _diagonal(mask: BinaryMask) -> float:
    return math.sqrt(mask.width * mask.width + mask.height * mask.height)


def dice(pred: BinaryMask, gt: BinaryMask) -> float:
    """2|P n G| / (|P| + |G|); 1.0 when both masks are empty."""
    _check_dims(pred, gt)
    p = pred.foreground_count
    g = gt.foreground_count
    if p + g == 0:
        return 1.0
    inter = int((pred.data & gt.data).sum())
    return 2.0 * inter / (p + g)


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """|P n G| / |P u G|; 1.0 when both masks are empty."""
    _check_dims(pred, gt)
    p = pred.foreground_count
    g = gt.foreground_count
    if p + g == 0:
        return 1.0
    inter = int((pred.data & gt.data).sum())
    return inter / (p + g - inter)


def _directed_sums(a: BoundarySet, field_b: np.ndarray) -> tuple[float, float]:
    """(max, sum) of distances from a's points into b's distance field."""
    d = field_b[a.points[:, 1], a.points[:, 0]]
    return float(d.max()), float(d.sum())


def _boundary_distances(pred: BinaryMask, gt: BinaryMask):
    """Directed boundary distance stats between two nonempty masks."""
    bp = extract_boundary(pred)
    bg = extract_boundary(gt)
    field_p = distance_transform(bp).values
    field_g = distance_transform(bg).values
    max_g_to_p, sum_g_to_p = _directed_sums(bg, field_p)
    max_p_to_g, sum_p_to_g = _directed_sums(bp, field_g)
    return max_g_to_p, sum_g_to_p, len(bg), max_p_to_g, sum_p_to_g, len(bp)


def hausdorff(pred: BinaryMask, gt: BinaryMask) -> float:
    """Max of the two directed sup-inf distances between boundary sets."""
    _check_dims(pred, gt)
    pe, ge = pred.is_empty(), gt.is_empty()
    if pe and ge:
        return 0.0
    if pe or ge:
        return _diagonal(pred)
    mg, _, _, mp, _, _ = _boundary_distances(pred, gt)
    return max(mg, mp)


def mad(pred: BinaryMask, gt: BinaryMask) -> float:
    """Symmetric mean of nearest-boundary distances, normalized by |G|+|P|."""
    _check_dims(pred, gt)
    pe, ge = pred.is_empty(), gt.is_empty()
    if pe and ge:
        return 0.0
    if pe or ge:
        return _diagonal(pred)
    _, sg, ng, _, sp, np_ = _boundary_distances(pred, gt)
    return (sg + sp) / (ng + np_)


def evaluate_pair(pred: BinaryMask, gt: BinaryMask, image_id: str) -> SemanticMetricsRecord:
    """All four metrics plus raw counts for one prediction/ground-truth pair."""
    _check_dims(pred, gt)
    p = pred.foreground_count
    g = gt.foreground_count
    inter = int((pred.data & gt.data).sum())
    if p + g == 0:
        d = j = 1.0
        hd_v = mad_v = 0.0
    elif p == 0 or g == 0:
        d = j = 0.0
        hd_v = mad_v = _diagonal(pred)
    else:
        d = 2.0 * inter / (p + g)
        j = inter / (p + g - inter)
        mg, sg, ng, mp, sp, np_ = _boundary_distances(pred, gt)
        hd_v = max(mg, mp)
        mad_v = (sg + sp) / (ng + np_)
    return SemanticMetricsRecord(
        image_id=image_id,
        dice=d,
        iou=j,
        hd=hd_v,
        mad=mad_v,
        pred_pixels=p,
        gt_pixels=g,
        intersection_pixels=inter,
    )


def aggregate(records: Sequence[SemanticMetricsRecord]) -> DatasetMetrics:
    """Dataset roll-up: micro Dice/mIoU from summed pixel counts, macro
    HD/MAD means over images.

    Pairs where both masks were empty carry no boundary information; they
    are excluded from the HD/MAD means and counted in undefined_hd_count.
    Records are summed in image_id order so the result is independent of
    input permutation.
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    ordered = sorted(records, key=lambda r: r.image_id)
    inter = sum(r.intersection_pixels for r in ordered)
    pred = sum(r.pred_pixels for r in ordered)
    gt = sum(r.gt_pixels for r in ordered)
    if pred + gt == 0:
        micro_dice = micro_iou = 1.0
    else:
        micro_dice = 2.0 * inter / (pred + gt)
        micro_iou = inter / (pred + gt - inter)
    defined = [r for r in ordered if r.pred_pixels + r.gt_pixels > 0]
    undefined = len(ordered) - len(defined)
    if defined:
        hd_mean = sum(r.hd for r in defined) / len(defined)
        mad_mean = sum(r.mad for r in defined) / len(defined)
    else:
        hd_mean = mad_mean = 0.0
    return DatasetMetrics(
        miou=micro_iou,
        dice=micro_dice,
        hd_mean=hd_mean,
        mad_mean=mad_mean,
        image_count=len(ordered),
        undefined_hd_count=undefined,
    )
