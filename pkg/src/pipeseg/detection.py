"""Instance-level evaluation: greedy matching, confidence sweeps, average
precision, and fusion of instance predictions into semantic masks.

Matching is COCO-style: predictions are taken in descending confidence and
each claims the unmatched ground-truth instance of highest mask-IoU above
the threshold. Average precision uses the 101-point interpolated
convention at mask-IoU thresholds 0.50:0.05:0.95.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .masks import BinaryMask, PolygonContour, decode_rle, mask_union, rasterize_polygon

IOU_RANGE = tuple((50 + 5 * i) / 100.0 for i in range(10))


@dataclass(frozen=True)
class PredictionInstance:
    """One detected object: id 0 is the pipe class; geometry is either a
    pixel-space polygon or run lengths of the full image grid."""

    image_id: str
    class_id: int
    confidence: float
    polygon: Optional[PolygonContour] = None
    rle: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if (self.polygon is None) == (self.rle is None):
            raise ValueError("exactly one of polygon or rle must be set")


def instance_mask(inst: PredictionInstance, w: int, h: int) -> BinaryMask:
    if inst.polygon is not None:
        return rasterize_polygon(inst.polygon, w, h)
    return decode_rle(inst.rle, w, h)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class APResult:
    ap50: float
    ap50_95: float
    per_threshold: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one image's predictions against its GT instances.

    order[i] is the input index of the i-th prediction in confidence-
    descending order; tp/matched_gt align with that order.
    """

    order: tuple[int, ...]
    tp: tuple[bool, ...]
    matched_gt: tuple[Optional[int], ...]
    gt_matched: tuple[bool, ...]


@dataclass
class ImageInstances:
    """Per-image evaluation unit: GT instance masks plus predictions."""

    image_id: str
    width: int
    height: int
    gt_masks: list[BinaryMask]
    predictions: list[PredictionInstance]

    def prediction_masks(self) -> list[BinaryMask]:
        if not hasattr(self, "_pred_masks"):
            self._pred_masks = [
                instance_mask(p, self.width, self.height) for p in self.predictions
            ]
        return self._pred_masks


def _pair_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Plain mask IoU for matching; degenerate empty-vs-empty scores 0 so
    zero-area instances can never claim a match."""
    inter = int((a.data & b.data).sum())
    union = a.foreground_count + b.foreground_count - inter
    return inter / union if union else 0.0


def _confidence_order(preds: Sequence[PredictionInstance]) -> list[int]:
    return sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))


def match_instances(
    preds: Sequence[PredictionInstance],
    gts: Sequence[BinaryMask],
    iou_thr: float,
    pred_masks: Optional[Sequence[BinaryMask]] = None,
) -> MatchResult:
    """Greedy confidence-ordered matching at one mask-IoU threshold."""
    if not 0.0 < iou_thr < 1.0:
        raise ValueError("iou_thr must be in (0, 1)")
    if len({p.image_id for p in preds}) > 1:
        raise ValueError("predictions span multiple images")
    if pred_masks is None:
        if preds and not gts:
            pred_masks = []
        else:
            dims = {(g.width, g.height) for g in gts}
            if len(dims) > 1:
                raise ValueError("ground-truth masks have mixed dimensions")
            w, h = dims.pop() if dims else (0, 0)
            pred_masks = [instance_mask(p, w, h) for p in preds]

    order = _confidence_order(preds)
    taken = [False] * len(gts)
    tp: list[bool] = []
    matched: list[Optional[int]] = []
    for i in order:
        best_j, best_iou = None, 0.0
        for j, g in enumerate(gts):
            if taken[j]:
                continue
            v = _pair_iou(pred_masks[i], g)
            if v >= iou_thr and v > best_iou:
                best_j, best_iou = j, v
        if best_j is None:
            tp.append(False)
            matched.append(None)
        else:
            taken[best_j] = True
            tp.append(True)
            matched.append(best_j)
    return MatchResult(
        order=tuple(order),
        tp=tuple(tp),
        matched_gt=tuple(matched),
        gt_matched=tuple(taken),
    )


def _scored_matches(
    images: Sequence[ImageInstances], iou_thr: float
) -> tuple[np.ndarray, np.ndarray, int]:
    """All predictions matched greedily per image, merged dataset-wide.

    Returns (confidences, tp flags) sorted by confidence descending with
    ties broken by image_id then instance index, plus the GT count.
    Greedy matching in confidence order has a prefix property: dropping
    every prediction below a confidence cutoff leaves the surviving
    matches unchanged, so one full matching serves every cutoff.
    """
    confs: list[float] = []
    tps: list[bool] = []
    keys: list[tuple] = []
    n_gt = 0
    for img in images:
        n_gt += len(img.gt_masks)
        res = match_instances(
            img.predictions, img.gt_masks, iou_thr, pred_masks=img.prediction_masks()
        )
        for rank, i in enumerate(res.order):
            confs.append(img.predictions[i].confidence)
            tps.append(res.tp[rank])
            keys.append((-img.predictions[i].confidence, img.image_id, i))
    order = sorted(range(len(keys)), key=lambda k: keys[k])
    conf_sorted = np.array([confs[k] for k in order], dtype=np.float64)
    tp_sorted = np.array([tps[k] for k in order], dtype=bool)
    return conf_sorted, tp_sorted, n_gt


def _prf(tp: int, n_pred: int, n_gt: int) -> tuple[float, float, float]:
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_gt if n_gt else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def confidence_curve(
    images: Sequence[ImageInstances],
    iou_thr: float = 0.5,
    step: float = 0.001,
) -> tuple[list[CurvePoint], CurvePoint]:
    """P/R/F1 swept over confidence thresholds {0, step, ..., 1}.

    Returns all curve points plus the best-F1 point (lowest threshold on
    ties). Thresholds are generated as exact rationals i/n so coarser
    sweeps are subsamples of finer ones.
    """
    if not 0.0 < step <= 0.5:
        raise ValueError("step must be in (0, 0.5]")
    n_gt = sum(len(img.gt_masks) for img in images)
    if n_gt == 0:
        raise ValueError("no ground-truth instances in the dataset")
    conf, tp, _ = _scored_matches(images, iou_thr)
    cum_tp = np.cumsum(tp)

    n = int(round(1.0 / step))
    points: list[CurvePoint] = []
    best: CurvePoint | None = None
    for i in range(n + 1):
        t = i / n
        # conf is sorted descending; predictions kept are conf >= t
        kept = int(np.searchsorted(-conf, -t, side="right"))
        tp_k = int(cum_tp[kept - 1]) if kept else 0
        p, r, f1 = _prf(tp_k, kept, n_gt)
        pt = CurvePoint(threshold=t, precision=p, recall=r, f1=f1)
        points.append(pt)
        if best is None or pt.f1 > best.f1:
            best = pt
    return points, best


def average_precision(images: Sequence[ImageInstances], iou_thr: float = 0.5) -> float:
    """101-point interpolated AP over the confidence-ranked PR curve."""
    n_gt = sum(len(img.gt_masks) for img in images)
    if n_gt == 0:
        raise ValueError("no ground-truth instances in the dataset")
    conf, tp, _ = _scored_matches(images, iou_thr)
    if conf.size == 0:
        return 0.0
    cum_tp = np.cumsum(tp)
    ranks = np.arange(1, conf.size + 1)
    precision = cum_tp / ranks
    recall = cum_tp / n_gt
    # monotone envelope from the right
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    grid = np.arange(101) / 100.0
    idx = np.searchsorted(recall, grid, side="left")
    interp = np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)
    return float(interp.mean())


def map_range(images: Sequence[ImageInstances]) -> APResult:
    """AP at mask-IoU thresholds 0.50:0.05:0.95 and their mean."""
    per = tuple((thr, average_precision(images, thr)) for thr in IOU_RANGE)
    ap50 = per[0][1]
    return APResult(ap50=ap50, ap50_95=sum(v for _, v in per) / len(per), per_threshold=per)


def semantic_mask_at_threshold(
    instances: Sequence[PredictionInstance], t: float, w: int, h: int
) -> BinaryMask:
    """Union of instance masks with confidence >= t; empty mask if none."""
    if len({p.image_id for p in instances}) > 1:
        raise ValueError("instances span multiple images")
    kept = [instance_mask(p, w, h) for p in instances if p.confidence >= t]
    if not kept:
        return BinaryMask.empty(w, h)
    return mask_union(kept)
