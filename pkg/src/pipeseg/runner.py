"""Evaluation runs: wiring manifests, ground truth, and prediction files
into per-image records, dataset metrics, detection scores, and curve CSVs.

Per-image work fans out to a bounded thread pool; every reduction happens
in image_id order, so outputs are byte-identical regardless of worker
count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dataset import DatasetManifest, ManifestEntry, load_gt_masks
from .detection import (
    APResult,
    CurvePoint,
    ImageInstances,
    confidence_curve,
    map_range,
    semantic_mask_at_threshold,
)
from .enhance import EnhanceConfig, apply_enhancement
from .errors import EvaluationInputError
from .image import load_image, save_image
from .masks import mask_union, BinaryMask
from .metrics import DatasetMetrics, SemanticMetricsRecord, aggregate, evaluate_pair
from .predictions import load_prediction_file


@dataclass
class RunConfig:
    manifest_path: str
    predictions_dir: str
    output_dir: str
    enhancement_mode: str = "original"
    confidence_threshold: float = 0.5
    curve_step: float = 0.001
    iou_threshold: float = 0.5
    workers: int = 1
    label: str = "run"
    enhancement_label: Optional[str] = None
    enhance_config: EnhanceConfig = field(default_factory=EnhanceConfig)

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RunResult:
    label: str
    enhancement: str
    dataset_metrics: DatasetMetrics
    ap: APResult
    best_f1: CurvePoint

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "enhancement": self.enhancement,
            "dataset_metrics": vars(self.dataset_metrics),
            "ap": {
                "ap50": self.ap.ap50,
                "ap50_95": self.ap.ap50_95,
                "per_threshold": [list(p) for p in self.ap.per_threshold],
            },
            "best_f1": vars(self.best_f1),
        }

    @staticmethod
    def from_dict(doc: dict) -> "RunResult":
        return RunResult(
            label=doc["label"],
            enhancement=doc["enhancement"],
            dataset_metrics=DatasetMetrics(**doc["dataset_metrics"]),
            ap=APResult(
                ap50=doc["ap"]["ap50"],
                ap50_95=doc["ap"]["ap50_95"],
                per_threshold=tuple(tuple(p) for p in doc["ap"]["per_threshold"]),
            ),
            best_f1=CurvePoint(**doc["best_f1"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @staticmethod
    def load(path) -> "RunResult":
        return RunResult.from_dict(json.loads(Path(path).read_text()))


def _evaluation_entries(manifest: DatasetManifest) -> list[ManifestEntry]:
    """Test-split entries when a split is assigned, otherwise everything."""
    if any(e.split is not None for e in manifest.entries):
        entries = [e for e in manifest.entries if e.split == "test"]
    else:
        entries = list(manifest.entries)
    return sorted(entries, key=lambda e: e.image_id)


@dataclass
class _ImageOutcome:
    record: SemanticMetricsRecord
    instances: ImageInstances


def _evaluate_entry(entry: ManifestEntry, root: Path, cfg: RunConfig) -> _ImageOutcome:
    image_id = entry.image_id
    pred_path = Path(cfg.predictions_dir) / f"{image_id}.json"
    if not pred_path.exists():
        raise EvaluationInputError(f"missing prediction file for image {image_id}: {pred_path}")
    doc = load_prediction_file(pred_path)
    if (doc.width, doc.height) != (entry.width, entry.height):
        raise EvaluationInputError(
            f"image {image_id}: prediction grid {doc.width}x{doc.height} "
            f"does not match manifest {entry.width}x{entry.height}"
        )
    w, h = entry.width, entry.height
    gt_instance_masks = load_gt_masks(root / entry.label_path, w, h)
    gt_mask = mask_union(gt_instance_masks) if gt_instance_masks else BinaryMask.empty(w, h)
    pred_mask = semantic_mask_at_threshold(doc.instances, cfg.confidence_threshold, w, h)
    record = evaluate_pair(pred_mask, gt_mask, image_id)

    if cfg.enhancement_mode != "original":
        # archived for inference adapters; masks are geometry and stay untouched
        enhanced_dir = Path(cfg.output_dir) / "enhanced"
        enhanced_dir.mkdir(parents=True, exist_ok=True)
        buf = load_image(root / entry.image_path)
        out = apply_enhancement(buf, cfg.enhancement_mode, cfg.enhance_config)
        save_image(out, enhanced_dir / f"{image_id}.png", format="png")

    return _ImageOutcome(
        record=record,
        instances=ImageInstances(
            image_id=image_id,
            width=w,
            height=h,
            gt_masks=gt_instance_masks,
            predictions=list(doc.instances),
        ),
    )


def _map_entries(entries, root, cfg) -> list[_ImageOutcome]:
    if cfg.workers == 1:
        return [_evaluate_entry(e, root, cfg) for e in entries]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda e: _evaluate_entry(e, root, cfg), entries))


def _write_curves_csv(path, points: list[CurvePoint]) -> None:
    lines = ["threshold,precision,recall,f1"]
    lines += [f"{p.threshold!r},{p.precision!r},{p.recall!r},{p.f1!r}" for p in points]
    Path(path).write_text("\n".join(lines) + "\n")


def run_evaluate(cfg: RunConfig) -> RunResult:
    """Full evaluation pass over the test split.

    Persists per-image records (records.jsonl), the confidence sweep
    (curves.csv), and the run summary (result.json) under cfg.output_dir.
    """
    manifest = DatasetManifest.load(cfg.manifest_path)
    root = Path(cfg.manifest_path).parent
    entries = _evaluation_entries(manifest)
    if not entries:
        raise EvaluationInputError("manifest has no evaluation entries")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    outcomes = _map_entries(entries, root, cfg)
    outcomes.sort(key=lambda o: o.record.image_id)
    records = [o.record for o in outcomes]
    images = [o.instances for o in outcomes]

    dataset_metrics = aggregate(records)
    ap = map_range(images)
    points, best = confidence_curve(images, cfg.iou_threshold, cfg.curve_step)

    (out_dir / "records.jsonl").write_text(
        "".join(r.to_json_line() + "\n" for r in records)
    )
    _write_curves_csv(out_dir / "curves.csv", points)
    result = RunResult(
        label=cfg.label,
        enhancement=cfg.enhancement_label or cfg.enhancement_mode,
        dataset_metrics=dataset_metrics,
        ap=ap,
        best_f1=best,
    )
    result.save(out_dir / "result.json")
    return result


def run_curves(cfg: RunConfig) -> tuple[list[CurvePoint], CurvePoint]:
    """Confidence sweep only; writes curves.csv and returns the points."""
    manifest = DatasetManifest.load(cfg.manifest_path)
    root = Path(cfg.manifest_path).parent
    entries = _evaluation_entries(manifest)
    if not entries:
        raise EvaluationInputError("manifest has no evaluation entries")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    outcomes = _map_entries(entries, root, cfg)
    outcomes.sort(key=lambda o: o.record.image_id)
    images = [o.instances for o in outcomes]
    points, best = confidence_curve(images, cfg.iou_threshold, cfg.curve_step)
    _write_curves_csv(out_dir / "curves.csv", points)
    return points, best
