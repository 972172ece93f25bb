"""Prediction interchange files: one JSON document per image.

Schema (shared bit-exactly with any external inference adapter):

    {
      "image": "<image file name>",
      "width": W, "height": H,
      "instances": [
        {"class_id": 0, "confidence": 0.87, "polygon": [[x, y], ...]},
        {"class_id": 0, "confidence": 0.41, "rle": [c0, c1, ...]}
      ]
    }

Polygons are pixel-space vertex lists; RLE counts are row-major with the
background run first and must sum to W*H.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detection import PredictionInstance
from .errors import PredictionFileError
from .masks import PolygonContour


@dataclass(frozen=True)
class PredictionDocument:
    image: str
    width: int
    height: int
    instances: tuple[PredictionInstance, ...]


def _require(cond: bool, path, message: str):
    if not cond:
        raise PredictionFileError(f"{path}: {message}")


def _parse_instance(obj: dict, idx: int, doc_path, image_id: str, w: int, h: int) -> PredictionInstance:
    where = f"instances[{idx}]"
    _require(isinstance(obj, dict), doc_path, f"{where} is not an object")
    _require("class_id" in obj, doc_path, f"{where} missing class_id")
    _require("confidence" in obj, doc_path, f"{where} missing confidence")
    class_id = obj["class_id"]
    conf = obj["confidence"]
    _require(isinstance(class_id, int) and class_id >= 0, doc_path, f"{where} class_id must be a nonnegative integer")
    _require(isinstance(conf, (int, float)) and 0.0 <= conf <= 1.0, doc_path, f"{where} confidence must be in [0, 1]")
    has_poly = "polygon" in obj
    has_rle = "rle" in obj
    _require(has_poly != has_rle, doc_path, f"{where} needs exactly one of polygon or rle")
    if has_poly:
        poly = obj["polygon"]
        _require(
            isinstance(poly, list) and len(poly) >= 3
            and all(isinstance(p, list) and len(p) == 2 for p in poly),
            doc_path,
            f"{where} polygon must be a list of >= 3 [x, y] pairs",
        )
        try:
            contour = PolygonContour(np.array(poly, dtype=np.float64))
        except (ValueError, TypeError) as exc:
            raise PredictionFileError(f"{doc_path}: {where} bad polygon: {exc}") from exc
        return PredictionInstance(image_id=image_id, class_id=class_id, confidence=float(conf), polygon=contour)
    rle = obj["rle"]
    _require(
        isinstance(rle, list) and all(isinstance(c, int) and c >= 0 for c in rle),
        doc_path,
        f"{where} rle must be a list of nonnegative integers",
    )
    _require(
        sum(rle) == w * h,
        doc_path,
        f"{where} rle sums to {sum(rle)}, expected {w}x{h}={w * h}",
    )
    return PredictionInstance(image_id=image_id, class_id=class_id, confidence=float(conf), rle=tuple(rle))


def load_prediction_file(path) -> PredictionDocument:
    """Parse and validate one prediction JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise PredictionFileError(f"{path}: unreadable: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PredictionFileError(f"{path}: invalid JSON: {exc}") from exc
    _require(isinstance(doc, dict), path, "top level must be an object")
    for key in ("image", "width", "height", "instances"):
        _require(key in doc, path, f"missing key {key!r}")
    w, h = doc["width"], doc["height"]
    _require(isinstance(w, int) and w >= 1, path, "width must be a positive integer")
    _require(isinstance(h, int) and h >= 1, path, "height must be a positive integer")
    _require(isinstance(doc["image"], str) and doc["image"], path, "image must be a nonempty string")
    _require(isinstance(doc["instances"], list), path, "instances must be a list")
    image_id = path.stem
    instances = tuple(
        _parse_instance(obj, i, path, image_id, w, h)
        for i, obj in enumerate(doc["instances"])
    )
    return PredictionDocument(image=doc["image"], width=w, height=h, instances=instances)
