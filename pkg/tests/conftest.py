import json
from pathlib import Path

import numpy as np
import pytest

from pipeseg.masks import BinaryMask


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def rect_poly_norm(x0, y0, x1, y1, w, h):
    """Axis-aligned rectangle in normalized coordinates; rasterizes to the
    pixel block [x0, x1) x [y0, y1)."""
    return [(x0 / w, y0 / h), (x1 / w, y0 / h), (x1 / w, y1 / h), (x0 / w, y1 / h)]


def write_label(path, polys_norm, class_id=0):
    lines = []
    for poly in polys_norm:
        coords = " ".join(f"{x:.10f} {y:.10f}" for x, y in poly)
        lines.append(f"{class_id} {coords}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def write_prediction(path, image_name, w, h, instances):
    """instances: list of (confidence, polygon_px | ('rle', counts))"""
    objs = []
    for conf, geom in instances:
        obj = {"class_id": 0, "confidence": conf}
        if isinstance(geom, tuple) and geom and geom[0] == "rle":
            obj["rle"] = list(geom[1])
        else:
            obj["polygon"] = [[float(x), float(y)] for x, y in geom]
        objs.append(obj)
    doc = {"image": image_name, "width": w, "height": h, "instances": objs}
    Path(path).write_text(json.dumps(doc))


def make_eval_dataset(root, image_specs, w, h, split="test"):
    """Manifest + labels + prediction files for evaluation-only runs.

    image_specs: list of dicts with keys
        gt:    list of normalized polygons (ground truth)
        preds: list of (confidence, pixel polygon | ('rle', counts))
    No actual image files are written; evaluation without enhancement
    never decodes them. Returns (manifest_path, predictions_dir).
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    pred_dir = root / "preds"
    pred_dir.mkdir(exist_ok=True)
    entries = []
    for i, spec in enumerate(image_specs):
        stem = f"{i:06d}"
        write_label(root / f"{stem}.txt", spec["gt"])
        write_prediction(pred_dir / f"{stem}.json", f"{stem}.jpg", w, h, spec["preds"])
        entries.append(
            {
                "index": i,
                "image_path": f"{stem}.jpg",
                "label_path": f"{stem}.txt",
                "width": w,
                "height": h,
                "split": split,
            }
        )
    manifest = {
        "source_root": str(root),
        "created_at": "2024-01-01T00:00:00+00:00",
        "excluded": [],
        "entries": entries,
    }
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path, pred_dir


def random_mask(rng, w, h, density=0.3):
    return BinaryMask(rng.random((h, w)) < density)


def blob_mask(rng, w, h, n_blobs=2, radius=4):
    """Connected-ish blobs, more realistic than salt-and-pepper noise."""
    grid = np.zeros((h, w), dtype=bool)
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(n_blobs):
        cx = rng.uniform(0, w)
        cy = rng.uniform(0, h)
        r = rng.uniform(1.0, radius)
        grid |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    return BinaryMask(grid)
