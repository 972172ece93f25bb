"""Acceptance suite: one test per release criterion, each printing a
PASS line (run with -s to see them). Tolerances are fixed here and must
not be loosened.
"""

import json
import math
import time

import numpy as np
import pytest

from pipeseg.dataset import split_manifest, split_sizes, DatasetManifest
from pipeseg.enhance import ClaheConfig, DehazeConfig, clahe, compute_tile_luts, dehaze
from pipeseg.image import ImageBuffer, from_plane
from pipeseg.masks import BinaryMask, extract_boundary
from pipeseg.metrics import dice, hausdorff, iou, mad
from pipeseg.detection import APResult, CurvePoint
from pipeseg.metrics import DatasetMetrics
from pipeseg.report import render_table
from pipeseg.runner import RunConfig, RunResult, run_evaluate

from conftest import make_eval_dataset, rect_poly_norm


def _report(name):
    print(f"\nACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------
# 1. Metric oracle suite: >= 200 random pairs up to 32x32, HD/MAD vs
#    brute force within 1e-9, Dice/IoU exact, under 10 s.
# ---------------------------------------------------------------------------

def _directed_min_distances(src_pts, dst_pts):
    """All-pairs brute force: for each src point the min distance into dst."""
    d2 = (
        (src_pts[:, None, 0] - dst_pts[None, :, 0]) ** 2
        + (src_pts[:, None, 1] - dst_pts[None, :, 1]) ** 2
    )
    return np.sqrt(d2.min(axis=1).astype(np.float64))


def test_metric_oracle_suite():
    rng = np.random.default_rng(42)
    start = time.perf_counter()
    checked = 0
    while checked < 200:
        w = int(rng.integers(2, 33))
        h = int(rng.integers(2, 33))
        a = rng.random((h, w)) < rng.uniform(0.05, 0.8)
        b = rng.random((h, w)) < rng.uniform(0.05, 0.8)
        if not a.any():
            a[rng.integers(0, h), rng.integers(0, w)] = True
        if not b.any():
            b[rng.integers(0, h), rng.integers(0, w)] = True
        ma, mb = BinaryMask(a), BinaryMask(b)

        # set-count arithmetic, independently of the metric implementations
        sa = {(x, y) for y, x in zip(*np.nonzero(a))}
        sb = {(x, y) for y, x in zip(*np.nonzero(b))}
        inter = len(sa & sb)
        union = len(sa | sb)
        assert dice(ma, mb) == 2 * inter / (len(sa) + len(sb))
        assert iou(ma, mb) == inter / union

        pa = extract_boundary(ma).points
        pb = extract_boundary(mb).points
        d_ab = _directed_min_distances(pa, pb)
        d_ba = _directed_min_distances(pb, pa)
        hd_want = max(d_ab.max(), d_ba.max())
        mad_want = (d_ab.sum() + d_ba.sum()) / (len(pa) + len(pb))
        assert abs(hausdorff(ma, mb) - hd_want) < 1e-9
        assert abs(mad(ma, mb) - mad_want) < 1e-9
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"metric oracle suite took {elapsed:.1f}s"
    _report(f"metric oracle suite ({checked} pairs, {elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 2. Dice-IoU identity on 1,000 random pairs within 1e-12.
# ---------------------------------------------------------------------------

def test_dice_iou_identity_thousand_pairs():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        w = int(rng.integers(1, 24))
        h = int(rng.integers(1, 24))
        a = BinaryMask(rng.random((h, w)) < rng.uniform(0, 1))
        b = BinaryMask(rng.random((h, w)) < rng.uniform(0, 1))
        d, j = dice(a, b), iou(a, b)
        worst = max(worst, abs(d - 2 * j / (1 + j)))
    assert worst < 1e-12
    _report(f"dice-iou identity (1000 pairs, max deviation {worst:.2e})")


# ---------------------------------------------------------------------------
# 3. Perfect-prediction end-to-end on a 130-image 640x640 manifest.
# ---------------------------------------------------------------------------

def test_perfect_prediction_end_to_end(tmp_path):
    rng = np.random.default_rng(2024)
    w = h = 640
    specs = []
    for i in range(130):
        x0 = int(rng.integers(0, 200))
        y0 = int(rng.integers(0, 200))
        x1 = int(rng.integers(x0 + 60, 640))
        y1 = int(rng.integers(y0 + 60, 640))
        if i % 3 == 0:
            gt = rect_poly_norm(x0, y0, x1, y1, w, h)
        else:
            # irregular quadrilateral
            gt = [
                (x0 / w, y0 / h),
                (x1 / w, (y0 + 11) / h),
                ((x0 + x1) / 2 / w, y1 / h),
                (x0 / w, (y0 + y1) / 2 / h),
            ]
        pred_px = [(x * w, y * h) for x, y in gt]
        specs.append({"gt": [gt], "preds": [(1.0, pred_px)]})

    start = time.perf_counter()
    manifest, preds = make_eval_dataset(tmp_path / "d640", specs, w, h)
    result = run_evaluate(
        RunConfig(
            manifest_path=str(manifest),
            predictions_dir=str(preds),
            output_dir=str(tmp_path / "out"),
        )
    )
    elapsed = time.perf_counter() - start
    m = result.dataset_metrics
    assert m.image_count == 130
    assert m.miou == 1.0 and m.dice == 1.0
    assert m.hd_mean == 0.0 and m.mad_mean == 0.0
    assert result.ap.ap50_95 == 1.0
    assert result.best_f1.f1 == 1.0
    assert elapsed < 60.0, f"end-to-end took {elapsed:.1f}s"
    _report(f"perfect-prediction end-to-end (130 images, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 4. Split arithmetic: 647 -> 388/129/130, sequential partition.
# ---------------------------------------------------------------------------

def test_split_arithmetic_647():
    assert split_sizes(647) == (388, 129, 130)
    entries = [
        {"index": i, "image_path": f"{i:06d}.jpg", "label_path": f"{i:06d}.txt",
         "width": 640, "height": 640, "split": None}
        for i in range(647)
    ]
    manifest = DatasetManifest.from_dict(
        {"source_root": ".", "created_at": "t", "excluded": [], "entries": entries}
    )
    split = split_manifest(manifest)
    counts = {"train": 0, "val": 0, "test": 0}
    for e in split.entries:
        counts[e.split] += 1
    assert (counts["train"], counts["val"], counts["test"]) == (388, 129, 130)
    # sequential: indices partition into contiguous ranges
    assert all(e.split == "train" for e in split.entries[:388])
    assert all(e.split == "val" for e in split.entries[388:517])
    assert all(e.split == "test" for e in split.entries[517:])
    assert sorted(e.index for e in split.entries) == list(range(647))
    _report("split arithmetic (647 -> 388/129/130)")


# ---------------------------------------------------------------------------
# 5. CLAHE oracle: single-tile unclipped equals the hand-computed global
#    equalization LUT exactly; tile LUTs monotone on 100 random images.
# ---------------------------------------------------------------------------

def test_clahe_oracle_and_monotonicity():
    # 8x8 four-level image: 11 of 30, 20 of 80, 25 of 140, 8 of 220
    # cdf 11/31/56/64 -> LUT round(255*cdf/64): 44, 124, 223, 255
    values = np.array([30] * 11 + [80] * 20 + [140] * 25 + [220] * 8,
                      dtype=np.uint8).reshape(8, 8)
    hand_lut = {30: 44, 80: 124, 140: 223, 220: 255}
    out = clahe(from_plane(values), ClaheConfig(tiles_x=1, tiles_y=1, clip_limit=float("inf")))
    want = np.vectorize(hand_lut.get)(values)
    assert np.array_equal(out.plane(), want)

    rng = np.random.default_rng(13)
    for _ in range(100):
        w = int(rng.integers(16, 64))
        h = int(rng.integers(16, 64))
        plane = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        cfg = ClaheConfig(
            tiles_x=int(rng.integers(1, 9)),
            tiles_y=int(rng.integers(1, 9)),
            clip_limit=float(rng.uniform(0.5, 8.0)),
        )
        luts = compute_tile_luts(plane, cfg)
        assert (np.diff(luts.astype(int), axis=2) >= 0).all()
    _report("clahe hand-computed equalization oracle + LUT monotonicity (100 images)")


# ---------------------------------------------------------------------------
# 6. Dehaze inversion on 640x640 synthetic haze, under 5 s.
# ---------------------------------------------------------------------------

def test_dehaze_inversion_640():
    rng = np.random.default_rng(99)
    w = h = 640
    clean = rng.integers(0, 255, size=(h, w, 3), dtype=np.uint8)
    clean[::5, ::5, 2] = 0          # zero dark channel in every patch
    clean[0, 1] = (255, 255, 255)   # anchors the atmospheric light estimate
    hazy = ImageBuffer(np.rint(0.6 * clean.astype(np.float64) + 0.4 * 255.0).astype(np.uint8))

    cfg = DehazeConfig(omega=1.0)
    start = time.perf_counter()
    out = dehaze(hazy, cfg)
    elapsed = time.perf_counter() - start
    err = np.abs(out.data.astype(int) - clean.astype(int))
    r = cfg.patch // 2
    interior = err[r:-r, r:-r]
    frac = (interior <= 3).mean()
    assert frac >= 0.99, f"only {frac:.4f} of interior within 3 levels"
    assert elapsed < 5.0, f"dehaze took {elapsed:.2f}s"
    _report(f"dehaze inversion ({frac * 100:.2f}% within 3 levels, {elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 7. Report fidelity: byte-exact reproduction of stored table rows.
# ---------------------------------------------------------------------------

def _stored_result(label, enhancement, miou, dice_v, hd, mad_v):
    return RunResult(
        label=label,
        enhancement=enhancement,
        dataset_metrics=DatasetMetrics(miou, dice_v, hd, mad_v, 130, 0),
        ap=APResult(0.0, 0.0, ()),
        best_f1=CurvePoint(0.0, 0.0, 0.0, 0.0),
    )


def test_report_fidelity():
    t2 = render_table(
        [_stored_result("YOLOv11n", "Original", 0.7098, 0.8129, 307.59, 24.94)],
        style="table2",
    )
    assert "YOLOv11n,0.7098,0.8129,307.59,24.94" in t2.csv.splitlines()
    t3 = render_table(
        [_stored_result("YOLOv8n", "CLAHE", 0.6688, 0.7717, 399.87, 61.73)],
        style="table3",
    )
    assert "YOLOv8n,CLAHE,0.6688,0.7717,399.87,61.73" in t3.csv.splitlines()
    _report("report fidelity (byte-exact table rows)")


# ---------------------------------------------------------------------------
# 8. Determinism: identical bytes across repeat runs and worker counts.
# ---------------------------------------------------------------------------

def test_evaluate_determinism(tmp_path):
    rng = np.random.default_rng(5)
    w, h = 320, 240
    specs = []
    for i in range(12):
        x0, y0 = int(rng.integers(0, 80)), int(rng.integers(0, 60))
        x1, y1 = int(rng.integers(150, 320)), int(rng.integers(120, 240))
        gt = rect_poly_norm(x0, y0, x1, y1, w, h)
        jx, jy = int(rng.integers(0, 30)), int(rng.integers(0, 25))
        pred = [((x0 + jx), (y0 + jy)), (x1, y0 + jy), (x1, y1), (x0 + jx, y1)]
        conf = round(float(rng.uniform(0.1, 1.0)), 3)
        specs.append({"gt": [gt], "preds": [(conf, pred)]})
    manifest, preds = make_eval_dataset(tmp_path / "d", specs, w, h)

    blobs = []
    for name, workers in (("r1", 1), ("r2", 1), ("r8", 8)):
        out = tmp_path / name
        run_evaluate(
            RunConfig(
                manifest_path=str(manifest),
                predictions_dir=str(preds),
                output_dir=str(out),
                workers=workers,
            )
        )
        blobs.append(
            tuple((out / f).read_bytes() for f in ("records.jsonl", "curves.csv", "result.json"))
        )
    assert blobs[0] == blobs[1] == blobs[2]
    _report("determinism (repeat runs and 1 vs 8 workers byte-identical)")
