import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from pipeseg.cli import main
from pipeseg.dataset import DatasetManifest, parse_yolo_seg_label

from conftest import write_prediction


def _make_source(tmp_path, n=6, w=24, h=16):
    src = tmp_path / "src"
    src.mkdir()
    rng = np.random.default_rng(1)
    for i in range(n):
        name = f"frame_{chr(ord('a') + i)}"
        Image.fromarray(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)).save(
            src / f"{name}.png"
        )
        (src / f"{name}.txt").write_text("0 0.125 0.25 0.75 0.25 0.75 0.875 0.125 0.875\n")
    return src


def _prepare(tmp_path, capsys, n=6):
    src = _make_source(tmp_path, n=n)
    out = tmp_path / "data"
    assert main(["prepare", str(src), str(out)]) == 0
    capsys.readouterr()
    return out


def _write_perfect_predictions(out_dir, pred_dir):
    manifest = DatasetManifest.load(out_dir / "manifest.json")
    pred_dir.mkdir(exist_ok=True)
    for e in manifest.entries:
        if e.split != "test":
            continue
        label = parse_yolo_seg_label((out_dir / e.label_path).read_text(), e.width, e.height)
        polys = [(0.95, inst.pixels.vertices.tolist()) for inst in label.instances]
        write_prediction(pred_dir / f"{e.image_id}.json", e.image_path, e.width, e.height, polys)


def test_prepare_splits_and_reports(tmp_path, capsys):
    src = _make_source(tmp_path, n=6)
    out = tmp_path / "data"
    assert main(["prepare", str(src), str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "ingested 6 images" in stdout
    assert "train=3 val=1 test=2" in stdout
    manifest = DatasetManifest.load(out / "manifest.json")
    assert [e.split for e in manifest.entries] == ["train"] * 3 + ["val"] + ["test"] * 2


def test_evaluate_end_to_end(tmp_path, capsys):
    out = _prepare(tmp_path, capsys)
    pred_dir = tmp_path / "preds"
    _write_perfect_predictions(out, pred_dir)
    rc = main([
        "evaluate", str(out / "manifest.json"), str(pred_dir),
        "--out", str(tmp_path / "eval"), "--label", "toy", "--step", "0.01",
    ])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "mIoU 1.0000" in stdout and "Dice 1.0000" in stdout
    result = json.loads((tmp_path / "eval" / "result.json").read_text())
    assert result["label"] == "toy"
    assert result["dataset_metrics"]["miou"] == 1.0
    assert (tmp_path / "eval" / "records.jsonl").exists()
    assert (tmp_path / "eval" / "curves.csv").exists()


def test_evaluate_missing_prediction_is_data_error(tmp_path, capsys):
    out = _prepare(tmp_path, capsys)
    pred_dir = tmp_path / "preds"
    pred_dir.mkdir()
    rc = main([
        "evaluate", str(out / "manifest.json"), str(pred_dir),
        "--out", str(tmp_path / "eval"),
    ])
    assert rc == 1
    assert "missing prediction" in capsys.readouterr().err


def test_curves_command(tmp_path, capsys):
    out = _prepare(tmp_path, capsys)
    pred_dir = tmp_path / "preds"
    _write_perfect_predictions(out, pred_dir)
    rc = main([
        "curves", str(out / "manifest.json"), str(pred_dir),
        "--out", str(tmp_path / "eval"), "--step", "0.05",
    ])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "best F1 1.0000 at confidence 0.000" in stdout
    assert (tmp_path / "eval" / "curves.csv").read_text().startswith("threshold,precision")


def test_enhance_command_writes_pngs(tmp_path, capsys):
    out = _prepare(tmp_path, capsys, n=3)
    rc = main([
        "enhance", str(out / "manifest.json"), "--mode", "clahe",
        "--tiles", "2x2", "--out", str(tmp_path / "enh"),
    ])
    assert rc == 0
    pngs = sorted(p.name for p in (tmp_path / "enh").glob("*.png"))
    assert pngs == ["000000.png", "000001.png", "000002.png"]


def test_evaluate_archives_enhanced_images(tmp_path, capsys):
    out = _prepare(tmp_path, capsys)
    pred_dir = tmp_path / "preds"
    _write_perfect_predictions(out, pred_dir)
    rc = main([
        "evaluate", str(out / "manifest.json"), str(pred_dir),
        "--out", str(tmp_path / "eval"), "--step", "0.05",
        "--enhance-mode", "clahe_gamma", "--enhancement-label", "CLAHE+Gamma",
    ])
    assert rc == 0
    capsys.readouterr()
    # only the two test-split images are archived; masks stay untouched
    pngs = sorted(p.name for p in (tmp_path / "eval" / "enhanced").glob("*.png"))
    assert pngs == ["000004.png", "000005.png"]
    result = json.loads((tmp_path / "eval" / "result.json").read_text())
    assert result["enhancement"] == "CLAHE+Gamma"
    assert result["dataset_metrics"]["miou"] == 1.0  # geometry unaffected


def test_report_command_renders_stored_rows(tmp_path, capsys):
    from pipeseg.detection import APResult, CurvePoint
    from pipeseg.metrics import DatasetMetrics
    from pipeseg.runner import RunResult

    res = RunResult(
        label="YOLOv11n",
        enhancement="Original",
        dataset_metrics=DatasetMetrics(0.7098, 0.8129, 307.59, 24.94, 130, 0),
        ap=APResult(0.9, 0.7, ((0.5, 0.9),)),
        best_f1=CurvePoint(0.5, 0.9, 0.9, 0.9),
    )
    res.save(tmp_path / "r.json")
    rc = main(["report", str(tmp_path / "r.json"), "--style", "table2",
               "--csv", str(tmp_path / "t.csv")])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "| YOLOv11n | 0.7098 | 0.8129 | 307.59 | 24.94 |" in stdout
    assert "YOLOv11n,0.7098,0.8129,307.59,24.94" in (tmp_path / "t.csv").read_text()


def test_validate_command_exit_codes(tmp_path, capsys):
    out = _prepare(tmp_path, capsys, n=3)
    assert main(["validate", str(out / "manifest.json")]) == 0
    img = out / "000001.jpg"
    img.write_bytes(img.read_bytes()[:30])
    assert main(["validate", str(out / "manifest.json")]) == 1
    assert "entry 1" in capsys.readouterr().out


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["evaluate"])  # missing required args
    assert exc.value.code == 2
