"""Dataset preparation: ingestion with numeric renaming, the sequential
60/20/20 split, label parsing, ground-truth mask construction, and
manifest validation.

Ground truth is accepted in two forms: YOLO-style segmentation text files
("class x1 y1 x2 y2 ..." with normalized coordinates) or single-channel
PNG masks with values {0, 255}.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError, LabelParseError
from .image import load_image, save_image
from .masks import BinaryMask, PolygonContour, mask_union, rasterize_polygon

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")
LABEL_EXTENSIONS = (".txt", ".png")
SPLIT_FRACTIONS = (0.6, 0.2)  # train, val; the remainder is test


@dataclass
class ManifestEntry:
    index: int
    image_path: str  # relative to the manifest's directory
    label_path: str
    width: int
    height: int
    split: Optional[str] = None

    @property
    def image_id(self) -> str:
        return Path(self.image_path).stem


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    source_root: str
    created_at: str
    excluded: list[str] = field(default_factory=list)

    def __post_init__(self):
        for i, e in enumerate(self.entries):
            if e.index != i:
                raise DataError(
                    f"manifest indices must be contiguous from 0; entry {i} has index {e.index}"
                )

    def to_dict(self) -> dict:
        return {
            "source_root": self.source_root,
            "created_at": self.created_at,
            "excluded": list(self.excluded),
            "entries": [
                {
                    "index": e.index,
                    "image_path": e.image_path,
                    "label_path": e.label_path,
                    "width": e.width,
                    "height": e.height,
                    "split": e.split,
                }
                for e in self.entries
            ],
        }

    @staticmethod
    def from_dict(doc: dict) -> "DatasetManifest":
        return DatasetManifest(
            entries=[ManifestEntry(**e) for e in doc["entries"]],
            source_root=doc["source_root"],
            created_at=doc["created_at"],
            excluded=list(doc.get("excluded", [])),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @staticmethod
    def load(path) -> "DatasetManifest":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read manifest {path}: {exc}") from exc
        return DatasetManifest.from_dict(doc)


def _find_label(image_path: Path) -> Optional[Path]:
    for ext in LABEL_EXTENSIONS:
        candidate = image_path.parent / f"{image_path.stem}{ext}"
        if candidate.exists() and candidate != image_path:
            return candidate
    return None


def ingest(src_dir, out_dir, jpeg_quality: int = 95) -> DatasetManifest:
    """Convert a labeled image directory into the canonical layout.

    Images are re-encoded as JPEG and renamed 000000.jpg, 000001.jpg, ...
    in lexicographic order of their original names; label files are copied
    alongside under the same stem. Images without a label are excluded and
    recorded in the manifest. The manifest is written to out/manifest.json.
    """
    src = Path(src_dir)
    out = Path(out_dir)
    if not src.is_dir():
        raise DataError(f"source directory {src} does not exist")
    out.mkdir(parents=True, exist_ok=True)

    images = sorted(
        p for p in src.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )
    entries: list[ManifestEntry] = []
    excluded: list[str] = []
    for img_path in images:
        label = _find_label(img_path)
        if label is None:
            excluded.append(img_path.name)
            continue
        index = len(entries)
        stem = f"{index:06d}"
        buf = load_image(img_path)
        save_image(buf, out / f"{stem}.jpg", format="jpeg", quality=jpeg_quality)
        label_name = f"{stem}{label.suffix.lower()}"
        shutil.copyfile(label, out / label_name)
        entries.append(
            ManifestEntry(
                index=index,
                image_path=f"{stem}.jpg",
                label_path=label_name,
                width=buf.width,
                height=buf.height,
            )
        )
    manifest = DatasetManifest(
        entries=entries,
        source_root=str(src),
        created_at=datetime.now(timezone.utc).isoformat(),
        excluded=excluded,
    )
    manifest.save(out / "manifest.json")
    return manifest


def split_sizes(n: int) -> tuple[int, int, int]:
    train = int(n * SPLIT_FRACTIONS[0])
    val = int(n * SPLIT_FRACTIONS[1])
    return train, val, n - train - val


def split_manifest(manifest: DatasetManifest) -> DatasetManifest:
    """Assign the sequential 60/20/20 split: the first 60% by index go to
    train, the next 20% to val, the remainder to test. No shuffling."""
    if any(e.split is not None for e in manifest.entries):
        raise DataError("manifest already carries a split assignment")
    n = len(manifest.entries)
    if n < 3:
        raise DataError(f"cannot split {n} entries into train/val/test")
    n_train, n_val, _ = split_sizes(n)
    entries = []
    for e in manifest.entries:
        split = "train" if e.index < n_train else "val" if e.index < n_train + n_val else "test"
        entries.append(
            ManifestEntry(
                index=e.index,
                image_path=e.image_path,
                label_path=e.label_path,
                width=e.width,
                height=e.height,
                split=split,
            )
        )
    return DatasetManifest(
        entries=entries,
        source_root=manifest.source_root,
        created_at=manifest.created_at,
        excluded=list(manifest.excluded),
    )


@dataclass(frozen=True)
class LabelInstance:
    class_id: int
    normalized: PolygonContour  # coordinates in [0, 1]
    pixels: PolygonContour      # scaled to the image grid


@dataclass(frozen=True)
class GroundTruthLabel:
    instances: tuple[LabelInstance, ...]


def parse_yolo_seg_label(text: str, w: int, h: int) -> GroundTruthLabel:
    """Parse "class x1 y1 x2 y2 ..." lines of normalized polygon vertices.

    Each line needs an even count of at least 6 coordinates, all in
    [0, 1]. An empty file is a valid frame with no objects.
    """
    instances: list[LabelInstance] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            class_id = int(tokens[0])
        except ValueError as exc:
            raise LabelParseError(f"class id {tokens[0]!r} is not an integer", lineno) from exc
        coords = []
        for tok in tokens[1:]:
            try:
                coords.append(float(tok))
            except ValueError as exc:
                raise LabelParseError(f"non-numeric coordinate {tok!r}", lineno) from exc
        if len(coords) % 2 != 0:
            raise LabelParseError(f"odd coordinate count {len(coords)}", lineno)
        if len(coords) < 6:
            raise LabelParseError(
                f"polygon needs at least 3 vertices, got {len(coords) // 2}", lineno
            )
        pts = np.array(coords, dtype=np.float64).reshape(-1, 2)
        bad = (pts < 0.0) | (pts > 1.0)
        if bad.any():
            i = int(np.argwhere(bad)[0][0])
            raise LabelParseError(
                f"coordinate {pts[i].tolist()} outside [0, 1]", lineno
            )
        instances.append(
            LabelInstance(
                class_id=class_id,
                normalized=PolygonContour(pts),
                pixels=PolygonContour(pts * np.array([w, h], dtype=np.float64)),
            )
        )
    return GroundTruthLabel(instances=tuple(instances))


def gt_semantic_mask(label: GroundTruthLabel, w: int, h: int, class_id: int = 0) -> BinaryMask:
    """Union of the rasterized polygons of one class; empty if none."""
    masks = [
        rasterize_polygon(inst.pixels, w, h)
        for inst in label.instances
        if inst.class_id == class_id
    ]
    if not masks:
        return BinaryMask.empty(w, h)
    return mask_union(masks)


def load_mask_png(path, w: int | None = None, h: int | None = None) -> BinaryMask:
    """Read a single-channel {0, 255} PNG ground-truth mask."""
    buf = load_image(path)
    if buf.channels != 1:
        raise DataError(f"{path}: mask PNG must be single-channel")
    plane = buf.plane()
    values = np.unique(plane)
    if not np.isin(values, (0, 255)).all():
        raise DataError(f"{path}: mask PNG values must be 0 or 255, got {values.tolist()}")
    if w is not None and (buf.width, buf.height) != (w, h):
        raise DataError(
            f"{path}: mask is {buf.width}x{buf.height}, expected {w}x{h}"
        )
    return BinaryMask(plane == 255)


def load_gt_masks(label_path, w: int, h: int, class_id: int = 0) -> list[BinaryMask]:
    """Per-instance ground-truth masks from either label form."""
    path = Path(label_path)
    if path.suffix.lower() == ".png":
        mask = load_mask_png(path, w, h)
        return [] if mask.is_empty() else [mask]
    label = parse_yolo_seg_label(path.read_text(), w, h)
    return [
        rasterize_polygon(inst.pixels, w, h)
        for inst in label.instances
        if inst.class_id == class_id
    ]


def load_gt_semantic(label_path, w: int, h: int, class_id: int = 0) -> BinaryMask:
    masks = load_gt_masks(label_path, w, h, class_id)
    return mask_union(masks) if masks else BinaryMask.empty(w, h)


@dataclass(frozen=True)
class Finding:
    index: int
    path: str
    message: str


def _polygon_area(poly: PolygonContour) -> float:
    v = poly.vertices
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def validate_manifest(manifest: DatasetManifest, root) -> list[Finding]:
    """Per-entry integrity checks; findings are returned, never raised."""
    root = Path(root)
    findings: list[Finding] = []
    for e in manifest.entries:
        img_path = root / e.image_path
        try:
            buf = load_image(img_path)
        except (DataError, OSError) as exc:
            findings.append(Finding(e.index, str(img_path), f"image unreadable: {exc}"))
            continue
        if (buf.width, buf.height) != (e.width, e.height):
            findings.append(
                Finding(
                    e.index,
                    str(img_path),
                    f"dimensions {buf.width}x{buf.height} differ from manifest "
                    f"{e.width}x{e.height}",
                )
            )
        label_path = root / e.label_path
        if label_path.suffix.lower() == ".png":
            try:
                load_mask_png(label_path, e.width, e.height)
            except (DataError, OSError) as exc:
                findings.append(Finding(e.index, str(label_path), str(exc)))
            continue
        try:
            label = parse_yolo_seg_label(label_path.read_text(), e.width, e.height)
        except OSError as exc:
            findings.append(Finding(e.index, str(label_path), f"label unreadable: {exc}"))
            continue
        except LabelParseError as exc:
            findings.append(Finding(e.index, str(label_path), str(exc)))
            continue
        for k, inst in enumerate(label.instances):
            if _polygon_area(inst.pixels) == 0.0:
                findings.append(
                    Finding(e.index, str(label_path), f"instance {k} has zero area")
                )
    return findings
