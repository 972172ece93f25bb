"""Binary masks and their geometry: polygon rasterization, boundary
extraction, exact Euclidean distance transforms, and run-length coding.

Pixel (x, y) covers the unit square [x, x+1) x [y, y+1); its center is
(x+0.5, y+0.5). All distances are Euclidean in pixel units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but keep a fallback
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean foreground grid."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2:
            raise ValueError(f"expected (h, w) array, got shape {d.shape}")
        if d.dtype != np.bool_:
            d = d.astype(bool)
        d = np.ascontiguousarray(d)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(self.data.sum())

    def is_empty(self) -> bool:
        return not self.data.any()

    @staticmethod
    def empty(w: int, h: int) -> "BinaryMask":
        return BinaryMask(np.zeros((h, w), dtype=bool))

    @staticmethod
    def full(w: int, h: int) -> "BinaryMask":
        return BinaryMask(np.ones((h, w), dtype=bool))


@dataclass(frozen=True)
class PolygonContour:
    """Closed polygon ring; vertices (x, y) in pixel coordinates, fractional allowed."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array of (x, y)")
        if v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return self.vertices.shape[0]


@dataclass(frozen=True)
class BoundarySet:
    """Integer (x, y) boundary pixels of a mask, with the source canvas size."""

    points: np.ndarray  # (n, 2) int64, columns (x, y)
    width: int
    height: int

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class DistanceField:
    """Per-pixel Euclidean distance to the nearest seed point."""

    values: np.ndarray  # (h, w) float64

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def rasterize_polygon(poly: PolygonContour, w: int, h: int) -> BinaryMask:
    """Scanline-fill a polygon with the even-odd rule.

    A pixel is foreground iff its center (x+0.5, y+0.5) lies inside the
    (implicitly closed) ring; geometry outside the canvas is clipped.
    """
    if w < 1 or h < 1:
        raise ValueError("canvas dimensions must be >= 1")
    verts = poly.vertices
    n = len(verts)
    grid = np.zeros((h, w), dtype=bool)

    ys = verts[:, 1]
    y_lo = max(0, int(np.floor(ys.min() - 0.5)))
    y_hi = min(h - 1, int(np.ceil(ys.max())))
    # Precompute edges, dropping horizontals (they never cross a scanline).
    edges = []
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if y1 != y2:
            edges.append((x1, y1, x2, y2))

    for py in range(y_lo, y_hi + 1):
        cy = py + 0.5
        xs = []
        for x1, y1, x2, y2 in edges:
            # Half-open span [min, max) so shared vertices count once.
            if (y1 <= cy < y2) or (y2 <= cy < y1):
                xs.append(x1 + (cy - y1) * (x2 - x1) / (y2 - y1))
        if not xs:
            continue
        xs.sort()
        row = grid[py]
        for xa, xb in zip(xs[0::2], xs[1::2]):
            # Centers x+0.5 in [xa, xb)  =>  x in [ceil(xa-0.5), ceil(xb-0.5)-1]
            left = max(0, int(np.ceil(xa - 0.5)))
            right = min(w, int(np.ceil(xb - 0.5)))
            if right > left:
                row[left:right] = True
    return BinaryMask(grid)


def extract_boundary(mask: BinaryMask) -> BoundarySet:
    """Foreground pixels with a 4-neighbor that is background or off-canvas."""
    m = mask.data
    inner = np.zeros_like(m)
    # A pixel is interior iff all four neighbors exist and are foreground.
    inner[1:-1, 1:-1] = (
        m[1:-1, 1:-1]
        & m[:-2, 1:-1]
        & m[2:, 1:-1]
        & m[1:-1, :-2]
        & m[1:-1, 2:]
    )
    edge = m & ~inner
    ys, xs = np.nonzero(edge)
    pts = np.stack([xs, ys], axis=1).astype(np.int64)
    return BoundarySet(points=pts, width=mask.width, height=mask.height)


@njit(cache=True)
def _edt_squared(seed):  # pragma: no cover - exercised via distance_transform
    """Exact squared EDT of a boolean seed grid (two-pass separable).

    Pass 1 finds, per column, the squared vertical distance to the nearest
    seed; pass 2 computes the lower envelope of row parabolas. All
    quantities stay integral, so the result is exact.
    """
    h, w = seed.shape
    big = np.float64(h + w)  # exceeds any in-canvas distance
    g = np.empty((h, w), np.float64)
    for x in range(w):
        g[0, x] = 0.0 if seed[0, x] else big
    for y in range(1, h):
        for x in range(w):
            g[y, x] = 0.0 if seed[y, x] else min(big, g[y - 1, x] + 1.0)
    for y in range(h - 2, -1, -1):
        for x in range(w):
            if g[y + 1, x] + 1.0 < g[y, x]:
                g[y, x] = g[y + 1, x] + 1.0

    out = np.empty((h, w), np.float64)
    v = np.empty(w, np.int64)
    z = np.empty(w + 1, np.float64)
    for y in range(h):
        for x in range(w):
            g[y, x] = g[y, x] * g[y, x]
        k = 0
        v[0] = 0
        z[0] = -1e300
        z[1] = 1e300
        for q in range(1, w):
            s = ((g[y, q] + q * q) - (g[y, v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
            while s <= z[k]:
                k -= 1
                s = ((g[y, q] + q * q) - (g[y, v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = 1e300
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            d = q - v[k]
            out[y, q] = d * d + g[y, v[k]]
    return out


def distance_transform(
    seeds: Union[BoundarySet, BinaryMask], w: int | None = None, h: int | None = None
) -> DistanceField:
    """Exact Euclidean distance to the nearest seed, over the whole canvas."""
    if isinstance(seeds, BinaryMask):
        grid = seeds.data
        sw, sh = seeds.width, seeds.height
    else:
        sw, sh = seeds.width, seeds.height
        grid = np.zeros((sh, sw), dtype=bool)
        if len(seeds):
            grid[seeds.points[:, 1], seeds.points[:, 0]] = True
    if w is None:
        w = sw
    if h is None:
        h = sh
    if (w, h) != (sw, sh):
        raise ValueError(f"seed canvas {sw}x{sh} does not match requested {w}x{h}")
    if not grid.any():
        raise ValueError("seed set is empty")
    sq = _edt_squared(np.ascontiguousarray(grid))
    return DistanceField(values=np.sqrt(sq))


def mask_union(masks: Sequence[BinaryMask]) -> BinaryMask:
    """Pixelwise OR of equally sized masks."""
    if not masks:
        raise ValueError("mask_union needs at least one mask")
    first = masks[0]
    acc = first.data.copy()
    for m in masks[1:]:
        if (m.width, m.height) != (first.width, first.height):
            raise ValueError(
                f"mask dimensions differ: {m.width}x{m.height} vs {first.width}x{first.height}"
            )
        acc |= m.data
    return BinaryMask(acc)


def decode_rle(counts: Iterable[int], w: int, h: int) -> BinaryMask:
    """Expand run lengths (row-major, background run first) into a mask."""
    counts = list(counts)
    if any(c < 0 for c in counts):
        raise ValueError("run lengths must be nonnegative")
    total = sum(counts)
    if total != w * h:
        raise ValueError(f"run lengths sum to {total}, expected {w}x{h}={w * h}")
    flat = np.zeros(w * h, dtype=bool)
    pos = 0
    fg = False
    for c in counts:
        if fg and c:
            flat[pos : pos + c] = True
        pos += c
        fg = not fg
    return BinaryMask(flat.reshape(h, w))


def encode_rle(mask: BinaryMask) -> list[int]:
    """Row-major run lengths, background run first (0 if mask starts foreground)."""
    flat = mask.data.reshape(-1)
    counts: list[int] = []
    changes = np.nonzero(flat[1:] != flat[:-1])[0] + 1
    prev = 0
    if flat.size and flat[0]:
        counts.append(0)
    for c in changes:
        counts.append(int(c - prev))
        prev = int(c)
    counts.append(int(flat.size - prev))
    return counts


def dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Euclidean dilation: all pixels within `radius` of the foreground."""
    if mask.is_empty():
        return mask
    field = distance_transform(mask)
    return BinaryMask(field.values <= radius)
