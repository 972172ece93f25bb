"""Underwater image enhancement: CLAHE, gamma correction, and dark-channel
dehazing with guided-filter transmission refinement.

All three pipelines operate on the luma plane of color images, leaving
chroma untouched, and are pure functions of their inputs. Modes exposed to
the CLI: original | clahe | clahe_gamma | dcpd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .image import ImageBuffer, from_plane, luma_plane, luma_transform

MODES = ("original", "clahe", "clahe_gamma", "dcpd")


@dataclass(frozen=True)
class ClaheConfig:
    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 2.0  # multiple of the uniform bin height; inf disables clipping
    bins: int = 256

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be >= 1")
        if not self.clip_limit > 0:
            raise ValueError("clip_limit must be positive")
        if not 1 <= self.bins <= 256:
            raise ValueError("bins must be in 1..256")


@dataclass(frozen=True)
class GammaConfig:
    gamma: float = 0.7  # < 1 brightens

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class DehazeConfig:
    patch: int = 15
    omega: float = 0.95
    t0: float = 0.1
    bright_fraction: float = 0.001
    gf_radius: int = 40
    gf_eps: float = 1e-3

    def __post_init__(self):
        if self.patch < 1 or self.patch % 2 == 0:
            raise ValueError("patch must be odd and >= 1")
        if not 0 < self.omega <= 1:
            raise ValueError("omega must be in (0, 1]")
        if not 0 < self.t0 < 1:
            raise ValueError("t0 must be in (0, 1)")
        if not 0 < self.bright_fraction <= 1:
            raise ValueError("bright_fraction must be in (0, 1]")
        if self.gf_radius < 1:
            raise ValueError("gf_radius must be >= 1")
        if not self.gf_eps > 0:
            raise ValueError("gf_eps must be positive")


@dataclass(frozen=True)
class EnhanceConfig:
    """Bundle of parameters for all pipeline modes."""

    clahe: ClaheConfig = field(default_factory=ClaheConfig)
    gamma: GammaConfig = field(default_factory=GammaConfig)
    dehaze: DehazeConfig = field(default_factory=DehazeConfig)


# ---------------------------------------------------------------------------
# CLAHE
# ---------------------------------------------------------------------------

def _tile_edges(size: int, tiles: int) -> list[tuple[int, int]]:
    return [(t * size // tiles, (t + 1) * size // tiles) for t in range(tiles)]


def compute_tile_luts(plane: np.ndarray, cfg: ClaheConfig) -> np.ndarray:
    """Per-tile equalization lookup tables, shape (tiles_y, tiles_x, 256).

    Each tile's histogram is clipped at clip_limit * (tile_pixels / bins);
    the clipped excess is redistributed uniformly in one pass (integer
    residue discarded) and the CDF is scaled to 0..255.
    """
    h, w = plane.shape
    if w < cfg.tiles_x or h < cfg.tiles_y:
        raise ValueError(
            f"image {w}x{h} smaller than tile grid {cfg.tiles_x}x{cfg.tiles_y}"
        )
    bin_of = np.arange(256) * cfg.bins // 256
    luts = np.empty((cfg.tiles_y, cfg.tiles_x, 256), dtype=np.uint8)
    for ty, (y0, y1) in enumerate(_tile_edges(h, cfg.tiles_y)):
        for tx, (x0, x1) in enumerate(_tile_edges(w, cfg.tiles_x)):
            tile = plane[y0:y1, x0:x1]
            n = tile.size
            hist = np.bincount(bin_of[tile.reshape(-1)], minlength=cfg.bins)
            if math.isfinite(cfg.clip_limit):
                limit = max(int(cfg.clip_limit * n / cfg.bins), 1)
                excess = int(np.maximum(hist - limit, 0).sum())
                hist = np.minimum(hist, limit) + excess // cfg.bins
            cdf = np.cumsum(hist)
            total = cdf[-1]  # = n minus any discarded residue
            lut_bins = np.rint(255.0 * cdf / total).astype(np.uint8)
            luts[ty, tx] = lut_bins[bin_of]
    return luts


def clahe(img: ImageBuffer, cfg: ClaheConfig | None = None) -> ImageBuffer:
    """Contrast-limited adaptive histogram equalization.

    3-channel input is equalized on luma only. Tile mappings are blended
    with bilinear interpolation between the four surrounding tile centers
    (edge-clamped), removing tile seams.
    """
    cfg = cfg or ClaheConfig()
    if img.channels == 3:
        return luma_transform(img, lambda l: clahe(l, cfg))
    plane = img.plane()
    h, w = plane.shape
    luts = compute_tile_luts(plane, cfg)

    cx = np.array([(x0 + x1) / 2.0 for x0, x1 in _tile_edges(w, cfg.tiles_x)])
    cy = np.array([(y0 + y1) / 2.0 for y0, y1 in _tile_edges(h, cfg.tiles_y)])

    def _axis_weights(coords, centers):
        pos = coords + 0.5
        i1 = np.searchsorted(centers, pos)
        i0 = np.clip(i1 - 1, 0, len(centers) - 1)
        i1 = np.clip(i1, 0, len(centers) - 1)
        span = centers[i1] - centers[i0]
        frac = np.where(span > 0, (pos - centers[i0]) / np.where(span > 0, span, 1), 0.0)
        return i0, i1, np.clip(frac, 0.0, 1.0)

    x0i, x1i, fx = _axis_weights(np.arange(w), cx)
    y0i, y1i, fy = _axis_weights(np.arange(h), cy)

    v = plane
    tl = luts[y0i[:, None], x0i[None, :], v].astype(np.float64)
    tr = luts[y0i[:, None], x1i[None, :], v].astype(np.float64)
    bl = luts[y1i[:, None], x0i[None, :], v].astype(np.float64)
    br = luts[y1i[:, None], x1i[None, :], v].astype(np.float64)
    top = tl * (1 - fx)[None, :] + tr * fx[None, :]
    bot = bl * (1 - fx)[None, :] + br * fx[None, :]
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return from_plane(np.clip(np.rint(out), 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

def gamma_correct(img: ImageBuffer, cfg: GammaConfig | None = None) -> ImageBuffer:
    """v -> round(255 * (v/255)^gamma), on luma for color input."""
    cfg = cfg or GammaConfig()
    if img.channels == 3:
        return luma_transform(img, lambda l: gamma_correct(l, cfg))
    lut = np.rint(255.0 * (np.arange(256) / 255.0) ** cfg.gamma).astype(np.uint8)
    return from_plane(lut[img.plane()])


# ---------------------------------------------------------------------------
# Dark channel prior dehazing
# ---------------------------------------------------------------------------

def _min_filter(a: np.ndarray, patch: int) -> np.ndarray:
    """Separable sliding-window minimum with edge-clamped borders."""
    r = patch // 2
    out = a
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (r, r)
        padded = np.pad(out, pad, mode="edge")
        n = out.shape[axis]
        sl = [slice(None), slice(None)]
        sl[axis] = slice(0, n)
        acc = padded[tuple(sl)].copy()
        for off in range(1, patch):
            sl[axis] = slice(off, off + n)
            np.minimum(acc, padded[tuple(sl)], out=acc)
        out = acc
    return out


def dark_channel(img: ImageBuffer, patch: int = 15) -> np.ndarray:
    """Patch-minimum of the per-pixel channel minimum, as (h, w) uint8."""
    if img.channels != 3:
        raise ValueError("dark_channel requires a 3-channel buffer")
    minc = img.data.min(axis=2)
    return _min_filter(minc, patch)


def estimate_atmospheric_light(
    img: ImageBuffer, dark: np.ndarray, fraction: float = 0.001
) -> np.ndarray:
    """Veiling-light RGB: the luma-brightest pixel among the brightest
    `fraction` of the dark channel. Channels are clamped to >= 1."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    flat_dark = dark.reshape(-1)
    n = flat_dark.size
    k = max(1, math.ceil(fraction * n))
    # stable order: dark value descending, then linear index ascending
    order = np.lexsort((np.arange(n), -flat_dark.astype(np.int64)))
    candidates = order[:k]
    luma = luma_plane(img).reshape(-1).astype(np.float64)
    best = candidates[int(np.argmax(luma[candidates]))]
    a = img.data.reshape(-1, 3)[best].astype(np.float64)
    return np.maximum(a, 1.0)


def estimate_transmission(
    img: ImageBuffer, a: np.ndarray, cfg: DehazeConfig | None = None
) -> np.ndarray:
    """t = 1 - omega * dark_channel(I/A), clamped to [t0, 1]."""
    cfg = cfg or DehazeConfig()
    norm = img.data.astype(np.float64) / a[None, None, :]
    dark = _min_filter(norm.min(axis=2), cfg.patch)
    t = 1.0 - cfg.omega * dark
    return np.clip(t, cfg.t0, 1.0)


def _box_mean(a: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the (2r+1)-square window clipped to the canvas, via
    integral images."""
    h, w = a.shape
    integral = np.zeros((h + 1, w + 1), dtype=np.float64)
    integral[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    y0 = np.clip(np.arange(h) - radius, 0, h)
    y1 = np.clip(np.arange(h) + radius + 1, 0, h)
    x0 = np.clip(np.arange(w) - radius, 0, w)
    x1 = np.clip(np.arange(w) + radius + 1, 0, w)
    s = (
        integral[y1[:, None], x1[None, :]]
        - integral[y0[:, None], x1[None, :]]
        - integral[y1[:, None], x0[None, :]]
        + integral[y0[:, None], x0[None, :]]
    )
    area = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return s / area


def guided_filter(
    guide: np.ndarray, src: np.ndarray, radius: int, eps: float
) -> np.ndarray:
    """Edge-preserving smoothing of src by a local linear model on guide."""
    if guide.shape != src.shape:
        raise ValueError("guide and src must have equal dimensions")
    guide = guide.astype(np.float64)
    src = src.astype(np.float64)
    mean_i = _box_mean(guide, radius)
    mean_p = _box_mean(src, radius)
    corr_ii = _box_mean(guide * guide, radius)
    corr_ip = _box_mean(guide * src, radius)
    var_i = corr_ii - mean_i * mean_i
    cov_ip = corr_ip - mean_i * mean_p
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    return _box_mean(a, radius) * guide + _box_mean(b, radius)


def dehaze(img: ImageBuffer, cfg: DehazeConfig | None = None) -> ImageBuffer:
    """Haze removal: J = (I - A) / max(t, t0) + A with guided-filter
    refined transmission (luma-guided)."""
    cfg = cfg or DehazeConfig()
    if img.channels != 3:
        raise ValueError("dehaze requires a 3-channel buffer")
    dark = dark_channel(img, cfg.patch)
    a = estimate_atmospheric_light(img, dark, cfg.bright_fraction)
    t = estimate_transmission(img, a, cfg)
    guide = luma_plane(img).astype(np.float64) / 255.0
    t_refined = guided_filter(guide, t, cfg.gf_radius, cfg.gf_eps)
    t_final = np.maximum(t_refined, cfg.t0)
    src = img.data.astype(np.float64)
    j = (src - a[None, None, :]) / t_final[:, :, None] + a[None, None, :]
    return ImageBuffer(np.clip(np.rint(j), 0, 255).astype(np.uint8))


def apply_enhancement(img: ImageBuffer, mode: str, cfg: EnhanceConfig | None = None) -> ImageBuffer:
    """Dispatch one of the pipeline modes on a decoded image."""
    cfg = cfg or EnhanceConfig()
    if mode == "original":
        return img
    if mode == "clahe":
        return clahe(img, cfg.clahe)
    if mode == "clahe_gamma":
        return gamma_correct(clahe(img, cfg.clahe), cfg.gamma)
    if mode == "dcpd":
        return dehaze(img, cfg.dehaze)
    raise ValueError(f"unknown enhancement mode {mode!r}; expected one of {MODES}")
