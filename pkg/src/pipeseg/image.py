"""8-bit raster images: codec I/O, bilinear resizing, luma-plane processing.

Images are interleaved RGB (or single-channel grayscale), row-major,
origin top-left, coordinates (column x, row y). Buffers are immutable;
every operation returns a new buffer.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, UnsupportedFormatError

# BT.601 full-range luma/chroma weights.
_KR, _KG, _KB = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class ImageBuffer:
    """Immutable 8-bit image, shape (height, width, channels), channels 1 or 3."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) array, got shape {d.shape}")
        if d.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {d.dtype}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        d = np.ascontiguousarray(d).copy()
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Flat row-major, channel-interleaved sample view."""
        return self.data.reshape(-1)

    def plane(self) -> np.ndarray:
        """The (h, w) array of a single-channel buffer."""
        if self.channels != 1:
            raise ValueError("plane() requires a single-channel buffer")
        return self.data[:, :, 0]


def from_plane(plane: np.ndarray) -> ImageBuffer:
    """Wrap an (h, w) uint8 array as a single-channel buffer."""
    return ImageBuffer(plane.reshape(plane.shape[0], plane.shape[1], 1))


def load_image(path) -> ImageBuffer:
    """Decode a PNG or JPEG file.

    Grayscale files yield channels=1; palette/alpha images are flattened
    to RGB. Unreadable files, non-PNG/JPEG formats, and corrupt streams
    raise FileNotFoundError/OSError, UnsupportedFormatError, and
    CorruptImageError respectively.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise UnsupportedFormatError(
                    f"{path}: format {im.format} not supported (PNG/JPEG only)"
                )
            if im.mode in ("L", "I;16", "1"):
                im = im.convert("L")
            elif im.mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: not a decodable image stream") from exc
    except (OSError, SyntaxError) as exc:
        raise CorruptImageError(f"{path}: corrupt image stream: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return ImageBuffer(arr)


def save_image(img: ImageBuffer, path, format: str = "png", quality: int = 95) -> None:
    """Encode to PNG (lossless) or JPEG at the given quality."""
    fmt = format.lower()
    if fmt not in ("png", "jpeg"):
        raise ValueError(f"format must be png or jpeg, got {format!r}")
    if not 1 <= quality <= 100:
        raise ValueError("quality must be in 1..100")
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    pil = Image.fromarray(arr, mode="L" if img.channels == 1 else "RGB")
    if fmt == "png":
        pil.save(path, format="PNG")
    else:
        pil.save(path, format="JPEG", quality=quality)


def resize_bilinear(img: ImageBuffer, new_w: int, new_h: int) -> ImageBuffer:
    """Bilinear resize with pixel-center alignment."""
    if new_w < 1 or new_h < 1:
        raise ValueError("target dimensions must be >= 1")
    h, w = img.height, img.width
    if (new_w, new_h) == (w, h):
        return img
    # Destination pixel centers mapped into source coordinates, clamped so
    # border pixels replicate instead of extrapolating.
    sx = (np.arange(new_w) + 0.5) * (w / new_w) - 0.5
    sy = (np.arange(new_h) + 0.5) * (h / new_h) - 0.5
    sx = np.clip(sx, 0.0, w - 1.0)
    sy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0

    src = img.data.astype(np.float64)
    top = src[y0][:, x0] * ((1 - fy)[:, None] * (1 - fx)[None, :])[:, :, None] + \
        src[y0][:, x1] * ((1 - fy)[:, None] * fx[None, :])[:, :, None]
    bot = src[y1][:, x0] * (fy[:, None] * (1 - fx)[None, :])[:, :, None] + \
        src[y1][:, x1] * (fy[:, None] * fx[None, :])[:, :, None]
    out = np.rint(top + bot)
    return ImageBuffer(np.clip(out, 0, 255).astype(np.uint8))


def rgb_to_ycbcr(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split (h, w, 3) uint8 RGB into float64 Y, Cb, Cr planes (full range)."""
    r = data[:, :, 0].astype(np.float64)
    g = data[:, :, 1].astype(np.float64)
    b = data[:, :, 2].astype(np.float64)
    y = _KR * r + _KG * g + _KB * b
    cb = 128.0 + (b - y) * (0.5 / (1.0 - _KB))
    cr = 128.0 + (r - y) * (0.5 / (1.0 - _KR))
    return y, cb, cr


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Recombine float planes into (h, w, 3) uint8 RGB, rounded and clipped."""
    r = y + (cr - 128.0) * ((1.0 - _KR) / 0.5)
    b = y + (cb - 128.0) * ((1.0 - _KB) / 0.5)
    g = (y - _KR * r - _KB * b) / _KG
    rgb = np.stack([r, g, b], axis=2)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def luma_plane(img: ImageBuffer) -> np.ndarray:
    """Rounded uint8 luma of a 1- or 3-channel buffer."""
    if img.channels == 1:
        return img.plane().copy()
    y, _, _ = rgb_to_ycbcr(img.data)
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def luma_transform(img: ImageBuffer, f: Callable[[ImageBuffer], ImageBuffer]) -> ImageBuffer:
    """Apply f to the luma plane of an RGB image, preserving chroma.

    The chroma planes are carried through unquantized, so an identity f
    reproduces the input within +/-1 per sample.
    """
    if img.channels != 3:
        raise ValueError("luma_transform requires a 3-channel buffer")
    y, cb, cr = rgb_to_ycbcr(img.data)
    y8 = np.clip(np.rint(y), 0, 255).astype(np.uint8)
    res = f(from_plane(y8))
    if res.channels != 1 or res.width != img.width or res.height != img.height:
        raise ValueError("luma function must preserve plane dimensions")
    return ImageBuffer(ycbcr_to_rgb(res.plane().astype(np.float64), cb, cr))
