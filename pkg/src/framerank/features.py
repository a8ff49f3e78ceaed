"""Per-frame hybrid descriptor: color histogram fused with edge histogram.

The color part is a 256-bin HSV histogram (16 hue x 4 saturation x
4 value ranges, L1-normalized). The texture part is an 80-bin edge
histogram: the frame splits into a 4x4 grid of sub-images, each
sub-image into a grid of image-blocks, and every block votes for its
dominant edge orientation (vertical, horizontal, the two diagonals, or
isotropic) when the strongest 3x3 kernel response clears a threshold.
Concatenating the two parts gives the 336-dim vector frames are
compared with (L1 distance).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FrameTooSmallError

HUE_BINS, SAT_BINS, VAL_BINS = 16, 4, 4
COLOR_DIMS = HUE_BINS * SAT_BINS * VAL_BINS  # 256
SUBIMAGE_GRID = 4
EDGE_TYPES = 5  # vertical, horizontal, diag45, diag135, isotropic
EDGE_DIMS = SUBIMAGE_GRID * SUBIMAGE_GRID * EDGE_TYPES  # 80
FUSED_DIMS = COLOR_DIMS + EDGE_DIMS  # 336

MIN_FRAME_SIDE = 12

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# MPEG-7 EHD convention: block response threshold of 11 on a 0..255
# scale, here on luminance normalized to [0, 1].
DEFAULT_EDGE_THRESHOLD = 11.0 / 255.0

_HUE_WIDTH = 360.0 / HUE_BINS  # 22.5 degrees


def rgb_to_hsv(r: float, g: float, b: float) -> tuple[float, float, float]:
    """Standard hexcone RGB -> HSV for 8-bit channels.

    Returns hue in degrees [0, 360), saturation and value in [0, 1].
    Hue is defined as 0 when saturation is 0.
    """
    rf, gf, bf = r / 255.0, g / 255.0, b / 255.0
    maxc = max(rf, gf, bf)
    minc = min(rf, gf, bf)
    v = maxc
    chroma = maxc - minc
    if chroma == 0.0:
        return 0.0, 0.0, v
    s = chroma / maxc
    if maxc == rf:
        h = (60.0 * (gf - bf) / chroma) % 360.0
    elif maxc == gf:
        h = 60.0 * (bf - rf) / chroma + 120.0
    else:
        h = 60.0 * (rf - gf) / chroma + 240.0
    return h % 360.0, s, v


def _hsv_planes(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hexcone conversion; mirrors rgb_to_hsv exactly."""
    arr = pixels.astype(np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    maxc = arr.max(axis=-1)
    minc = arr.min(axis=-1)
    chroma = maxc - minc
    v = maxc
    s = np.divide(chroma, maxc, out=np.zeros_like(chroma), where=maxc > 0)
    safe = np.where(chroma > 0, chroma, 1.0)
    # channel priority r, g, b matches the scalar converter on ties
    h = np.where(
        maxc == r,
        (60.0 * (g - b) / safe) % 360.0,
        np.where(
            maxc == g,
            60.0 * (b - r) / safe + 120.0,
            60.0 * (r - g) / safe + 240.0,
        ),
    )
    h = np.where(chroma == 0, 0.0, h) % 360.0
    return h, s, v


def hsv_bin_index(h: float, s: float, v: float) -> int:
    """Bin index h_bin*16 + s_bin*4 + v_bin with clamped uniform bins."""
    hb = min(int(h / _HUE_WIDTH), HUE_BINS - 1)
    sb = min(int(s * SAT_BINS), SAT_BINS - 1)
    vb = min(int(v * VAL_BINS), VAL_BINS - 1)
    return hb * (SAT_BINS * VAL_BINS) + sb * VAL_BINS + vb


def _pixels_of(frame) -> np.ndarray:
    return frame.pixels if hasattr(frame, "pixels") else np.asarray(frame)


def color_histogram(frame) -> np.ndarray:
    """256-bin L1-normalized HSV histogram of a frame (or raw raster)."""
    pixels = _pixels_of(frame)
    h, s, v = _hsv_planes(pixels)
    hb = np.minimum((h / _HUE_WIDTH).astype(np.int64), HUE_BINS - 1)
    sb = np.minimum((s * SAT_BINS).astype(np.int64), SAT_BINS - 1)
    vb = np.minimum((v * VAL_BINS).astype(np.int64), VAL_BINS - 1)
    idx = hb * (SAT_BINS * VAL_BINS) + sb * VAL_BINS + vb
    hist = np.bincount(idx.ravel(), minlength=COLOR_DIMS).astype(np.float64)
    return hist / hist.sum()


def _default_kernels() -> dict[str, np.ndarray]:
    return {
        "vertical": np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64),
        "horizontal": np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64),
        "diag45": np.array([[0, 1, 2], [-1, 0, 1], [-2, -1, 0]], dtype=np.float64),
        "diag135": np.array([[2, 1, 0], [1, 0, -1], [0, -1, -2]], dtype=np.float64),
        "isotropic": np.array([[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]], dtype=np.float64),
    }


@dataclass(frozen=True)
class EdgeKernelSet:
    """The five 3x3 edge kernels and the block response threshold."""

    vertical: np.ndarray = field(default_factory=lambda: _default_kernels()["vertical"])
    horizontal: np.ndarray = field(default_factory=lambda: _default_kernels()["horizontal"])
    diag45: np.ndarray = field(default_factory=lambda: _default_kernels()["diag45"])
    diag135: np.ndarray = field(default_factory=lambda: _default_kernels()["diag135"])
    isotropic: np.ndarray = field(default_factory=lambda: _default_kernels()["isotropic"])
    edge_response_threshold: float = DEFAULT_EDGE_THRESHOLD

    def __post_init__(self):
        for k in self.kernels():
            if np.shape(k) != (3, 3):
                raise ValueError("edge kernels must be 3x3")
        if self.edge_response_threshold < 0:
            raise ValueError("edge_response_threshold must be non-negative")

    def kernels(self) -> list[np.ndarray]:
        """Kernels in bin order: vertical, horizontal, diag45, diag135, isotropic."""
        return [self.vertical, self.horizontal, self.diag45, self.diag135, self.isotropic]


def luminance(pixels: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an RGB raster, normalized to [0, 1]."""
    return (pixels.astype(np.float64) / 255.0) @ LUMA_WEIGHTS


def _grid_bounds(extent: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, extent) into `parts` cells, remainder absorbed by the
    last cell; zero-width cells are dropped."""
    base = extent // parts
    bounds = []
    for i in range(parts):
        start = i * base
        stop = (i + 1) * base if i < parts - 1 else extent
        if stop > start:
            bounds.append((start, stop))
    return bounds


def _kernel_responses(lum: np.ndarray, kernels: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Absolute 3x3 correlation responses at all fully supported positions.

    Output k-th map has shape (H-2, W-2); entry (i, j) is the response
    centered on pixel (i+1, j+1).
    """
    h, w = lum.shape
    maps = []
    for kernel in kernels:
        resp = np.zeros((h - 2, w - 2), dtype=np.float64)
        for di in range(3):
            for dj in range(3):
                coeff = kernel[di, dj]
                if coeff != 0.0:
                    resp += coeff * lum[di:h - 2 + di, dj:w - 2 + dj]
        maps.append(np.abs(resp))
    return maps


def edge_histogram(
    frame,
    kernels: EdgeKernelSet | None = None,
    *,
    block_grid: int = 4,
) -> np.ndarray:
    """80-dim edge histogram of a frame.

    The frame is converted to luminance and partitioned into a 4x4 grid
    of sub-images (remainder pixels go to the last row/column); each
    sub-image is partitioned into a block_grid x block_grid grid of
    image-blocks the same way. Per block, the mean absolute response of
    each kernel over the block's interior (3x3 support wholly inside
    the block) is computed; when the maximum clears the threshold the
    winning edge type's bin is incremented. Each sub-image's five bins
    are divided by its block count, so per-sub-image sums stay <= 1 and
    textureless regions legitimately contribute zeros.

    Raises:
        FrameTooSmallError: below 12x12 pixels.
    """
    pixels = _pixels_of(frame)
    h, w = pixels.shape[:2]
    if h < MIN_FRAME_SIDE or w < MIN_FRAME_SIDE:
        raise FrameTooSmallError(
            f"frame is {w}x{h}; edge histogram needs at least "
            f"{MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}"
        )
    if kernels is None:
        kernels = EdgeKernelSet()

    lum = luminance(pixels)
    responses = _kernel_responses(lum, kernels.kernels())
    threshold = kernels.edge_response_threshold

    hist = np.zeros((SUBIMAGE_GRID * SUBIMAGE_GRID, EDGE_TYPES), dtype=np.float64)
    row_bounds = _grid_bounds(h, SUBIMAGE_GRID)
    col_bounds = _grid_bounds(w, SUBIMAGE_GRID)
    for si, (r0, r1) in enumerate(row_bounds):
        for sj, (c0, c1) in enumerate(col_bounds):
            sub = si * SUBIMAGE_GRID + sj
            blocks_r = _grid_bounds(r1 - r0, block_grid)
            blocks_c = _grid_bounds(c1 - c0, block_grid)
            n_blocks = len(blocks_r) * len(blocks_c)
            for br0, br1 in blocks_r:
                for bc0, bc1 in blocks_c:
                    # interior in response-map coordinates
                    ri0, ri1 = r0 + br0, r0 + br1 - 2
                    ci0, ci1 = c0 + bc0, c0 + bc1 - 2
                    if ri1 <= ri0 or ci1 <= ci0:
                        continue  # block too small for a 3x3 interior
                    means = [m[ri0:ri1, ci0:ci1].mean() for m in responses]
                    best = int(np.argmax(means))
                    if means[best] >= threshold:
                        hist[sub, best] += 1.0
            if n_blocks:
                hist[sub] /= n_blocks
    return hist.ravel()


def fuse(color: np.ndarray, edge: np.ndarray) -> np.ndarray:
    """Serial fusion: concatenate the color and edge parts, no reweighting."""
    color = np.asarray(color, dtype=np.float64)
    edge = np.asarray(edge, dtype=np.float64)
    if color.shape != (COLOR_DIMS,):
        raise ValueError(f"color part must have length {COLOR_DIMS}, got {color.shape}")
    if edge.shape != (EDGE_DIMS,):
        raise ValueError(f"edge part must have length {EDGE_DIMS}, got {edge.shape}")
    return np.concatenate([color, edge])


@dataclass(frozen=True)
class FeatureVector:
    """Fused per-frame descriptor: 256 color bins followed by 80 edge bins."""

    color: np.ndarray
    edge: np.ndarray

    @property
    def fused(self) -> np.ndarray:
        return fuse(self.color, self.edge)


def compute_features(frame, kernels: EdgeKernelSet | None = None,
                     *, block_grid: int = 4) -> FeatureVector:
    """Full descriptor for one frame."""
    return FeatureVector(
        color=color_histogram(frame),
        edge=edge_histogram(frame, kernels, block_grid=block_grid),
    )


def compute_features_many(
    frames,
    kernels: EdgeKernelSet | None = None,
    *,
    block_grid: int = 4,
    threads: int = 1,
) -> list[FeatureVector]:
    """Descriptors for a frame sequence; per-frame work is pure, so a
    thread pool with order-preserving map keeps output deterministic."""
    if kernels is None:
        kernels = EdgeKernelSet()
    if threads <= 1:
        return [compute_features(f, kernels, block_grid=block_grid) for f in frames]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(
            pool.map(lambda f: compute_features(f, kernels, block_grid=block_grid), frames)
        )


def manhattan_distance(a, b) -> float:
    """L1 distance over fused descriptors (FeatureVector or array)."""
    av = a.fused if isinstance(a, FeatureVector) else np.asarray(a, dtype=np.float64)
    bv = b.fused if isinstance(b, FeatureVector) else np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"length mismatch: {av.shape} vs {bv.shape}")
    return float(np.abs(av - bv).sum())
