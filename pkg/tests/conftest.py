"""Shared synthetic-frame builders for the test suite.

Frame generators here stay independent of the package's color-space
code (own HSV->RGB inverse) so they can serve as oracle-side inputs.
"""

from __future__ import annotations

import numpy as np
import pytest

from framerank.ingest import Frame, FrameSequence, frame_timestamp


def hsv_to_rgb_u8(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Independent hexcone inverse; h in degrees, s/v in [0, 1]."""
    c = v * s
    hp = (np.asarray(h, dtype=np.float64) % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    z = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    r = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [c, x, z, z, x, c])
    g = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [x, c, c, x, z, z])
    b = np.select([sector == 0, sector == 1, sector == 2,
                   sector == 3, sector == 4, sector == 5],
                  [z, z, x, c, c, x])
    m = v - c
    rgb = np.stack([r + m, g + m, b + m], axis=-1)
    return np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)


def make_frame(pixels: np.ndarray, index: int = 0, rate=1) -> Frame:
    return Frame(index, frame_timestamp(index, rate), np.ascontiguousarray(pixels))


def solid_frame(rgb, size=(24, 24), index: int = 0, rate=1) -> Frame:
    px = np.empty((size[1], size[0], 3), dtype=np.uint8)
    px[:] = rgb
    return make_frame(px, index, rate)


def noise_frame(seed: int, size=(24, 24), index: int = 0, rate=1) -> Frame:
    rng = np.random.default_rng(seed)
    px = rng.integers(0, 256, (size[1], size[0], 3), dtype=np.uint8)
    return make_frame(px, index, rate)


def hue_scene_pixels(h_bin: int, seed: int, size=(48, 48)) -> np.ndarray:
    """Textured pixels whose hues all land inside one 22.5-degree bin.

    A 3-degree margin keeps uint8 rounding from crossing bin edges;
    saturation/value stay mid-range so their bins are unambiguous too.
    """
    rng = np.random.default_rng(seed)
    w, h = size
    hue = rng.uniform(h_bin * 22.5 + 3.0, (h_bin + 1) * 22.5 - 3.0, (h, w))
    sat = rng.uniform(0.4, 0.85, (h, w))
    val = rng.uniform(0.4, 0.85, (h, w))
    return hsv_to_rgb_u8(hue, sat, val)


def hue_scene_frame(h_bin: int, seed: int, size=(48, 48), index: int = 0) -> Frame:
    return make_frame(hue_scene_pixels(h_bin, seed, size), index)


def scene_sequence(
    n_scenes: int,
    frames_per_scene: int,
    size=(48, 48),
    source_id: str = "clip",
    hue_bins=None,
) -> FrameSequence:
    """n_scenes visually distinct hue clusters, frames_per_scene each.

    Scenes occupy disjoint hue bins, so inter-scene color distance is
    maximal while frames inside one scene stay near-identical in
    histogram terms.
    """
    if hue_bins is None:
        if n_scenes > 16:
            raise ValueError("at most 16 disjoint hue bins available")
        hue_bins = list(range(n_scenes))
    frames = []
    idx = 0
    for scene, h_bin in zip(range(n_scenes), hue_bins):
        for j in range(frames_per_scene):
            frames.append(
                hue_scene_frame(h_bin, seed=scene * 1009 + j, size=size, index=idx)
            )
            idx += 1
    return FrameSequence(frames, 1, source_id)


@pytest.fixture(scope="session")
def small_clip() -> FrameSequence:
    """3 scenes x 4 frames, 48x48: the cheap end-to-end input."""
    return scene_sequence(3, 4, size=(48, 48), source_id="small_clip")


@pytest.fixture(scope="session")
def desk_clip() -> FrameSequence:
    """~2 minutes at 1 fps: 12 scenes x 10 frames at 352x240."""
    return scene_sequence(12, 10, size=(352, 240), source_id="desk_clip")
