"""Monochromatic junk-frame removal.

Fade-in/fade-out style frames concentrate their color-histogram mass in
very few bins and therefore show a high variance across bins. Frames
whose bin variance exceeds an adaptive threshold (mean + beta * std of
the whole video's variances) are discarded before ranking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllFramesDiscardedError
from .features import color_histogram
from .ingest import FrameSequence

DEFAULT_NOISE_BETA = 1.8


def histogram_variance(hist: np.ndarray) -> float:
    """Population variance across the histogram's bin values."""
    return float(np.var(np.asarray(hist, dtype=np.float64)))


def histogram_bin_variance(frame, *, normalized: bool = True) -> float:
    """Variance across the 256 HSV color-histogram bins of a frame.

    With normalized=False the variance is taken over raw pixel counts
    instead of the L1-normalized bins. For sequences of uniform
    resolution that only rescales every frame's variance by the same
    factor, so the discard set is unchanged.
    """
    hist = color_histogram(frame)
    if not normalized:
        pixels = frame.pixels if hasattr(frame, "pixels") else np.asarray(frame)
        hist = hist * (pixels.shape[0] * pixels.shape[1])
    return histogram_variance(hist)


def adaptive_threshold(values, beta: float) -> float:
    """mean(values) + beta * population-std(values)."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("adaptive threshold needs at least one value")
    return float(arr.mean() + beta * arr.std())


@dataclass
class NoiseReport:
    """Outcome of one noise-filter pass over a frame sequence."""

    beta: float
    threshold: float
    variances: list[float]
    discarded_indices: list[int]

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "beta": self.beta,
            "variances": self.variances,
            "discarded": self.discarded_indices,
        }


def remove_monochromatic(
    seq: FrameSequence,
    beta: float = DEFAULT_NOISE_BETA,
    *,
    normalized_bins: bool = True,
) -> tuple[FrameSequence, NoiseReport]:
    """Drop frames whose histogram-bin variance strictly exceeds the
    adaptive threshold; survivors keep their indices and timestamps.

    Raises:
        AllFramesDiscardedError: every frame landed above the threshold
            (the report is attached so the caller can decide).
        ValueError: empty sequence.
    """
    if len(seq) == 0:
        raise ValueError("cannot filter an empty frame sequence")
    variances = [
        histogram_bin_variance(frame, normalized=normalized_bins) for frame in seq
    ]
    threshold = adaptive_threshold(variances, beta)
    kept, discarded = [], []
    for frame, variance in zip(seq, variances):
        if variance > threshold:
            discarded.append(frame.index)
        else:
            kept.append(frame)
    report = NoiseReport(
        beta=beta,
        threshold=threshold,
        variances=variances,
        discarded_indices=discarded,
    )
    if not kept:
        raise AllFramesDiscardedError(
            f"noise filter discarded all {len(seq)} frames", report=report
        )
    return FrameSequence(kept, seq.sample_rate_fps, seq.source_id), report
