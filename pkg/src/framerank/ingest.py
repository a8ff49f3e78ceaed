"""Frame-sequence acquisition.

Two entry points produce the same :class:`FrameSequence`: driving an
external video decoder as an image-sequence exporter at a fixed sampling
rate, or loading a directory of pre-extracted frames. Decoding stays out
of process; the default command template targets ffmpeg but any decoder
that can write numbered still images fits.

Frame directory layout: ``<name>_NNNNNN.png`` with a zero-padded 6-digit
frame index, plus an optional ``manifest.json`` declaring
``{source_id, sample_rate_fps, frame_count, width, height}``.
"""

from __future__ import annotations

import json
import logging
import re
import shlex
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecoderFailedError,
    DecoderNotFoundError,
    EmptyDirectoryError,
    MixedDimensionsError,
    NoFramesProducedError,
    UndecodableImageError,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".ppm")

# Image-sequence export via ffmpeg; the fps filter emits, for each sample
# instant, the source frame whose presentation interval covers it (the
# first frame of each sampling period).
DEFAULT_DECODER_TEMPLATE = (
    "ffmpeg -y -v error -i {input} -vf fps={fps} -start_number 0 {output_pattern}"
)

_INDEXED_NAME = re.compile(r"^(?P<stem>.+)_(?P<index>\d{6})$")

RateLike = Union[int, float, str, Fraction]


def parse_rate(value: RateLike) -> Fraction:
    """Parse a sampling rate into an exact Fraction.

    Accepts ints, floats, Fractions, and strings like ``"1"`` or
    ``"30000/1001"``. Raises ValueError for non-positive rates.
    """
    rate = Fraction(value)
    if rate <= 0:
        raise ValueError(f"sample rate must be positive, got {value!r}")
    return rate


def frame_timestamp(index: int, rate_fps: RateLike) -> float:
    """Timestamp in seconds of a sampled frame: index / rate, exactly."""
    return float(Fraction(index) / parse_rate(rate_fps))


@dataclass(frozen=True)
class Frame:
    """A decoded sampled image.

    Attributes:
        index: 0-based position in the sampled sequence.
        timestamp_s: seconds from video start (index / sample rate).
        pixels: row-major RGB raster, shape (height, width, 3), uint8.
    """

    index: int
    timestamp_s: float
    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValueError("pixels must be a (height, width, 3) uint8 array")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("frame must be at least 1x1 pixels")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class FrameSequence:
    """An ordered, uniformly sized, immutable-after-construction frame list.

    Frame indices are strictly increasing (gaps are legal, e.g. after
    noise filtering) and all frames share one resolution.
    """

    frames: list[Frame]
    sample_rate_fps: Fraction = Fraction(1)
    source_id: str = ""

    def __post_init__(self):
        self.sample_rate_fps = parse_rate(self.sample_rate_fps)
        prev = -1
        for frame in self.frames:
            if frame.index <= prev:
                raise ValueError(
                    f"frame indices must be strictly increasing, got {frame.index} after {prev}"
                )
            prev = frame.index
            expected_ts = frame_timestamp(frame.index, self.sample_rate_fps)
            if frame.timestamp_s != expected_ts:
                raise ValueError(
                    f"frame {frame.index} timestamp {frame.timestamp_s} != "
                    f"index/rate = {expected_ts}"
                )
        if self.frames:
            w, h = self.frames[0].width, self.frames[0].height
            for frame in self.frames:
                if (frame.width, frame.height) != (w, h):
                    raise MixedDimensionsError(
                        f"frame {frame.index} is {frame.width}x{frame.height}, "
                        f"expected {w}x{h}"
                    )

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __getitem__(self, i: int) -> Frame:
        return self.frames[i]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def by_index(self) -> dict[int, Frame]:
        """Map original frame index -> Frame."""
        return {f.index: f for f in self.frames}

    def indices(self) -> list[int]:
        return [f.index for f in self.frames]


def _rate_to_json(rate: Fraction):
    return str(rate) if rate.denominator != 1 else rate.numerator


def load_image(path: Path) -> np.ndarray:
    """Decode one image file as an RGB uint8 raster."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise UndecodableImageError(f"cannot decode image file {path}") from exc


def _parse_canonical_indices(paths: Sequence[Path]) -> list[int] | None:
    """Return per-file frame indices when every file follows <name>_NNNNNN."""
    indices = []
    stems = set()
    for path in paths:
        m = _INDEXED_NAME.match(path.stem)
        if m is None:
            return None
        stems.add(m.group("stem"))
        indices.append(int(m.group("index")))
    if len(stems) != 1 or len(set(indices)) != len(indices):
        return None
    return indices


def load_frame_dir(directory: Path | str) -> FrameSequence:
    """Load a pre-extracted frame directory as a FrameSequence.

    Image files are taken in lexicographic order, which must equal
    temporal order. Files named ``<name>_NNNNNN.<ext>`` keep NNNNNN as
    their frame index (so filtered sequences round-trip); any other
    naming gets consecutive indices from 0. An optional manifest.json
    supplies source_id and sample_rate_fps; without one the rate
    defaults to 1 fps and a warning is recorded.

    Raises:
        EmptyDirectoryError: no image files found.
        UndecodableImageError: an image file cannot be decoded.
        MixedDimensionsError: frames disagree on resolution.
    """
    directory = Path(directory)
    paths = sorted(
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not paths:
        raise EmptyDirectoryError(f"no image files found in {directory}")

    source_id = directory.name
    rate = Fraction(1)
    manifest_path = directory / MANIFEST_NAME
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        if "sample_rate_fps" in manifest:
            rate = parse_rate(manifest["sample_rate_fps"])
        source_id = manifest.get("source_id", source_id)
        declared = manifest.get("frame_count")
        if declared is not None and declared != len(paths):
            logger.warning(
                "manifest in %s declares %s frames but %d files found",
                directory, declared, len(paths),
            )
    else:
        logger.warning(
            "no manifest in %s; assuming sample_rate_fps=1", directory
        )

    indices = _parse_canonical_indices(paths) or list(range(len(paths)))

    frames = []
    expected = None
    for idx, path in zip(indices, paths):
        pixels = load_image(path)
        if expected is None:
            expected = pixels.shape
        elif pixels.shape != expected:
            raise MixedDimensionsError(
                f"{path.name} is {pixels.shape[1]}x{pixels.shape[0]}, "
                f"expected {expected[1]}x{expected[0]}"
            )
        frames.append(Frame(idx, frame_timestamp(idx, rate), pixels))

    return FrameSequence(frames, rate, source_id)


def write_frame_dir(seq: FrameSequence, directory: Path | str) -> list[Path]:
    """Write a FrameSequence as lossless PNGs plus a manifest.

    Files are named ``<source_id>_NNNNNN.png`` with the frame's original
    index, so a reload reproduces indices and timestamps exactly.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = seq.source_id or "frames"
    written = []
    for frame in seq:
        path = directory / f"{name}_{frame.index:06d}.png"
        Image.fromarray(frame.pixels).save(path, format="PNG")
        written.append(path)
    manifest = {
        "source_id": seq.source_id,
        "sample_rate_fps": _rate_to_json(seq.sample_rate_fps),
        "frame_count": len(seq),
        "width": seq.width,
        "height": seq.height,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2))
    return written


def sample_via_decoder(
    video_path: Path | str,
    rate_fps: RateLike = 1,
    workdir: Path | str = ".",
    *,
    source_id: str | None = None,
    decoder_template: str = DEFAULT_DECODER_TEMPLATE,
) -> FrameSequence:
    """Sample a video at a fixed rate by driving an external decoder.

    The decoder command is a shell-style template whose tokens may use
    the placeholders ``{input}``, ``{fps}`` and ``{output_pattern}``
    (a printf-style path ending in ``_%06d.png``). Frame files land
    under ``workdir`` and the produced images are loaded, renumbered
    from 0 in temporal order.

    Raises:
        DecoderNotFoundError: the decoder executable is missing.
        DecoderFailedError: nonzero decoder exit (diagnostics attached).
        NoFramesProducedError: the decoder wrote no frame files.
    """
    video_path = Path(video_path)
    rate = parse_rate(rate_fps)
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    if source_id is None:
        source_id = video_path.stem

    output_pattern = workdir / f"{source_id}_%06d.png"
    cmd = [
        token.format(
            input=str(video_path),
            fps=str(rate),
            output_pattern=str(output_pattern),
        )
        for token in shlex.split(decoder_template)
    ]

    logger.info("decoding %s at %s fps: %s", video_path, rate, " ".join(cmd))
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise DecoderNotFoundError(f"decoder executable not found: {cmd[0]}") from exc
    if proc.returncode != 0:
        raise DecoderFailedError(
            f"decoder exited with status {proc.returncode} for {video_path}",
            diagnostics=(proc.stderr or proc.stdout or "").strip(),
        )

    produced = sorted(workdir.glob(f"{source_id}_*.png"))
    if not produced:
        raise NoFramesProducedError(
            f"decoder produced no frames for {video_path} under {workdir}"
        )

    frames = []
    expected = None
    for idx, path in enumerate(produced):
        pixels = load_image(path)
        if expected is None:
            expected = pixels.shape
        elif pixels.shape != expected:
            raise MixedDimensionsError(
                f"{path.name} is {pixels.shape[1]}x{pixels.shape[0]}, "
                f"expected {expected[1]}x{expected[0]}"
            )
        frames.append(Frame(idx, frame_timestamp(idx, rate), pixels))
    return FrameSequence(frames, rate, source_id)
