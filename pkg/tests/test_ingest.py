from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from framerank.errors import (
    DecoderFailedError,
    DecoderNotFoundError,
    EmptyDirectoryError,
    MixedDimensionsError,
    NoFramesProducedError,
    UndecodableImageError,
)
from framerank.ingest import (
    Frame,
    FrameSequence,
    frame_timestamp,
    load_frame_dir,
    parse_rate,
    sample_via_decoder,
    write_frame_dir,
)

from conftest import noise_frame, solid_frame

STUB_DECODER = Path(__file__).parent / "stub_decoder.py"


def stub_template() -> str:
    return f"{sys.executable} {STUB_DECODER} {{input}} {{fps}} {{output_pattern}}"


def test_parse_rate_forms():
    assert parse_rate(1) == Fraction(1)
    assert parse_rate("30000/1001") == Fraction(30000, 1001)
    assert parse_rate(0.5) == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_rate(0)
    with pytest.raises(ValueError):
        parse_rate("-2")


def test_timestamp_is_index_over_rate():
    assert frame_timestamp(37, 1) == 37.0
    assert frame_timestamp(3, Fraction(1, 2)) == 6.0
    assert frame_timestamp(0, "30000/1001") == 0.0


def test_frame_rejects_bad_raster():
    with pytest.raises(ValueError):
        Frame(0, 0.0, np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        Frame(0, 0.0, np.zeros((4, 4, 3), dtype=np.float64))


def test_sequence_rejects_nonincreasing_indices():
    frames = [solid_frame((10, 20, 30), index=1), solid_frame((10, 20, 30), index=1)]
    with pytest.raises(ValueError):
        FrameSequence(frames, 1, "x")


def test_sequence_rejects_mixed_sizes():
    frames = [
        solid_frame((0, 0, 0), size=(320, 240), index=0),
        solid_frame((0, 0, 0), size=(352, 240), index=1),
    ]
    with pytest.raises(MixedDimensionsError):
        FrameSequence(frames, 1, "x")


def test_load_frame_dir_counts_and_indices(tmp_path):
    for i in range(10):
        Image.fromarray(noise_frame(i, size=(16, 12)).pixels).save(
            tmp_path / f"f{i:04d}.png"
        )
    seq = load_frame_dir(tmp_path)
    assert len(seq) == 10
    assert seq.indices() == list(range(10))
    assert seq.sample_rate_fps == 1
    assert seq[3].timestamp_s == 3.0


def test_load_frame_dir_empty(tmp_path):
    with pytest.raises(EmptyDirectoryError):
        load_frame_dir(tmp_path)


def test_load_frame_dir_undecodable_names_file(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"this is not a png")
    with pytest.raises(UndecodableImageError, match="bad.png"):
        load_frame_dir(tmp_path)


def test_load_frame_dir_mixed_dimensions_names_offender(tmp_path):
    Image.fromarray(noise_frame(0, size=(320, 240)).pixels).save(tmp_path / "a.png")
    Image.fromarray(noise_frame(1, size=(320, 240)).pixels).save(tmp_path / "b.png")
    Image.fromarray(noise_frame(2, size=(352, 240)).pixels).save(tmp_path / "c.png")
    with pytest.raises(MixedDimensionsError, match="c.png"):
        load_frame_dir(tmp_path)


def test_round_trip_preserves_everything(tmp_path):
    # gappy indices, as left behind by the noise filter
    frames = [noise_frame(s, size=(20, 14), index=i, rate=2) for s, i in enumerate((0, 2, 5, 9))]
    seq = FrameSequence(frames, Fraction(2), "trip")
    write_frame_dir(seq, tmp_path)
    back = load_frame_dir(tmp_path)
    assert back.source_id == "trip"
    assert back.sample_rate_fps == Fraction(2)
    assert back.indices() == [0, 2, 5, 9]
    for a, b in zip(seq, back):
        assert a.timestamp_s == b.timestamp_s
        assert np.array_equal(a.pixels, b.pixels)


def test_manifest_rate_is_honored(tmp_path):
    for i in range(4):
        Image.fromarray(noise_frame(i, size=(16, 12)).pixels).save(
            tmp_path / f"clip_{i:06d}.png"
        )
    (tmp_path / "manifest.json").write_text(
        json.dumps({"source_id": "clip", "sample_rate_fps": "1/2", "frame_count": 4})
    )
    seq = load_frame_dir(tmp_path)
    assert seq.sample_rate_fps == Fraction(1, 2)
    assert seq[1].timestamp_s == 2.0


def _write_stub_video(path: Path, n_frames: int):
    path.write_text(str(n_frames))


def test_sample_via_decoder_counts(tmp_path):
    video = tmp_path / "v.mpg"
    _write_stub_video(video, 7)
    seq = sample_via_decoder(video, 1, tmp_path / "work", decoder_template=stub_template())
    assert len(seq) == 7
    assert seq.indices() == list(range(7))
    assert seq[3].timestamp_s == 3.0
    assert seq.source_id == "v"


def test_sample_via_decoder_is_deterministic(tmp_path):
    video = tmp_path / "v.mpg"
    _write_stub_video(video, 4)
    sample_via_decoder(video, 1, tmp_path / "w1", decoder_template=stub_template())
    sample_via_decoder(video, 1, tmp_path / "w2", decoder_template=stub_template())
    for a, b in zip(sorted((tmp_path / "w1").iterdir()),
                    sorted((tmp_path / "w2").iterdir())):
        assert a.name == b.name
        assert a.read_bytes() == b.read_bytes()


def test_sample_via_decoder_not_found(tmp_path):
    video = tmp_path / "v.mpg"
    _write_stub_video(video, 3)
    with pytest.raises(DecoderNotFoundError):
        sample_via_decoder(
            video, 1, tmp_path / "work",
            decoder_template="no_such_decoder_xyz {input} {fps} {output_pattern}",
        )


def test_sample_via_decoder_nonzero_exit_has_diagnostics(tmp_path):
    with pytest.raises(DecoderFailedError) as err:
        sample_via_decoder(
            tmp_path / "missing.mpg", 1, tmp_path / "work",
            decoder_template=stub_template(),
        )
    assert "no such input" in err.value.diagnostics


def test_sample_via_decoder_zero_frames(tmp_path):
    video = tmp_path / "empty.mpg"
    _write_stub_video(video, 0)
    with pytest.raises(NoFramesProducedError):
        sample_via_decoder(video, 1, tmp_path / "work", decoder_template=stub_template())
