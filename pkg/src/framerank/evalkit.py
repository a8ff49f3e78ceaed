"""Summary evaluation: compression ratio and comparison of user summaries.

Compression Ratio is 1 - M/N for M key frames out of N frames. The
user-summary comparison greedily matches system key frames against a
human-made summary by color-histogram intersection: system frames are
visited in temporal order, each takes the best-intersecting unconsumed
user frame at or above the match threshold, and matched user frames are
removed from later iterations. Accuracy is matched/user-count, error is
non-matched/user-count.

User summaries come either as ``users/<user_id>/`` directories of frame
images or as ``users/<user_id>.txt`` files of sampled-frame indices
(one per line) resolved against the sampled sequence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySummaryError, EvaluationError
from .features import color_histogram
from .ingest import IMAGE_SUFFIXES, FrameSequence, load_image
from .vidrank import Summary

logger = logging.getLogger(__name__)

DEFAULT_MATCH_THRESHOLD = 0.5


def compression_ratio(m_keyframes: int, n_frames: int) -> float:
    """1 - M/N: the fraction of frames the summary leaves out."""
    if n_frames == 0:
        raise ValueError("total frame count must be positive")
    if m_keyframes < 1:
        raise ValueError("key-frame count must be at least 1")
    if m_keyframes > n_frames:
        raise ValueError(
            f"key-frame count {m_keyframes} exceeds total frames {n_frames}"
        )
    return 1.0 - m_keyframes / n_frames


def histogram_intersection(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of elementwise minima; in [0, 1] for L1-normalized inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.minimum(a, b).sum())


@dataclass
class UserSummary:
    """One human-made key-frame set, as raw RGB rasters."""

    user_id: str
    images: list[np.ndarray]

    def __post_init__(self):
        if not self.images:
            raise EmptySummaryError(f"user summary {self.user_id!r} is empty")

    @property
    def n_frames(self) -> int:
        return len(self.images)


@dataclass
class CusResult:
    user_id: str
    n_matched: int
    n_nonmatched: int
    n_user: int
    cus_a: float
    cus_e: float

    def to_json(self) -> dict:
        return {
            "user_id": self.user_id,
            "n_matched": self.n_matched,
            "n_nonmatched": self.n_nonmatched,
            "n_user": self.n_user,
            "cus_a": self.cus_a,
            "cus_e": self.cus_e,
        }


def cus(
    system_images,
    user: UserSummary,
    match_threshold: float = DEFAULT_MATCH_THRESHOLD,
    *,
    histogram_fn=color_histogram,
) -> CusResult:
    """Greedy histogram-intersection matching of a system summary
    (temporal order) against one user summary.

    Matching uses the pipeline's 256-bin HSV histogram by default;
    `histogram_fn` swaps in another normalized quantization.

    Raises:
        EmptySummaryError: the system summary has no frames.
    """
    system_images = list(system_images)
    if not system_images:
        raise EmptySummaryError("system summary is empty")

    system_hists = [histogram_fn(img) for img in system_images]
    user_hists = [histogram_fn(img) for img in user.images]
    consumed = [False] * len(user_hists)

    n_matched = 0
    for sh in system_hists:
        best, best_score = None, -1.0
        for j, uh in enumerate(user_hists):
            if consumed[j]:
                continue
            score = histogram_intersection(sh, uh)
            if score > best_score:
                best, best_score = j, score
        if best is not None and best_score >= match_threshold:
            consumed[best] = True
            n_matched += 1

    n_nonmatched = len(system_hists) - n_matched
    n_user = user.n_frames
    return CusResult(
        user_id=user.user_id,
        n_matched=n_matched,
        n_nonmatched=n_nonmatched,
        n_user=n_user,
        cus_a=n_matched / n_user,
        cus_e=n_nonmatched / n_user,
    )


def load_user_summaries(
    users_dir: Path | str, seq: FrameSequence | None = None
) -> list[UserSummary]:
    """Load every user summary under a directory.

    ``<user_id>/`` subdirectories contribute their image files in
    lexicographic order; ``<user_id>.txt`` files contribute sampled-frame
    indices resolved against `seq`.
    """
    users_dir = Path(users_dir)
    if not users_dir.is_dir():
        raise EvaluationError(f"user summaries directory not found: {users_dir}")

    by_index = seq.by_index() if seq is not None else {}
    summaries = []
    for entry in sorted(users_dir.iterdir()):
        if entry.is_dir():
            paths = sorted(
                p for p in entry.iterdir()
                if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
            )
            if not paths:
                raise EmptySummaryError(f"user directory {entry} holds no images")
            summaries.append(
                UserSummary(entry.name, [load_image(p) for p in paths])
            )
        elif entry.suffix == ".txt":
            if seq is None:
                raise EvaluationError(
                    f"{entry.name} lists frame indices but no sampled sequence was given"
                )
            images = []
            for line in entry.read_text().split():
                idx = int(line)
                frame = by_index.get(idx)
                if frame is None:
                    raise EvaluationError(
                        f"{entry.name} references frame index {idx}, "
                        "absent from the sampled sequence"
                    )
                images.append(frame.pixels)
            if not images:
                raise EmptySummaryError(f"user file {entry} lists no frames")
            summaries.append(UserSummary(entry.stem, images))
    if not summaries:
        raise EvaluationError(f"no user summaries found under {users_dir}")
    return summaries


def summary_images(summary: Summary, seq: FrameSequence) -> list[np.ndarray]:
    """System key-frame rasters in temporal order."""
    by_index = seq.by_index()
    images = []
    for kf in sorted(summary.key_frames, key=lambda k: k.frame_index):
        frame = by_index.get(kf.frame_index)
        if frame is None:
            raise EvaluationError(
                f"summary frame index {kf.frame_index} not found in the sampled frames"
            )
        images.append(frame.pixels)
    return images


@dataclass
class VideoEval:
    video_id: str
    cr: float
    users: list[CusResult]
    mean_cus_a: float
    mean_cus_e: float

    def to_json(self) -> dict:
        return {
            "video_id": self.video_id,
            "cr": self.cr,
            "users": [u.to_json() for u in self.users],
            "mean_cus_a": self.mean_cus_a,
            "mean_cus_e": self.mean_cus_e,
        }


@dataclass
class EvalReport:
    videos: list[VideoEval]
    mean_cr: float
    mean_cus_a: float
    mean_cus_e: float

    def to_json(self) -> dict:
        return {
            "videos": [v.to_json() for v in self.videos],
            "aggregate": {
                "cr": self.mean_cr,
                "cus_a": self.mean_cus_a,
                "cus_e": self.mean_cus_e,
            },
        }

    def format_table(self) -> str:
        """Aligned text table: measure rows, one column per video plus
        the mean over videos."""
        headers = [v.video_id for v in self.videos] + ["Mean"]
        rows = [
            ("CUS(A)", [v.mean_cus_a for v in self.videos] + [self.mean_cus_a], "{:.4f}"),
            ("CUS(E)", [v.mean_cus_e for v in self.videos] + [self.mean_cus_e], "{:.4f}"),
            ("Compression Ratio", [v.cr for v in self.videos] + [self.mean_cr], "{:.2f}"),
        ]
        label_w = max(len("Measure"), max(len(r[0]) for r in rows))
        col_ws = [max(len(h), 8) for h in headers]
        lines = [
            "  ".join(
                ["Measure".ljust(label_w)]
                + [h.rjust(w) for h, w in zip(headers, col_ws)]
            )
        ]
        for label, values, fmt in rows:
            lines.append(
                "  ".join(
                    [label.ljust(label_w)]
                    + [fmt.format(v).rjust(w) for v, w in zip(values, col_ws)]
                )
            )
        return "\n".join(lines)


def evaluate_video(
    summary: Summary,
    seq: FrameSequence,
    users: list[UserSummary],
    *,
    n_sampled: int | None = None,
    match_threshold: float = DEFAULT_MATCH_THRESHOLD,
    cr_denominator: str = "sampled",
    raw_frame_count: int | None = None,
) -> VideoEval:
    """CR plus one CusResult per user for a single video.

    The CR denominator defaults to the sampled frame count; passing
    cr_denominator="raw" uses raw_frame_count (the pre-sampling total)
    instead.
    """
    if cr_denominator == "sampled":
        n_total = n_sampled if n_sampled is not None else len(seq)
    elif cr_denominator == "raw":
        if raw_frame_count is None:
            raise EvaluationError(
                "cr_denominator='raw' requires raw_frame_count"
            )
        n_total = raw_frame_count
    else:
        raise ValueError("cr_denominator must be 'sampled' or 'raw'")

    cr = compression_ratio(len(summary.key_frames), n_total)
    sys_images = summary_images(summary, seq)
    results = [cus(sys_images, user, match_threshold) for user in users]
    return VideoEval(
        video_id=summary.source_id or seq.source_id,
        cr=cr,
        users=results,
        mean_cus_a=float(np.mean([r.cus_a for r in results])),
        mean_cus_e=float(np.mean([r.cus_e for r in results])),
    )


def aggregate(videos: list[VideoEval]) -> EvalReport:
    """Average per-video results into a corpus-level report."""
    if not videos:
        raise EvaluationError("nothing to aggregate")
    return EvalReport(
        videos=videos,
        mean_cr=float(np.mean([v.cr for v in videos])),
        mean_cus_a=float(np.mean([v.mean_cus_a for v in videos])),
        mean_cus_e=float(np.mean([v.mean_cus_e for v in videos])),
    )
