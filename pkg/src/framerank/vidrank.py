"""Damped random-walk ranking and penalized key-frame selection.

Ranks follow the classic damped fixed point
``rank(u) = (1 - d) + d * sum_{v in adj(u)} rank(v) / deg(v)``
computed by synchronous power iteration from a uniform start (the
scalar teleport term means ranks sum to about n, not 1). Selection then
repeatedly takes the highest-ranked remaining node and suppresses its
neighbors under one of three penalty models so near-duplicates are not
re-selected:

* MODEL1 - similarity-weighted penalty: neighbors lose
  alpha * sim(u, h) * rank(h).
* MODEL2 - uniform penalty: neighbors lose alpha * rank(h).
* MODEL3 - elimination: neighbors are zeroed (removed from play).

Selection stops once k frames are chosen or every remaining rank is
zero or negative; delivered key frames are finally sorted into temporal
order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ingest import FrameSequence
from .simgraph import SimilarityGraph


class Model(Enum):
    """Neighbor-suppression rule applied after each selection."""

    MODEL1 = "MODEL1"  # penalty weighted by edge similarity
    MODEL2 = "MODEL2"  # uniform penalty
    MODEL3 = "MODEL3"  # eliminate neighbors outright

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        if text in {"1", "2", "3"}:
            text = f"MODEL{text}"
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected 1, 2 or 3") from None


@dataclass(frozen=True)
class RankParams:
    """Power-iteration settings."""

    damping: float = 0.85
    tol: float = 1e-6
    max_iters: int = 100
    initial_rank: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class RankState:
    """Converged (or best-effort) per-node scores.

    `selected` and `eliminated` record the outcome of the latest
    selection pass over this state; `vdr` keeps the converged ranks
    (selection works on its own copy, so repeated passes agree).
    """

    vdr: np.ndarray
    iterations: int
    converged: bool
    selected: list[int] = field(default_factory=list)
    eliminated: set[int] = field(default_factory=set)


@dataclass(frozen=True)
class SelectionParams:
    k_frames: int
    model: Model = Model.MODEL3
    alpha: float = 0.5
    rerank: bool = False

    def __post_init__(self):
        if self.k_frames < 1:
            raise ValueError("k_frames must be at least 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class KeyFrame:
    frame_index: int
    timestamp_s: float | None
    rank: float


@dataclass
class Summary:
    """A delivered key-frame set, in temporal order."""

    source_id: str
    model: Model
    alpha: float
    damping: float
    k_requested: int
    k_delivered: int
    key_frames: list[KeyFrame]

    def frame_indices(self) -> list[int]:
        return [kf.frame_index for kf in self.key_frames]

    def to_json(self) -> dict:
        return {
            "source_id": self.source_id,
            "model": self.model.value,
            "alpha": self.alpha,
            "d": self.damping,
            "k_requested": self.k_requested,
            "k_delivered": self.k_delivered,
            "key_frames": [
                {
                    "frame_index": kf.frame_index,
                    "timestamp_s": kf.timestamp_s,
                    "rank": kf.rank,
                }
                for kf in self.key_frames
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Summary":
        return cls(
            source_id=data["source_id"],
            model=Model.parse(data["model"]),
            alpha=data["alpha"],
            damping=data["d"],
            k_requested=data["k_requested"],
            k_delivered=data["k_delivered"],
            key_frames=[
                KeyFrame(kf["frame_index"], kf["timestamp_s"], kf["rank"])
                for kf in data["key_frames"]
            ],
        )


def compute_ranks(g: SimilarityGraph, params: RankParams | None = None) -> RankState:
    """Power-iterate the damped walk to its fixed point.

    Synchronous updates from an all-`initial_rank` start; stops when the
    L1 change drops below tol. The affine iteration contracts with
    factor `damping`, so the fixed point does not depend on the start.
    Non-convergence within max_iters raises a RuntimeWarning but still
    returns the last iterate with its iteration count.
    """
    p = params or RankParams()
    nbrs = [np.array(g.neighbors(u), dtype=np.intp) for u in range(g.n)]
    deg = np.array([len(a) for a in nbrs], dtype=np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)

    vdr = np.full(g.n, p.initial_rank, dtype=np.float64)
    teleport = 1.0 - p.damping
    converged = False
    iterations = 0
    for iterations in range(1, p.max_iters + 1):
        contrib = vdr * inv_deg
        nxt = teleport + p.damping * np.array(
            [contrib[a].sum() for a in nbrs], dtype=np.float64
        )
        delta = float(np.abs(nxt - vdr).sum())
        vdr = nxt
        if delta < p.tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"rank iteration did not converge in {p.max_iters} iterations",
            RuntimeWarning,
            stacklevel=2,
        )
    return RankState(vdr=vdr, iterations=iterations, converged=converged)


def _argmax_unselected(vdr: np.ndarray, selected: set[int]) -> int | None:
    """Highest-score node not yet selected; ties go to the lowest node
    id (= lowest frame index). None when nothing remains."""
    best, best_score = None, -np.inf
    for u in range(vdr.shape[0]):
        if u in selected:
            continue
        if vdr[u] > best_score:
            best, best_score = u, vdr[u]
    return best


def select_keyframes(
    g: SimilarityGraph,
    ranks: RankState,
    params: SelectionParams,
    seq: FrameSequence | None = None,
    *,
    rank_params: RankParams | None = None,
) -> Summary:
    """Extract up to k_frames key frames from a ranked graph.

    Each round picks the argmax of the working scores (must be strictly
    positive), zeroes it, and suppresses its not-yet-selected neighbors
    per the model. Delivering fewer than k frames is a legitimate
    outcome. With rerank=True (elimination model only) the ranks are
    recomputed on the surviving subgraph every round instead of reusing
    the initial vector.

    `seq` supplies source_id and timestamps; without it they are left
    empty/None (selection itself needs only the graph).
    """
    if params.rerank and params.model is Model.MODEL3:
        picks, eliminated = _select_with_rerank(g, params, rank_params)
    else:
        picks, eliminated = _select_static(g, ranks.vdr, params)

    ranks.selected = [node for node, _ in picks]
    ranks.eliminated = eliminated

    ts = {}
    source_id = ""
    if seq is not None:
        ts = {f.index: f.timestamp_s for f in seq}
        source_id = seq.source_id

    key_frames = [
        KeyFrame(
            frame_index=g.frame_index_of[node],
            timestamp_s=ts.get(g.frame_index_of[node]),
            rank=rank,
        )
        for node, rank in picks
    ]
    key_frames.sort(key=lambda kf: kf.frame_index)
    damping = (rank_params or RankParams()).damping
    return Summary(
        source_id=source_id,
        model=params.model,
        alpha=params.alpha,
        damping=damping,
        k_requested=params.k_frames,
        k_delivered=len(key_frames),
        key_frames=key_frames,
    )


def _select_static(
    g: SimilarityGraph, vdr0: np.ndarray, params: SelectionParams
) -> tuple[list[tuple[int, float]], set[int]]:
    vdr = np.asarray(vdr0, dtype=np.float64).copy()
    selected: set[int] = set()
    eliminated: set[int] = set()
    picks: list[tuple[int, float]] = []
    while len(picks) < params.k_frames:
        h = _argmax_unselected(vdr, selected)
        if h is None or vdr[h] <= 0.0:
            break
        rank_h = float(vdr[h])
        picks.append((h, rank_h))
        selected.add(h)
        vdr[h] = 0.0
        for u in g.neighbors(h):
            if u in selected:
                continue
            if params.model is Model.MODEL1:
                vdr[u] -= params.alpha * g.sim(u, h) * rank_h
            elif params.model is Model.MODEL2:
                vdr[u] -= params.alpha * rank_h
            else:
                vdr[u] = 0.0
                eliminated.add(u)
    return picks, eliminated


def _select_with_rerank(
    g: SimilarityGraph, params: SelectionParams, rank_params: RankParams | None
) -> tuple[list[tuple[int, float]], set[int]]:
    """Elimination with per-round re-ranking on the shrinking graph."""
    active = list(range(g.n))
    eliminated: set[int] = set()
    picks: list[tuple[int, float]] = []
    while len(picks) < params.k_frames and active:
        sub, mapping = g.subgraph(active)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            state = compute_ranks(sub, rank_params)
        local = _argmax_unselected(state.vdr, set())
        h = mapping[local]
        picks.append((h, float(state.vdr[local])))
        eliminated |= {u for u in g.neighbors(h) if u in active}
        active = [u for u in active if u != h and u not in eliminated]
    return picks, eliminated
