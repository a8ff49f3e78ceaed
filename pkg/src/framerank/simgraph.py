"""Frame-similarity graph construction.

Pairwise L1 distances over the fused descriptors are converted to
similarities sim = 1 - d/d_max (bounded in [0, 1]), and an undirected
edge is kept wherever the similarity reaches the adaptive threshold
mean + beta * std computed over all off-diagonal pairs. Edges store
their similarity for the weighted penalty model; the random walk itself
runs on the plain row-normalized adjacency (uniform weight over
neighbors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FeatureVector

DEFAULT_GRAPH_BETA = 0.5


def distance_matrix(features) -> np.ndarray:
    """All pairwise L1 distances over fused descriptors.

    Returns an n x n symmetric float array with a zero diagonal.
    """
    if len(features) == 0:
        raise ValueError("distance matrix needs at least one feature vector")
    fused = np.stack([
        fv.fused if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=np.float64)
        for fv in features
    ])
    n = fused.shape[0]
    d = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        d[i] = np.abs(fused - fused[i]).sum(axis=1)
    return d


@dataclass
class SimilarityGraph:
    """Undirected frame graph with similarity-weighted edges.

    Nodes are 0..n-1 in frame order; frame_index_of maps each node back
    to its original sampled-frame index.
    """

    n: int
    frame_index_of: list[int]
    threshold: float | None
    _adj: list[dict[int, float]] = field(repr=False)

    def __post_init__(self):
        if len(self.frame_index_of) != self.n or len(self._adj) != self.n:
            raise ValueError("node count mismatch")
        for u, nbrs in enumerate(self._adj):
            if u in nbrs:
                raise ValueError(f"self-loop at node {u}")
            for v, sim in nbrs.items():
                if not (0.0 < sim <= 1.0):
                    raise ValueError(f"edge ({u},{v}) similarity {sim} outside (0, 1]")
                if self._adj[v].get(u) != sim:
                    raise ValueError(f"edge ({u},{v}) is not symmetric")

    @classmethod
    def from_edges(cls, n, edges, frame_index_of=None, threshold=None):
        """Build directly from (u, v, sim) triples (mainly for tests)."""
        adj: list[dict[int, float]] = [{} for _ in range(n)]
        for u, v, sim in edges:
            adj[u][v] = float(sim)
            adj[v][u] = float(sim)
        if frame_index_of is None:
            frame_index_of = list(range(n))
        return cls(n, list(frame_index_of), threshold, adj)

    def neighbors(self, u: int) -> list[int]:
        return sorted(self._adj[u])

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def sim(self, u: int, v: int) -> float:
        return self._adj[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> list[tuple[int, int, float]]:
        """Each undirected edge once, as (u, v, sim) with u < v."""
        out = []
        for u, nbrs in enumerate(self._adj):
            for v in sorted(nbrs):
                if u < v:
                    out.append((u, v, nbrs[v]))
        return out

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj) // 2

    def subgraph(self, nodes) -> tuple["SimilarityGraph", list[int]]:
        """Induced subgraph on `nodes`; returns it plus the node mapping
        (new node id -> old node id)."""
        keep = sorted(nodes)
        pos = {old: new for new, old in enumerate(keep)}
        adj = [
            {pos[v]: s for v, s in self._adj[old].items() if v in pos}
            for old in keep
        ]
        fidx = [self.frame_index_of[old] for old in keep]
        return SimilarityGraph(len(keep), fidx, self.threshold, adj), keep

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "threshold": self.threshold,
            "edges": [[u, v, s] for u, v, s in self.edges()],
        }


def build_graph(
    dm: np.ndarray,
    beta_graph: float = DEFAULT_GRAPH_BETA,
    *,
    frame_index_of=None,
) -> SimilarityGraph:
    """Threshold pairwise similarities into an undirected graph.

    sim(u, v) = 1 - d(u, v)/d_max over the off-diagonal distances
    (all 1.0 when d_max is 0); the edge threshold is Eq.-style adaptive,
    mean + beta_graph * std over the off-diagonal similarities, and a
    pair at exactly the threshold keeps its edge.
    """
    dm = np.asarray(dm, dtype=np.float64)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1]:
        raise ValueError("distance matrix must be square")
    n = dm.shape[0]
    if frame_index_of is None:
        frame_index_of = list(range(n))

    adj: list[dict[int, float]] = [{} for _ in range(n)]
    if n == 1:
        return SimilarityGraph(n, list(frame_index_of), None, adj)

    iu, ju = np.triu_indices(n, k=1)
    off_diag = dm[iu, ju]
    d_max = float(off_diag.max())
    if d_max == 0.0:
        sims = np.ones_like(off_diag)
    else:
        sims = 1.0 - off_diag / d_max
    threshold = float(sims.mean() + beta_graph * sims.std())

    for u, v, sim in zip(iu, ju, sims):
        if sim >= threshold and sim > 0.0:
            adj[int(u)][int(v)] = float(sim)
            adj[int(v)][int(u)] = float(sim)
    return SimilarityGraph(n, list(frame_index_of), threshold, adj)


def row_normalize(g: SimilarityGraph) -> np.ndarray:
    """Dense row-normalized walk matrix X: X[u, v] = 1/deg(u) for each
    neighbor v; degree-0 nodes get an all-zero row."""
    x = np.zeros((g.n, g.n), dtype=np.float64)
    for u in range(g.n):
        deg = g.degree(u)
        if deg:
            for v in g.neighbors(u):
                x[u, v] = 1.0 / deg
    return x
