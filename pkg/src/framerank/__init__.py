"""framerank: key-frame extraction by penalized random-walk ranking.

Pipeline: fixed-rate frame sampling -> monochromatic-noise filtering ->
hybrid color/edge descriptors -> similarity graph -> damped-walk ranks
-> penalized selection -> temporally ordered storyboard, plus an
evaluation kit (compression ratio, user-summary comparison).
"""

from .errors import FrameRankError
from .features import EdgeKernelSet, FeatureVector, compute_features
from .ingest import Frame, FrameSequence, load_frame_dir, sample_via_decoder
from .prefilter import NoiseReport, remove_monochromatic
from .simgraph import SimilarityGraph, build_graph, distance_matrix
from .storyboard import Storyboard, render_contact_sheet
from .vidrank import (
    Model,
    RankParams,
    RankState,
    SelectionParams,
    Summary,
    compute_ranks,
    select_keyframes,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeKernelSet",
    "FeatureVector",
    "Frame",
    "FrameRankError",
    "FrameSequence",
    "Model",
    "NoiseReport",
    "RankParams",
    "RankState",
    "SelectionParams",
    "SimilarityGraph",
    "Storyboard",
    "Summary",
    "build_graph",
    "compute_features",
    "compute_ranks",
    "distance_matrix",
    "load_frame_dir",
    "remove_monochromatic",
    "render_contact_sheet",
    "sample_via_decoder",
    "select_keyframes",
]
