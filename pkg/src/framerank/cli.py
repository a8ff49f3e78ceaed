"""Command-line entry point: summarize, evaluate, inspect.

A TOML config file can preload any tunable; command-line flags override
it. Every run writes a manifest echoing the fully resolved
configuration so experiments are reproducible byte for byte.

Exit codes: 0 success, 1 usage/config, 2 ingest failure, 3 pipeline
failure, 4 evaluation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import evalkit, ingest, prefilter, simgraph, storyboard, vidrank
from .errors import EvaluationError, FrameRankError, IngestError
from .features import DEFAULT_EDGE_THRESHOLD, EdgeKernelSet, compute_features_many
from .ingest import DEFAULT_DECODER_TEMPLATE, FrameSequence, parse_rate
from .vidrank import Model, RankParams, SelectionParams

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INGEST = 2
EXIT_PIPELINE = 3
EXIT_EVALUATION = 4


@dataclass
class RunConfig:
    """All pipeline tunables with their defaults."""

    sample_rate_fps: Fraction = Fraction(1)
    beta_noise: float = 1.8
    beta_graph: float = 0.5
    damping: float = 0.85
    alpha: float = 0.5
    model: Model = Model.MODEL3
    k_frames: int | None = None
    edge_response_threshold: float = DEFAULT_EDGE_THRESHOLD
    block_grid: int = 4
    match_threshold: float = 0.5
    cr_denominator: str = "sampled"
    tol: float = 1e-6
    max_iters: int = 100
    columns: int = 5
    tile_size: tuple[int, int] | None = None
    threads: int = 1
    rerank: bool = False
    noise_normalized_bins: bool = True
    decoder_template: str = DEFAULT_DECODER_TEMPLATE

    def validate(self) -> None:
        """Re-validate every owning module's parameter ranges."""
        self.sample_rate_fps = parse_rate(self.sample_rate_fps)
        if self.beta_noise < 0 or self.beta_graph < 0:
            raise ValueError("beta values must be non-negative")
        RankParams(damping=self.damping, tol=self.tol, max_iters=self.max_iters)
        if self.k_frames is not None:
            SelectionParams(
                k_frames=self.k_frames, model=self.model,
                alpha=self.alpha, rerank=self.rerank,
            )
        elif self.alpha <= 0:
            raise ValueError("alpha must be positive")
        EdgeKernelSet(edge_response_threshold=self.edge_response_threshold)
        if self.block_grid < 1:
            raise ValueError("block_grid must be at least 1")
        if not 0.0 <= self.match_threshold <= 1.0:
            raise ValueError("match_threshold must be in [0, 1]")
        if self.cr_denominator not in ("sampled", "raw"):
            raise ValueError("cr_denominator must be 'sampled' or 'raw'")
        if self.columns < 1:
            raise ValueError("columns must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def apply(self, overrides: dict) -> set[str]:
        names = {f.name for f in fields(self)}
        applied = set()
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in names:
                raise ValueError(f"unknown configuration key {key!r}")
            if key == "model":
                value = Model.parse(value)
            elif key == "sample_rate_fps":
                value = parse_rate(value)
            elif key == "tile_size" and isinstance(value, str):
                value = _parse_tile_size(value)
            setattr(self, key, value)
            applied.add(key)
        return applied

    @classmethod
    def load(cls, config_file: Path | str | None, overrides: dict) -> "RunConfig":
        cfg = cls()
        explicit = set()
        if config_file is not None:
            with open(config_file, "rb") as fh:
                explicit |= cfg.apply(tomllib.load(fh))
        explicit |= cfg.apply(overrides)
        cfg.validate()
        # which keys were set by the user (file or flag), e.g. to let an
        # explicit fps override a frame-dir manifest
        cfg.explicit_keys = explicit
        return cfg

    def to_json(self) -> dict:
        rate = self.sample_rate_fps
        return {
            "sample_rate_fps": str(rate) if rate.denominator != 1 else rate.numerator,
            "beta_noise": self.beta_noise,
            "beta_graph": self.beta_graph,
            "damping": self.damping,
            "alpha": self.alpha,
            "model": self.model.value,
            "k_frames": self.k_frames,
            "edge_response_threshold": self.edge_response_threshold,
            "block_grid": self.block_grid,
            "match_threshold": self.match_threshold,
            "cr_denominator": self.cr_denominator,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "columns": self.columns,
            "tile_size": list(self.tile_size) if self.tile_size else None,
            "threads": self.threads,
            "rerank": self.rerank,
            "noise_normalized_bins": self.noise_normalized_bins,
            "decoder_template": self.decoder_template,
        }


def _parse_tile_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ValueError(f"tile size must look like 320x240, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML config file; flags override it")
    parser.add_argument("--fps", dest="sample_rate_fps",
                        help="sampling rate in frames/second (e.g. 1 or 30000/1001)")
    parser.add_argument("--workdir", type=Path, default=Path("framerank_work"),
                        help="scratch directory for decoded frames")
    parser.add_argument("--beta-noise", dest="beta_noise", type=float,
                        help="noise-filter threshold multiplier (default 1.8)")
    parser.add_argument("--beta-graph", dest="beta_graph", type=float,
                        help="edge-threshold multiplier (default 0.5)")
    parser.add_argument("--damping", type=float, help="walk damping factor (default 0.85)")
    parser.add_argument("--alpha", type=float, help="penalty strength (default 0.5)")
    parser.add_argument("--edge-threshold", dest="edge_response_threshold", type=float,
                        help="block edge-response threshold (default 11/255)")
    parser.add_argument("--block-grid", dest="block_grid", type=int,
                        help="blocks per sub-image side (default 4)")
    parser.add_argument("--tol", type=float, help="rank convergence tolerance")
    parser.add_argument("--max-iters", dest="max_iters", type=int,
                        help="rank iteration cap")
    parser.add_argument("--threads", type=int, help="worker cap for per-frame features")
    parser.add_argument("--decoder-template", dest="decoder_template",
                        help="decoder command template with {input} {fps} {output_pattern}")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="framerank",
                     description="Key-frame extraction by penalized graph ranking")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sum = sub.add_parser("summarize", help="extract key frames and render a storyboard")
    _add_common(p_sum)
    p_sum.add_argument("--input", required=True, type=Path,
                       help="video file or pre-extracted frame directory")
    p_sum.add_argument("-k", "--k-frames", dest="k_frames", type=int,
                       help="number of key frames to extract (required here "
                            "or in the config file)")
    p_sum.add_argument("--model", help="selection model: 1, 2 or 3 (default 3)")
    p_sum.add_argument("--rerank", action="store_const", const=True, default=None,
                       help="experimental: re-rank the reduced graph each round (model 3)")
    p_sum.add_argument("--columns", type=int, help="storyboard columns (default 5)")
    p_sum.add_argument("--tile-size", dest="tile_size",
                       help="downsample tiles to WxH (default native size)")
    p_sum.add_argument("-o", "--out", type=Path, default=Path("framerank_out"),
                       help="output directory")

    p_eval = sub.add_parser("evaluate", help="score a summary against user summaries")
    _add_common(p_eval)
    p_eval.add_argument("--summary", required=True, type=Path, help="summary JSON file")
    p_eval.add_argument("--users", required=True, type=Path,
                        help="directory of user summaries")
    p_eval.add_argument("--frames", required=True, type=Path,
                        help="directory of the sampled frames")
    p_eval.add_argument("--match-threshold", dest="match_threshold", type=float,
                        help="histogram-intersection match threshold (default 0.5)")
    p_eval.add_argument("--cr-denominator", dest="cr_denominator",
                        choices=("sampled", "raw"))
    p_eval.add_argument("--raw-frame-count", dest="raw_frame_count", type=int,
                        help="pre-sampling frame total (needed for --cr-denominator raw)")
    p_eval.add_argument("-o", "--out", type=Path, help="write the report JSON here")

    p_ins = sub.add_parser("inspect", help="dump a pipeline intermediate as JSON")
    _add_common(p_ins)
    p_ins.add_argument("target", choices=("features", "graph", "ranks"))
    p_ins.add_argument("--input", required=True, type=Path,
                       help="video file or frame directory")

    return parser


_CONFIG_KEYS = (
    "sample_rate_fps", "beta_noise", "beta_graph", "damping", "alpha", "model",
    "k_frames", "edge_response_threshold", "block_grid", "match_threshold",
    "cr_denominator", "tol", "max_iters", "columns", "tile_size", "threads",
    "rerank", "decoder_template",
)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key) for key in _CONFIG_KEYS if hasattr(args, key)
    }
    return RunConfig.load(getattr(args, "config", None), overrides)


def _acquire_frames(cfg: RunConfig, input_path: Path, workdir: Path) -> FrameSequence:
    if input_path.is_dir():
        seq = ingest.load_frame_dir(input_path)
        fps_explicit = "sample_rate_fps" in getattr(cfg, "explicit_keys", set())
        if fps_explicit and seq.sample_rate_fps != cfg.sample_rate_fps:
            seq = _with_rate(seq, cfg.sample_rate_fps)
        return seq
    return ingest.sample_via_decoder(
        input_path, cfg.sample_rate_fps, workdir,
        decoder_template=cfg.decoder_template,
    )


def _with_rate(seq: FrameSequence, rate: Fraction) -> FrameSequence:
    frames = [
        ingest.Frame(f.index, ingest.frame_timestamp(f.index, rate), f.pixels)
        for f in seq
    ]
    return FrameSequence(frames, rate, seq.source_id)


@dataclass
class PipelineRun:
    """Intermediates of one summarize/inspect pass."""

    seq_sampled: FrameSequence
    seq_kept: FrameSequence
    noise_report: prefilter.NoiseReport
    feature_vectors: list
    graph: simgraph.SimilarityGraph
    ranks: vidrank.RankState


def _run_pipeline(cfg: RunConfig, input_path: Path, workdir: Path,
                  *, through: str = "ranks") -> PipelineRun:
    seq = _acquire_frames(cfg, input_path, workdir)
    logger.info("sampled %d frames from %s", len(seq), input_path)

    kept, report = prefilter.remove_monochromatic(
        seq, cfg.beta_noise, normalized_bins=cfg.noise_normalized_bins
    )
    if report.discarded_indices:
        logger.info("noise filter discarded %d frames", len(report.discarded_indices))

    kernels = EdgeKernelSet(edge_response_threshold=cfg.edge_response_threshold)
    fvs = compute_features_many(
        kept, kernels, block_grid=cfg.block_grid, threads=cfg.threads
    )
    if through == "features":
        return PipelineRun(seq, kept, report, fvs, None, None)

    dm = simgraph.distance_matrix(fvs)
    graph = simgraph.build_graph(dm, cfg.beta_graph, frame_index_of=kept.indices())
    if through == "graph":
        return PipelineRun(seq, kept, report, fvs, graph, None)

    ranks = vidrank.compute_ranks(
        graph, RankParams(damping=cfg.damping, tol=cfg.tol, max_iters=cfg.max_iters)
    )
    return PipelineRun(seq, kept, report, fvs, graph, ranks)


def cmd_summarize(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    if cfg.k_frames is None:
        raise ValueError("k_frames is required")
    run = _run_pipeline(cfg, args.input, args.workdir)

    selection = SelectionParams(
        k_frames=cfg.k_frames, model=cfg.model, alpha=cfg.alpha, rerank=cfg.rerank
    )
    rank_params = RankParams(damping=cfg.damping, tol=cfg.tol, max_iters=cfg.max_iters)
    summary = vidrank.select_keyframes(
        run.graph, run.ranks, selection, run.seq_kept, rank_params=rank_params
    )

    board = storyboard.render_contact_sheet(
        summary, run.seq_kept, args.out,
        columns=cfg.columns, tile_size=cfg.tile_size,
    )

    manifest = {
        "input": str(args.input),
        "source_id": summary.source_id,
        "config": cfg.to_json(),
        "frames_sampled": len(run.seq_sampled),
        "frames_kept": len(run.seq_kept),
        "noise_report": run.noise_report.to_json(),
        "graph": {
            "n": run.graph.n,
            "threshold": run.graph.threshold,
            "edge_count": run.graph.edge_count(),
        },
        "rank_iterations": run.ranks.iterations,
        "rank_converged": run.ranks.converged,
        "outputs": {
            "summary": board.summary_path.name,
            "storyboard": board.sheet_path.name,
            "key_frames": [p.name for p in board.keyframe_paths],
        },
    }
    manifest_path = Path(args.out) / f"{summary.source_id or 'summary'}_run.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    print(
        f"delivered {summary.k_delivered}/{summary.k_requested} key frames "
        f"({summary.model.value}) -> {board.sheet_path}"
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    with open(args.summary) as fh:
        summary = vidrank.Summary.from_json(json.load(fh))
    seq = ingest.load_frame_dir(args.frames)
    users = evalkit.load_user_summaries(args.users, seq)
    video = evalkit.evaluate_video(
        summary, seq, users,
        n_sampled=len(seq),
        match_threshold=cfg.match_threshold,
        cr_denominator=cfg.cr_denominator,
        raw_frame_count=getattr(args, "raw_frame_count", None),
    )
    report = evalkit.aggregate([video])
    print(report.format_table())
    if args.out is not None:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2) + "\n")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    run = _run_pipeline(cfg, args.input, args.workdir, through=args.target)
    if args.target == "features":
        for frame, fv in zip(run.seq_kept, run.feature_vectors):
            print(json.dumps({
                "frame_index": frame.index,
                "color": fv.color.tolist(),
                "edge": fv.edge.tolist(),
            }))
    elif args.target == "graph":
        print(json.dumps(run.graph.to_json()))
    else:
        print(json.dumps({
            "nodes": [
                {
                    "node": u,
                    "frame_index": run.graph.frame_index_of[u],
                    "vdr": float(run.ranks.vdr[u]),
                }
                for u in range(run.graph.n)
            ],
            "iterations": run.ranks.iterations,
            "converged": run.ranks.converged,
        }))
    return EXIT_OK


_COMMANDS = {
    "summarize": cmd_summarize,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"framerank: [config] {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        print(f"framerank: [ingest] {exc}", file=sys.stderr)
        return EXIT_INGEST
    except EvaluationError as exc:
        print(f"framerank: [evaluate] {exc}", file=sys.stderr)
        return EXIT_EVALUATION
    except (FrameRankError, OSError) as exc:
        print(f"framerank: [pipeline] {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
