"""Exception hierarchy for the framerank pipeline.

The three bases (ingest / pipeline / evaluation) map onto the CLI's
stage-tagged exit codes.
"""


class FrameRankError(Exception):
    """Base class for all framerank errors."""


class IngestError(FrameRankError):
    """Raised for failures while acquiring the frame sequence."""


class DecoderNotFoundError(IngestError):
    """The external decoder executable is not on the system."""


class DecoderFailedError(IngestError):
    """The decoder exited nonzero; carries its captured diagnostics."""

    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message)
        self.diagnostics = diagnostics


class NoFramesProducedError(IngestError):
    """The decoder ran but produced zero frame files."""


class EmptyDirectoryError(IngestError):
    """A frame directory contains no loadable image files."""


class UndecodableImageError(IngestError):
    """An image file could not be decoded; names the file."""


class MixedDimensionsError(IngestError):
    """A frame's dimensions differ from the rest of the sequence."""


class PipelineError(FrameRankError):
    """Raised for failures in the summarization stages proper."""


class AllFramesDiscardedError(PipelineError):
    """The noise filter discarded every frame; carries the report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class FrameTooSmallError(PipelineError):
    """Frame is below the minimum size for the edge descriptor."""


class MissingFrameError(PipelineError):
    """A requested frame index is absent from the frame sequence."""


class EvaluationError(FrameRankError):
    """Raised for failures in the evaluation stage."""


class EmptySummaryError(EvaluationError):
    """A system or user summary contains no frames."""
