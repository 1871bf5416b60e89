"""LLM orchestration: providers, transcripts, and the pipeline stages."""

from .provider import (
    CallbackProvider,
    LiveHTTPProvider,
    Provider,
    RecordingProvider,
    ReplayProvider,
    provider_from_spec,
)
from .stages import (
    CoverageReport,
    coverage_report,
    perturb_parts,
    stage_applications,
    stage_edit,
    stage_implementations,
    stage_interface,
    stage_sampler,
)
from .transcript import TranscriptRecord, TranscriptWriter, prompt_hash, read_transcript

__all__ = [
    "CallbackProvider",
    "CoverageReport",
    "LiveHTTPProvider",
    "Provider",
    "RecordingProvider",
    "ReplayProvider",
    "TranscriptRecord",
    "TranscriptWriter",
    "coverage_report",
    "perturb_parts",
    "prompt_hash",
    "provider_from_spec",
    "read_transcript",
    "stage_applications",
    "stage_edit",
    "stage_implementations",
    "stage_interface",
    "stage_sampler",
]
