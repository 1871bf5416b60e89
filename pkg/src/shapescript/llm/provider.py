"""Provider abstraction: live HTTP, replay-from-transcript, and recording."""

from __future__ import annotations

import os
from pathlib import Path

from ..errors import ProviderError
from .transcript import TranscriptWriter, prompt_hash, read_transcript


class Provider:
    """Contract: complete(stage_tag, prompt) -> response text."""

    vision: bool = False

    def complete(self, stage: str, prompt: str) -> str:  # pragma: no cover - interface
        raise NotImplementedError


class CallbackProvider(Provider):
    """Wraps a plain function; used by tests and fixture generators."""

    def __init__(self, fn, vision: bool = False):
        self._fn = fn
        self.vision = vision

    def complete(self, stage: str, prompt: str) -> str:
        return self._fn(stage, prompt)


class ReplayProvider(Provider):
    """Answers every call from a recorded transcript; never goes live."""

    def __init__(self, directory):
        directory = Path(directory)
        path = directory / "transcript.jsonl" if directory.is_dir() else directory
        if not path.exists():
            raise ProviderError(f"no transcript found at {path}", code="ReplayMiss")
        self._responses: dict[tuple[str, str], str] = {}
        for record in read_transcript(path):
            self._responses[(record.stage, record.prompt_hash)] = record.response

    def complete(self, stage: str, prompt: str) -> str:
        key = (stage, prompt_hash(prompt))
        if key not in self._responses:
            raise ProviderError(
                f"replay transcript has no response for stage {stage!r} (hash {key[1][:12]})",
                code="ReplayMiss",
            )
        return self._responses[key]


class RecordingProvider(Provider):
    """Records every (prompt, response) pair from an inner provider."""

    def __init__(self, inner: Provider, transcript_path):
        self.inner = inner
        self.vision = inner.vision
        self.writer = TranscriptWriter(transcript_path)

    def complete(self, stage: str, prompt: str) -> str:
        response = self.inner.complete(stage, prompt)
        self.writer.append(stage, prompt, response)
        return response

    def close(self) -> None:
        self.writer.close()


class LiveHTTPProvider(Provider):
    """Minimal chat-completion client configured from environment variables.

    ``<NAME>_URL`` points at a chat-completions endpoint, ``<NAME>_API_KEY``
    carries the credential, ``<NAME>_MODEL`` picks the model.
    """

    def __init__(self, endpoint_name: str):
        prefix = endpoint_name.upper().replace("-", "_")
        self.url = os.environ.get(f"{prefix}_URL")
        if not self.url:
            raise ProviderError(f"environment variable {prefix}_URL is not set")
        self.api_key = os.environ.get(f"{prefix}_API_KEY", "")
        self.model = os.environ.get(f"{prefix}_MODEL", "")
        self.vision = os.environ.get(f"{prefix}_VISION", "") == "1"

    def complete(self, stage: str, prompt: str) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = httpx.post(self.url, json=body, headers=headers, timeout=120.0)
            response.raise_for_status()
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except Exception as exc:
            raise ProviderError(f"live provider call failed: {exc}") from exc


def provider_from_spec(spec: str, record_to=None) -> Provider:
    """Parse ``replay:<dir>`` or ``live:<endpoint-name>`` provider specs."""
    kind, _, rest = spec.partition(":")
    if kind == "replay":
        return ReplayProvider(rest)
    if kind == "live":
        provider: Provider = LiveHTTPProvider(rest)
        if record_to is not None:
            provider = RecordingProvider(provider, record_to)
        return provider
    raise ProviderError(f"unknown provider spec {spec!r}")
