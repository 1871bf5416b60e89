"""Append-only provider call transcript with content-hashed prompts."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path


def prompt_hash(prompt: str) -> str:
    """Hash of the prompt with whitespace runs collapsed, so fixture lookup
    survives whitespace-only template edits."""
    normalized = " ".join(prompt.split())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranscriptRecord:
    stage: str
    prompt_hash: str
    prompt: str
    response: str
    timestamp: float

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "prompt_hash": self.prompt_hash,
            "prompt": self.prompt,
            "response": self.response,
            "timestamp": self.timestamp,
        }


class TranscriptWriter:
    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, stage: str, prompt: str, response: str) -> TranscriptRecord:
        record = TranscriptRecord(stage, prompt_hash(prompt), prompt, response, time.time())
        self._fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
        self._fh.flush()
        return record

    def close(self) -> None:
        self._fh.close()


def read_transcript(path) -> list[TranscriptRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        records.append(
            TranscriptRecord(
                data["stage"],
                data["prompt_hash"],
                data.get("prompt", ""),
                data["response"],
                data.get("timestamp", 0.0),
            )
        )
    return records
