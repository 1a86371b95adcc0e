"""Append-only JSONL store of experiment records."""
from __future__ import annotations

import fcntl
import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .ensembles import GENERATOR_ID


@dataclass
class ExperimentRecord:
    command: str
    params: dict
    master_seed: int
    stream_ids: dict
    outputs: dict
    duration_s: float
    generator: str = GENERATOR_ID
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "ExperimentRecord":
        return cls(**json.loads(line))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def append_record(path, record: ExperimentRecord) -> None:
    """Append one line under an exclusive advisory lock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            fh.write(record.to_json() + "\n")
            fh.flush()
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def read_records(path) -> list[ExperimentRecord]:
    with open(path, encoding="utf-8") as fh:
        return [ExperimentRecord.from_json(line) for line in fh if line.strip()]
