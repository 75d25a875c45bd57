"""Persistent score cache so remote scorer calls are replayable.

Keys are (scorer id, record fingerprint, seed); the fingerprint is a stable
hash of the record's (src, hyp, tgt, task).  Storage is an append-only JSONL
file, one entry per line; on identical keys the last writer wins, which is
harmless because scorer calls are deterministic per key.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..dataset import Record


def fingerprint(record: Record) -> str:
    payload = json.dumps(
        [record.src, record.hyp, record.tgt, record.task.value],
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    score: float | None
    raw: Any


class ScorerCache:
    """Map (scorer key, fingerprint, seed) -> CacheEntry, optionally on disk."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str, int], CacheEntry] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                key = (obj["scorer"], obj["fingerprint"], int(obj["seed"]))
                self._entries[key] = CacheEntry(score=obj["score"], raw=obj["raw"])

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, scorer_key: str, fp: str, seed: int) -> CacheEntry | None:
        with self._lock:
            return self._entries.get((scorer_key, fp, seed))

    def put(self, scorer_key: str, fp: str, seed: int, score: float | None, raw: Any) -> CacheEntry:
        entry = CacheEntry(score=score, raw=raw)
        line = json.dumps(
            {"scorer": scorer_key, "fingerprint": fp, "seed": seed, "score": score, "raw": raw},
            ensure_ascii=False,
        )
        with self._lock:
            self._entries[(scorer_key, fp, seed)] = entry
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
        return entry
