"""Scorer panel assembly and the record x scorer score matrix.

A panel is an ordered list of configured scorers, each mapping a record to
a hallucination score in [0, 1].  Individual cell failures are masked, not
fatal: one flaky provider must not abort a full scoring run.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import Dataset, Record, reference_text
from ..errors import HallumetaError, PanelEmpty, ProviderError
from .cache import ScorerCache, fingerprint
from .clients import (
    CompletionClient,
    EntailmentClient,
    completion_client_from_config,
    entailment_client_from_config,
)
from .local import ngram_consistency_score, overlap_score
from .remote import (
    DEFAULT_JUDGE_TEMPLATE,
    DEFAULT_SAMPLE_TEMPLATE,
    generate_samples,
    llm_judge_score,
    nli_entailment_score,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScorerId:
    name: str
    version: str = "1"

    def __str__(self) -> str:
        return f"{self.name}@{self.version}"


@dataclass(frozen=True)
class SampleSet:
    """Stochastically generated alternative outputs for one record."""

    record_id: str
    samples: tuple[str, ...]
    seed: int
    temperature: float

    def __post_init__(self):
        if len(self.samples) < 1:
            raise ValueError("a sample set needs at least one sample")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class ScoreMatrix:
    """n_records x n_scorers scores in [0, 1] with a missing-cell mask."""

    record_ids: tuple[str, ...]
    scorer_ids: tuple[ScorerId, ...]
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        missing = np.asarray(self.missing, dtype=bool)
        shape = (len(self.record_ids), len(self.scorer_ids))
        if values.shape != shape or missing.shape != shape:
            raise ValueError(f"matrix shape {values.shape} != {shape}")
        ok = values[~missing]
        if ok.size and (np.any(ok < 0.0) or np.any(ok > 1.0)):
            raise ValueError("unmasked scores must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)

    @property
    def n_records(self) -> int:
        return len(self.record_ids)

    @property
    def n_scorers(self) -> int:
        return len(self.scorer_ids)

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self.values[:, j], self.missing[:, j]

    def select_scorers(self, keep: list[ScorerId]) -> "ScoreMatrix":
        index = {sid: j for j, sid in enumerate(self.scorer_ids)}
        cols = [index[sid] for sid in keep]
        return ScoreMatrix(
            record_ids=self.record_ids,
            scorer_ids=tuple(keep),
            values=self.values[:, cols],
            missing=self.missing[:, cols],
        )

    def to_dict(self) -> dict:
        values = [
            [None if self.missing[i, j] else self.values[i, j] for j in range(self.n_scorers)]
            for i in range(self.n_records)
        ]
        return {
            "format": "hallumeta-scores",
            "version": 1,
            "record_ids": list(self.record_ids),
            "scorers": [{"name": s.name, "version": s.version} for s in self.scorer_ids],
            "values": values,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ScoreMatrix":
        if obj.get("format") != "hallumeta-scores":
            raise ValueError("not a hallumeta score-matrix file")
        raw = obj["values"]
        missing = np.array([[cell is None for cell in row] for row in raw], dtype=bool)
        values = np.array(
            [[0.0 if cell is None else float(cell) for cell in row] for row in raw],
            dtype=np.float64,
        )
        return cls(
            record_ids=tuple(obj["record_ids"]),
            scorer_ids=tuple(ScorerId(s["name"], s["version"]) for s in obj["scorers"]),
            values=values,
            missing=missing,
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "ScoreMatrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# --- samplers for the consistency scorer ------------------------------------


class ReferenceSampler:
    """Local fallback sampler: the reference text is the single sample."""

    def sample(self, record: Record, cache: ScorerCache | None, owner: ScorerId) -> SampleSet:
        return SampleSet(
            record_id=record.id,
            samples=(reference_text(record),),
            seed=0,
            temperature=1.0,
        )


class CompletionSampler:
    """Draws k alternative outputs from a completion provider."""

    def __init__(
        self,
        client: CompletionClient,
        *,
        k: int = 5,
        temperature: float = 1.0,
        seed: int = 0,
        prompt_template: str = DEFAULT_SAMPLE_TEMPLATE,
    ):
        self.client = client
        self.k = k
        self.temperature = temperature
        self.seed = seed
        self.prompt_template = prompt_template

    def sample(self, record: Record, cache: ScorerCache | None, owner: ScorerId) -> SampleSet:
        texts = generate_samples(
            record,
            self.client,
            k=self.k,
            temperature=self.temperature,
            seed=self.seed,
            prompt_template=self.prompt_template,
            cache=cache,
            scorer_key=f"{owner}:samples",
        )
        return SampleSet(
            record_id=record.id,
            samples=tuple(texts),
            seed=self.seed,
            temperature=self.temperature,
        )


# --- panel scorers -----------------------------------------------------------


class Scorer:
    """Base adapter: id, concurrency hint, and a record -> score mapping."""

    concurrency = 1

    def __init__(self, scorer_id: ScorerId):
        self.id = scorer_id

    def score(self, record: Record, cache: ScorerCache | None) -> float:
        raise NotImplementedError


class OverlapScorer(Scorer):
    def score(self, record: Record, cache: ScorerCache | None) -> float:
        return overlap_score(record.hyp, reference_text(record))


class NgramConsistencyScorer(Scorer):
    def __init__(self, scorer_id: ScorerId, *, n: int, sampler):
        super().__init__(scorer_id)
        self.n = n
        self.sampler = sampler
        client = getattr(sampler, "client", None)
        self.concurrency = getattr(client, "max_concurrency", 1)

    def score(self, record: Record, cache: ScorerCache | None) -> float:
        samples = self.sampler.sample(record, cache, self.id)
        return ngram_consistency_score(record.hyp, samples, self.n, clamp_n=True)


class LlmJudgeScorer(Scorer):
    def __init__(
        self,
        scorer_id: ScorerId,
        client: CompletionClient,
        *,
        k_votes: int = 5,
        temperature: float = 1.0,
        seed: int = 0,
        prompt_template: str = DEFAULT_JUDGE_TEMPLATE,
    ):
        super().__init__(scorer_id)
        self.client = client
        self.k_votes = k_votes
        self.temperature = temperature
        self.seed = seed
        self.prompt_template = prompt_template
        self.concurrency = getattr(client, "max_concurrency", 1)

    def score(self, record: Record, cache: ScorerCache | None) -> float:
        return llm_judge_score(
            record,
            self.client,
            self.prompt_template,
            self.k_votes,
            temperature=self.temperature,
            seed=self.seed,
            cache=cache,
            scorer_key=str(self.id),
        )


class NliScorer(Scorer):
    def __init__(self, scorer_id: ScorerId, client: EntailmentClient):
        super().__init__(scorer_id)
        self.client = client
        self.concurrency = getattr(client, "max_concurrency", 1)

    def score(self, record: Record, cache: ScorerCache | None) -> float:
        return nli_entailment_score(
            record.hyp,
            reference_text(record),
            self.client,
            cache=cache,
            scorer_key=str(self.id),
            fp=fingerprint(record),
        )


class PrecomputedScorer(Scorer):
    """Scores imported from a JSON file mapping record id -> score."""

    def __init__(self, scorer_id: ScorerId, scores: dict[str, float]):
        super().__init__(scorer_id)
        for rid, val in scores.items():
            if not 0.0 <= float(val) <= 1.0:
                raise ValueError(f"precomputed score for {rid!r} outside [0, 1]: {val}")
        self.scores = {str(k): float(v) for k, v in scores.items()}

    @classmethod
    def from_file(cls, scorer_id: ScorerId, path: str | Path) -> "PrecomputedScorer":
        with open(path, encoding="utf-8") as fh:
            return cls(scorer_id, json.load(fh))

    def score(self, record: Record, cache: ScorerCache | None) -> float:
        if record.id not in self.scores:
            raise HallumetaError(f"no precomputed score for record {record.id}")
        return self.scores[record.id]


def build_score_matrix(
    dataset: Dataset,
    panel: list[Scorer],
    cache: ScorerCache | None = None,
) -> ScoreMatrix:
    """Score every record with every scorer; failures mask cells.

    The cache is consulted before any remote call.  Remote scorers with a
    concurrency hint > 1 fan out across a bounded thread pool; results are
    written back by index so ordering never depends on scheduling.

    Per-record failures are isolated: the cell is masked and the build
    continues.  A scorer whose provider fails for every single record is a
    total outage, not a transient; that aborts with the last ProviderError
    instead of returning a uselessly all-masked column.
    """
    if not panel:
        raise PanelEmpty("the scorer panel is empty")
    ids = [s.id for s in panel]
    if len(set(ids)) != len(ids):
        raise ValueError("scorer (name, version) pairs must be unique within a panel")

    n, m = len(dataset), len(panel)
    values = np.zeros((n, m), dtype=np.float64)
    missing = np.zeros((n, m), dtype=bool)
    records = list(dataset)

    for j, scorer in enumerate(panel):
        provider_failures: list[ProviderError] = []

        def cell(record: Record) -> float | None:
            try:
                score = scorer.score(record, cache)
            except ProviderError as exc:
                logger.warning(
                    "scorer %s provider failure on record %s: %s", scorer.id, record.id, exc
                )
                provider_failures.append(exc)
                return None
            except HallumetaError as exc:
                logger.warning("scorer %s failed on record %s: %s", scorer.id, record.id, exc)
                return None
            if not 0.0 <= score <= 1.0:
                logger.warning(
                    "scorer %s returned %r outside [0, 1] for record %s; masking",
                    scorer.id, score, record.id,
                )
                return None
            return score

        workers = max(1, int(getattr(scorer, "concurrency", 1)))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(cell, records))
        else:
            results = [cell(r) for r in records]
        if records and len(provider_failures) == len(records):
            raise ProviderError(
                f"scorer {scorer.id}: provider failed for all {len(records)} records; "
                f"last error: {provider_failures[-1]}"
            ) from provider_failures[-1]
        for i, result in enumerate(results):
            if result is None:
                missing[i, j] = True
            else:
                values[i, j] = result

    return ScoreMatrix(
        record_ids=tuple(r.id for r in records),
        scorer_ids=tuple(ids),
        values=values,
        missing=missing,
    )


def panel_from_config(entries: list[dict], *, seed: int = 0, base_dir: str | Path = ".") -> list[Scorer]:
    """Instantiate a panel from declarative config entries.

    Each entry needs ``name`` and ``kind``; remaining keys are kind-specific.
    Relative file paths resolve against ``base_dir``.
    """
    base = Path(base_dir)
    panel: list[Scorer] = []
    for entry in entries:
        entry = dict(entry)
        name = entry.pop("name")
        kind = entry.pop("kind")
        version = str(entry.pop("version", "1"))
        sid = ScorerId(name, version)
        if kind == "overlap":
            scorer = OverlapScorer(sid)
        elif kind == "ngram_consistency":
            n = int(entry.pop("n", 1))
            sampler_cfg = dict(entry.pop("sampler", {"kind": "reference"}))
            sampler_kind = sampler_cfg.pop("kind", "reference")
            if sampler_kind == "reference":
                sampler = ReferenceSampler()
            elif sampler_kind == "completion":
                client = completion_client_from_config(
                    _resolve_paths(sampler_cfg.pop("client"), base)
                )
                sampler = CompletionSampler(
                    client,
                    k=int(sampler_cfg.pop("k", 5)),
                    temperature=float(sampler_cfg.pop("temperature", 1.0)),
                    seed=int(sampler_cfg.pop("seed", seed)),
                    prompt_template=sampler_cfg.pop("prompt_template", DEFAULT_SAMPLE_TEMPLATE),
                )
            else:
                raise ValueError(f"unknown sampler kind {sampler_kind!r}")
            _reject_unknown(sampler_cfg, f"sampler for scorer {name!r}")
            scorer = NgramConsistencyScorer(sid, n=n, sampler=sampler)
        elif kind == "llm_judge":
            client = completion_client_from_config(_resolve_paths(entry.pop("client"), base))
            scorer = LlmJudgeScorer(
                sid,
                client,
                k_votes=int(entry.pop("k_votes", 5)),
                temperature=float(entry.pop("temperature", 1.0)),
                seed=int(entry.pop("seed", seed)),
                prompt_template=entry.pop("prompt_template", DEFAULT_JUDGE_TEMPLATE),
            )
        elif kind == "nli":
            client = entailment_client_from_config(_resolve_paths(entry.pop("client"), base))
            scorer = NliScorer(sid, client)
        elif kind == "precomputed":
            scorer = PrecomputedScorer.from_file(sid, base / entry.pop("path"))
        else:
            raise ValueError(f"unknown scorer kind {kind!r}")
        _reject_unknown(entry, f"scorer {name!r}")
        panel.append(scorer)
    return panel


def _resolve_paths(client_cfg: dict, base: Path) -> dict:
    cfg = dict(client_cfg)
    if "call_log" in cfg and cfg["call_log"] is not None:
        cfg["call_log"] = str(base / cfg["call_log"])
    return cfg


def _reject_unknown(leftover: dict, where: str) -> None:
    if leftover:
        raise ValueError(f"unknown keys in {where}: {sorted(leftover)}")
