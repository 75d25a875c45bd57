"""Scorers backed by remote providers: LLM judge, NLI entailment, sampling.

Every provider call goes through the ScorerCache first, keyed by
(scorer, record fingerprint, seed), so warm reruns issue zero remote calls
and results are replayable bit for bit.
"""

from __future__ import annotations

import logging

from ..dataset import Record, reference_text
from ..errors import AllAbstained, UnparseableVerdict
from .cache import ScorerCache, fingerprint
from .clients import CompletionClient, EntailmentClient

logger = logging.getLogger(__name__)

DEFAULT_JUDGE_TEMPLATE = (
    "You are auditing the output of a {task} system. Decide whether the "
    "output contains information not supported by the input or reference.\n"
    "Input: {src}\n"
    "Reference: {ref}\n"
    "Output: {hyp}\n"
    "Reply with exactly 'Hallucination' or 'Not Hallucination'."
)

DEFAULT_SAMPLE_TEMPLATE = (
    "Produce one plausible output for this {task} input. Reply with the "
    "output text only.\n"
    "Input: {src}\n"
    "Output:"
)


def parse_verdict(reply: str) -> bool:
    """True for a leading 'hallucination', False for 'not hallucination'.

    Case-insensitive, leading-match only; anything else raises
    UnparseableVerdict and the caller treats the vote as an abstention.
    """
    head = reply.strip().lower()
    if head.startswith("not hallucination"):
        return False
    if head.startswith("hallucination"):
        return True
    raise UnparseableVerdict(f"reply matches neither verdict pattern: {reply[:80]!r}")


def _fill_template(template: str, record: Record) -> str:
    try:
        ref = reference_text(record)
    except Exception:
        ref = ""
    return template.format(
        src=record.src, hyp=record.hyp, ref=ref, tgt=record.tgt, task=record.task.value
    )


def _cached_completion(
    client: CompletionClient,
    prompt: str,
    *,
    temperature: float,
    seed: int,
    cache: ScorerCache | None,
    scorer_key: str,
    fp: str,
) -> str:
    if cache is not None:
        hit = cache.get(scorer_key, fp, seed)
        if hit is not None:
            return hit.raw
    reply = client.complete(prompt, temperature=temperature, seed=seed)
    if cache is not None:
        cache.put(scorer_key, fp, seed, None, reply)
    return reply


def llm_judge_score(
    record: Record,
    client: CompletionClient,
    prompt_template: str = DEFAULT_JUDGE_TEMPLATE,
    k_votes: int = 5,
    *,
    temperature: float = 1.0,
    seed: int = 0,
    cache: ScorerCache | None = None,
    scorer_key: str = "llm_judge@1",
) -> float:
    """Fraction of k independent judge votes that say 'Hallucination'.

    Unparseable replies abstain and leave the denominator; if every vote
    abstains the scorer raises AllAbstained.  Vote i uses seed+i so the
    votes are independent yet replayable from the cache.
    """
    if k_votes < 1:
        raise ValueError(f"k_votes must be >= 1, got {k_votes}")
    prompt = _fill_template(prompt_template, record)
    fp = fingerprint(record)
    votes = []
    for i in range(k_votes):
        reply = _cached_completion(
            client,
            prompt,
            temperature=temperature,
            seed=seed + i,
            cache=cache,
            scorer_key=scorer_key,
            fp=fp,
        )
        try:
            votes.append(parse_verdict(reply))
        except UnparseableVerdict:
            logger.debug("judge abstained on record %s vote %d", record.id, i)
    if not votes:
        raise AllAbstained(f"all {k_votes} judge votes abstained for record {record.id}")
    return sum(votes) / len(votes)


def nli_entailment_score(
    hyp: str,
    ref: str,
    client: EntailmentClient,
    *,
    cache: ScorerCache | None = None,
    scorer_key: str = "nli@1",
    fp: str | None = None,
) -> float:
    """1 - P(entailed | premise=ref, hypothesis=hyp); complement keeps the
    panel-wide orientation of 1 = hallucinated."""
    if cache is not None and fp is not None:
        hit = cache.get(scorer_key, fp, 0)
        if hit is not None:
            return 1.0 - float(hit.raw)
    entail = client.entailment(ref, hyp)
    if cache is not None and fp is not None:
        cache.put(scorer_key, fp, 0, 1.0 - entail, entail)
    return 1.0 - entail


def generate_samples(
    record: Record,
    client: CompletionClient,
    *,
    k: int,
    temperature: float,
    seed: int,
    prompt_template: str = DEFAULT_SAMPLE_TEMPLATE,
    cache: ScorerCache | None = None,
    scorer_key: str = "sampler@1",
) -> list[str]:
    """Draw k stochastic alternative outputs for a record, cache-aware."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    prompt = _fill_template(prompt_template, record)
    fp = fingerprint(record)
    return [
        _cached_completion(
            client,
            prompt,
            temperature=temperature,
            seed=seed + i,
            cache=cache,
            scorer_key=scorer_key,
            fp=fp,
        )
        for i in range(k)
    ]
