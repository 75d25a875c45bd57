from .cache import CacheEntry, ScorerCache, fingerprint
from .clients import (
    CompletionClient,
    EntailmentClient,
    HttpCompletionClient,
    HttpEntailmentClient,
    ScriptedCompletionClient,
    ScriptedEntailmentClient,
    completion_client_from_config,
    entailment_client_from_config,
)
from .local import ngram_consistency_score, ngrams, overlap_score, tokenize
from .panel import (
    CompletionSampler,
    LlmJudgeScorer,
    NgramConsistencyScorer,
    NliScorer,
    OverlapScorer,
    PrecomputedScorer,
    ReferenceSampler,
    SampleSet,
    ScoreMatrix,
    Scorer,
    ScorerId,
    build_score_matrix,
    panel_from_config,
)
from .remote import (
    DEFAULT_JUDGE_TEMPLATE,
    DEFAULT_SAMPLE_TEMPLATE,
    generate_samples,
    llm_judge_score,
    nli_entailment_score,
    parse_verdict,
)

__all__ = [
    "CacheEntry",
    "ScorerCache",
    "fingerprint",
    "CompletionClient",
    "EntailmentClient",
    "HttpCompletionClient",
    "HttpEntailmentClient",
    "ScriptedCompletionClient",
    "ScriptedEntailmentClient",
    "completion_client_from_config",
    "entailment_client_from_config",
    "tokenize",
    "ngrams",
    "overlap_score",
    "ngram_consistency_score",
    "Scorer",
    "ScorerId",
    "SampleSet",
    "ScoreMatrix",
    "OverlapScorer",
    "NgramConsistencyScorer",
    "LlmJudgeScorer",
    "NliScorer",
    "PrecomputedScorer",
    "ReferenceSampler",
    "CompletionSampler",
    "build_score_matrix",
    "panel_from_config",
    "DEFAULT_JUDGE_TEMPLATE",
    "DEFAULT_SAMPLE_TEMPLATE",
    "parse_verdict",
    "llm_judge_score",
    "nli_entailment_score",
    "generate_samples",
]
