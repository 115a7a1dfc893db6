"""Evidence sentence scoring for one candidate heading's manual.

Each sentence gets ``total = text_score + kb_weight * expert_score`` where
the text score is an IDF-weighted sum of per-token alignments (max cosine
between a description token and any sentence token) and the expert score
sums the description-to-precedent similarities of the nearest knowledge-base
cases that quoted the sentence. All functions are pure over immutable
inputs; scoring different headings or descriptions may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import HsCode, KnowledgeBase, KnowledgeBaseEntry, Manual, ManualSentence
from .encoder import ModelArtifact, encode
from .errors import (
    DimensionMismatchError,
    EmptyDescriptionError,
    EmptyKnowledgeBaseError,
    UnknownHeadingError,
    ValidationError,
)
from .text import IdfTable, Token, tokenize


@dataclass(frozen=True)
class RetrievalConfig:
    """Knobs for evidence scoring.

    ``kb_weight`` blends the expert-precedent score into the text score
    (the request/report surface calls it "lambda"). ``normalize_text_score``
    divides the text score by the description's total IDF mass so it stops
    growing with description length; off by default to keep the raw sums.
    """

    kb_weight: float = 0.3
    k_case: int = 10
    n_sentences: int = 7
    clamp_negative_kb_sim: bool = False
    normalize_text_score: bool = False

    def __post_init__(self) -> None:
        if self.kb_weight < 0:
            raise ValidationError("kb_weight must be >= 0")
        if self.k_case < 1 or self.n_sentences < 1:
            raise ValidationError("k_case and n_sentences must be >= 1")


@dataclass(frozen=True)
class KbNeighborhood:
    """The query's nearest knowledge-base cases, descending similarity."""

    neighbors: tuple[tuple[KnowledgeBaseEntry, float], ...]

    def __len__(self) -> int:
        return len(self.neighbors)


EMPTY_NEIGHBORHOOD = KbNeighborhood(neighbors=())


@dataclass(frozen=True)
class ScoredSentence:
    sid: str
    text_score: float
    expert_score: float
    total_score: float


def sid_sort_key(sid: str) -> tuple[str, int]:
    """Ascending sid order: heading, then numeric sentence index."""
    heading, _, idx = sid.partition(":")
    return (heading, int(idx))


def cos_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs score 0."""
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def align(token: Token, sentence: ManualSentence, model: ModelArtifact) -> float:
    """Best cosine between the token's embedding and any sentence token's.

    Out-of-vocabulary tokens (on either side) contribute nothing; a fully
    out-of-vocabulary sentence scores 0.
    """
    token_id = model.vocab.id_of(token)
    if token_id is None:
        return 0.0
    u = model.token_embeddings[token_id]
    best: float | None = None
    for st in tokenize(sentence.text):
        sid_ = model.vocab.id_of(st)
        if sid_ is None:
            continue
        sim = cos_sim(u, model.token_embeddings[sid_])
        if best is None or sim > best:
            best = sim
    return 0.0 if best is None else best


def text_similarity(
    description_tokens: Sequence[Token],
    sentence: ManualSentence,
    model: ModelArtifact,
    idf: IdfTable,
) -> float:
    """IDF-weighted sum of alignments over the description tokens (raw,
    unnormalized: the scale grows with description length)."""
    if not description_tokens:
        raise EmptyDescriptionError("no description tokens")
    score = 0.0
    for token in description_tokens:
        score += idf.weight_of(token) * align(token, sentence, model)
    return score


def _embed_or_zero(model: ModelArtifact, text: str) -> np.ndarray:
    tokens = tokenize(text)
    if not tokens:
        return np.zeros(model.dim)
    return encode(model, tokens).vector


def kb_topk_cases(
    description: str, kb: KnowledgeBase, model: ModelArtifact, k_case: int
) -> KbNeighborhood:
    """The ``k_case`` knowledge-base entries most similar to the description
    (cosine over encoder outputs), ties broken by case id."""
    if len(kb) == 0:
        raise EmptyKnowledgeBaseError("knowledge base has no entries")
    tokens = tokenize(description)
    if not tokens:
        raise EmptyDescriptionError("empty description")
    query = encode(model, tokens).vector
    scored = [(entry, cos_sim(query, _embed_or_zero(model, entry.description))) for entry in kb]
    scored.sort(key=lambda pair: (-pair[1], pair[0].case_id))
    return KbNeighborhood(neighbors=tuple(scored[:k_case]))


def expert_score(sid: str, neighborhood: KbNeighborhood, clamp_negative: bool = False) -> float:
    """Sum of neighbor similarities over the neighbors whose experts quoted
    this sentence; optionally ignoring negative similarities."""
    total = 0.0
    for entry, sim in neighborhood.neighbors:
        if sid in entry.evidence:
            if clamp_negative and sim < 0.0:
                continue
            total += sim
    return total


def relevance_score(
    description_tokens: Sequence[Token],
    sentence: ManualSentence,
    model: ModelArtifact,
    idf: IdfTable,
    neighborhood: KbNeighborhood,
    config: RetrievalConfig,
) -> ScoredSentence:
    """Blend the two scores: ``total = text + kb_weight * expert``."""
    s_text = text_similarity(description_tokens, sentence, model, idf)
    if config.normalize_text_score:
        total_idf = 0.0
        for token in description_tokens:
            total_idf += idf.weight_of(token)
        s_text = s_text / total_idf
    s_expert = expert_score(sentence.sid, neighborhood, config.clamp_negative_kb_sim)
    return ScoredSentence(
        sid=sentence.sid,
        text_score=s_text,
        expert_score=s_expert,
        total_score=s_text + config.kb_weight * s_expert,
    )


def score_heading_sentences(
    description: str,
    heading: str | HsCode,
    manual: Manual,
    kb: KnowledgeBase,
    model: ModelArtifact,
    idf: IdfTable,
    config: RetrievalConfig,
    neighborhood: KbNeighborhood | None = None,
) -> list[ScoredSentence]:
    """Score every sentence of the heading's manual, best first.

    The knowledge-base neighborhood depends only on the description, so it
    is computed once and reused across sentences (pass it in to share it
    across headings). An empty knowledge base yields an empty neighborhood
    rather than an error so manual-only scoring still works.
    """
    digits = heading.digits if isinstance(heading, HsCode) else heading
    hm = manual.get(digits)
    if hm is None:
        raise UnknownHeadingError(f"heading {digits} not in manual")
    tokens = tokenize(description)
    if not tokens:
        raise EmptyDescriptionError("empty description")
    if neighborhood is None:
        if len(kb) == 0:
            neighborhood = EMPTY_NEIGHBORHOOD
        else:
            neighborhood = kb_topk_cases(description, kb, model, config.k_case)
    scored = [
        relevance_score(tokens, sentence, model, idf, neighborhood, config)
        for sentence in hm.sentences
    ]
    scored.sort(key=lambda s: (-s.total_score, sid_sort_key(s.sid)))
    return scored


def retrieve_evidence(
    description: str,
    heading: str | HsCode,
    manual: Manual,
    kb: KnowledgeBase,
    model: ModelArtifact,
    idf: IdfTable,
    config: RetrievalConfig,
    neighborhood: KbNeighborhood | None = None,
) -> list[ScoredSentence]:
    """The ``n_sentences`` best-scoring sentences of the heading's manual."""
    scored = score_heading_sentences(
        description, heading, manual, kb, model, idf, config, neighborhood
    )
    return scored[: config.n_sentences]
