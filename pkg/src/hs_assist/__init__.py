"""Decision support for HS commodity classification.

Two stages: a trainable description classifier proposes heading and
subheading candidates with calibrated confidence, then each candidate
heading's manual is scored sentence by sentence (text alignment blended
with expert precedent) to surface the evidence an officer needs.
"""

from .corpus import (
    CaseCollection,
    CaseOrigin,
    CodeLevel,
    DecisionCase,
    HeadingManual,
    HsCode,
    KnowledgeBase,
    KnowledgeBaseEntry,
    Manual,
    ManualSentence,
    heading_frequency,
    load_cases,
    load_knowledge_base,
    load_manual,
    save_cases,
    save_knowledge_base,
    save_manual,
    temporal_split,
)
from .encoder import (
    EncoderConfig,
    ModelArtifact,
    Prediction,
    calibrate_temperature,
    encode,
    forward,
    load_artifact,
    mean_nll,
    predict_topk,
    save_artifact,
    train,
)
from .evaluation import (
    EvalResult,
    RecallPrecision,
    SyntheticSpec,
    accuracy_by_group,
    evaluate_model,
    frequency_accuracy_slope,
    generate_synthetic_corpus,
    retrieval_recall_precision,
    topk_accuracy,
)
from .report import SuggestionReport, build_report, render
from .retrieval import (
    KbNeighborhood,
    RetrievalConfig,
    ScoredSentence,
    align,
    cos_sim,
    expert_score,
    kb_topk_cases,
    relevance_score,
    retrieve_evidence,
    score_heading_sentences,
    text_similarity,
)
from .text import IdfTable, Vocabulary, build_vocabulary, compute_idf, tokenize
from .version import __version__

__all__ = [
    "__version__",
    "CaseCollection",
    "CaseOrigin",
    "CodeLevel",
    "DecisionCase",
    "EncoderConfig",
    "EvalResult",
    "HeadingManual",
    "HsCode",
    "IdfTable",
    "KbNeighborhood",
    "KnowledgeBase",
    "KnowledgeBaseEntry",
    "Manual",
    "ManualSentence",
    "ModelArtifact",
    "Prediction",
    "RecallPrecision",
    "RetrievalConfig",
    "ScoredSentence",
    "SuggestionReport",
    "SyntheticSpec",
    "Vocabulary",
    "accuracy_by_group",
    "align",
    "build_report",
    "build_vocabulary",
    "calibrate_temperature",
    "compute_idf",
    "cos_sim",
    "encode",
    "evaluate_model",
    "expert_score",
    "forward",
    "frequency_accuracy_slope",
    "generate_synthetic_corpus",
    "heading_frequency",
    "kb_topk_cases",
    "load_artifact",
    "load_cases",
    "load_knowledge_base",
    "load_manual",
    "mean_nll",
    "predict_topk",
    "relevance_score",
    "render",
    "retrieval_recall_precision",
    "retrieve_evidence",
    "save_artifact",
    "save_cases",
    "save_knowledge_base",
    "save_manual",
    "score_heading_sentences",
    "temporal_split",
    "text_similarity",
    "tokenize",
    "topk_accuracy",
    "train",
]
