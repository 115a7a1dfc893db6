"""Evaluation harness: top-k accuracy at heading/subheading level, difficulty
group breakdown, retrieval recall/precision against expert evidence, the
frequency-accuracy regression, and a deterministic synthetic corpus
generator for desk-scale end-to-end checks.

Per-case work is embarrassingly parallel; everything here reduces by
associative merging, so results do not depend on evaluation order.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

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
)
from .encoder import ModelArtifact, predict_topk
from .errors import (
    DegenerateInputError,
    EmptyExpertSetError,
    LengthMismatchError,
    ValidationError,
)
from .retrieval import RetrievalConfig, retrieve_evidence

EVAL_KS = (1, 3, 5)

# Difficulty groups: council/committee decisions are the contentious ones.
GROUP_GENERAL = "general"
GROUP_CONTENTIOUS = "contentious"
GROUP_ALL = "all"


def _group_of(origin: CaseOrigin) -> str:
    return GROUP_CONTENTIOUS if origin.contentious else GROUP_GENERAL


class RecallPrecision(NamedTuple):
    recall: float
    precision: float
    precision_defined: bool = True


@dataclass
class EvalResult:
    """Accuracy grid keyed by (level, k, group), per-query retrieval scores,
    and the frequency-accuracy regression slope."""

    topk: dict[tuple[str, int, str], float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    retrieval: dict[str, RecallPrecision] = field(default_factory=dict)
    freq_slope: float | None = None

    def to_dict(self) -> dict:
        return {
            "topk": {f"{level}|k={k}|{group}": acc for (level, k, group), acc in self.topk.items()},
            "counts": dict(self.counts),
            "retrieval": {
                cid: {
                    "recall": rp.recall,
                    "precision": rp.precision,
                    "precision_defined": rp.precision_defined,
                }
                for cid, rp in self.retrieval.items()
            },
            "freq_slope": self.freq_slope,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2)


def _reduce(code: str, level: CodeLevel) -> str:
    return code[:4] if level == CodeLevel.HEADING else code


def topk_accuracy(
    predictions: Sequence[Sequence[str]],
    gold: Sequence[str],
    k: int,
    level: CodeLevel = CodeLevel.SUBHEADING,
) -> float:
    """Fraction of cases whose gold label appears among the first k ranked
    labels; at heading level both sides reduce to their 4-digit prefix."""
    if len(predictions) != len(gold):
        raise LengthMismatchError(f"{len(predictions)} predictions vs {len(gold)} gold labels")
    if not predictions:
        return 0.0
    hits = 0
    for ranked, truth in zip(predictions, gold):
        want = _reduce(truth, level)
        seen: list[str] = []
        for code in ranked:
            reduced = _reduce(code, level)
            if reduced not in seen:
                seen.append(reduced)
        if want in seen[:k]:
            hits += 1
    return hits / len(gold)


def retrieval_recall_precision(
    retrieved: Iterable[str], expert: Iterable[str]
) -> RecallPrecision:
    """Sentence-set recall and precision of retrieved evidence against the
    expert's. Empty retrieval yields precision 0 with the flag cleared."""
    retrieved_set = set(retrieved)
    expert_set = set(expert)
    if not expert_set:
        raise EmptyExpertSetError("expert evidence set is empty")
    shared = len(retrieved_set & expert_set)
    recall = shared / len(expert_set)
    if not retrieved_set:
        return RecallPrecision(recall=recall, precision=0.0, precision_defined=False)
    return RecallPrecision(recall=recall, precision=shared / len(retrieved_set))


def accuracy_by_group(
    model: ModelArtifact, cases: CaseCollection, ks: Sequence[int] = EVAL_KS
) -> EvalResult:
    """Top-k accuracy per difficulty group (general vs contentious), at both
    heading and subheading level. Absent groups are simply not reported."""
    by_group: dict[str, list[DecisionCase]] = {}
    for case in cases:
        by_group.setdefault(_group_of(case.origin), []).append(case)

    result = EvalResult()
    max_k = max(ks)
    for group, members in sorted(by_group.items()):
        result.counts[group] = len(members)
        sub_ranked = []
        head_ranked = []
        gold = []
        for case in members:
            sub = predict_topk(model, case.description, k=max_k, level=CodeLevel.SUBHEADING)
            head = predict_topk(model, case.description, k=max_k, level=CodeLevel.HEADING)
            sub_ranked.append([r.code for r in sub.ranked])
            head_ranked.append([r.code for r in head.ranked])
            gold.append(case.label.digits)
        for k in ks:
            result.topk[("hs6", k, group)] = topk_accuracy(sub_ranked, gold, k, CodeLevel.SUBHEADING)
            result.topk[("hs4", k, group)] = topk_accuracy(head_ranked, gold, k, CodeLevel.HEADING)
    return result


def frequency_accuracy_slope(
    heading_accuracy: Mapping[str, float], heading_frequency: Mapping[str, int]
) -> float:
    """Ordinary least-squares slope of per-heading accuracy against
    log10(frequency)."""
    headings = sorted(set(heading_accuracy) & set(heading_frequency))
    if len(headings) < 2:
        raise DegenerateInputError("need at least two headings with accuracy and frequency")
    x = np.log10([heading_frequency[h] for h in headings])
    y = np.array([heading_accuracy[h] for h in headings])
    if np.all(x == x[0]):
        raise DegenerateInputError("all frequencies equal; slope undefined")
    slope, _ = np.polyfit(x, y, deg=1)
    return float(slope)


def evaluate_model(
    model: ModelArtifact,
    test_cases: CaseCollection,
    manual: Manual | None = None,
    kb: KnowledgeBase | None = None,
    config: RetrievalConfig | None = None,
) -> EvalResult:
    """Full harness: the (level, k, group) accuracy grid over the test cases,
    the frequency-accuracy slope, and, when a manual and knowledge base are
    given, recall/precision of retrieved evidence for each KB entry (its
    description queried against its own label's heading)."""
    result = accuracy_by_group(model, test_cases)
    result.counts[GROUP_ALL] = len(test_cases)

    max_k = max(EVAL_KS)
    sub_ranked = []
    head_ranked = []
    gold = []
    heading_hits: dict[str, int] = {}
    heading_total: dict[str, int] = {}
    for case in test_cases:
        sub = predict_topk(model, case.description, k=max_k, level=CodeLevel.SUBHEADING)
        head = predict_topk(model, case.description, k=max_k, level=CodeLevel.HEADING)
        sub_ranked.append([r.code for r in sub.ranked])
        head_ranked.append([r.code for r in head.ranked])
        gold.append(case.label.digits)
        h = case.label.heading.digits
        heading_total[h] = heading_total.get(h, 0) + 1
        if sub.ranked and sub.ranked[0].code == case.label.digits:
            heading_hits[h] = heading_hits.get(h, 0) + 1
    for k in EVAL_KS:
        result.topk[("hs6", k, GROUP_ALL)] = topk_accuracy(sub_ranked, gold, k, CodeLevel.SUBHEADING)
        result.topk[("hs4", k, GROUP_ALL)] = topk_accuracy(head_ranked, gold, k, CodeLevel.HEADING)

    acc = {h: heading_hits.get(h, 0) / n for h, n in heading_total.items()}
    try:
        result.freq_slope = frequency_accuracy_slope(acc, heading_total)
    except DegenerateInputError:
        result.freq_slope = None

    if manual is not None and kb is not None and len(kb) > 0:
        cfg = config or RetrievalConfig()
        for entry in kb:
            heading = entry.label.heading.digits
            if heading not in manual:
                continue
            scored = retrieve_evidence(entry.description, heading, manual, kb, model, model.idf, cfg)
            result.retrieval[entry.case_id] = retrieval_recall_precision(
                [s.sid for s in scored], entry.evidence
            )
    return result


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a keyword-separable synthetic corpus.

    Every subheading owns a disjoint keyword set that appears in all of its
    cases; noise tokens are shared across classes. Deterministic per seed.
    """

    seed: int = 7
    n_headings: int = 6
    n_subheadings_per_heading: int = 5
    n_train: int = 600
    n_val: int = 100
    n_test: int = 100
    keywords_per_class: int = 4
    noise_tokens_per_case: int = 6

    def __post_init__(self) -> None:
        for name in (
            "n_headings",
            "n_subheadings_per_heading",
            "n_train",
            "n_val",
            "n_test",
            "keywords_per_class",
            "noise_tokens_per_case",
        ):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.n_subheadings_per_heading > 90:
            raise ValidationError("at most 90 subheadings per heading")
        if self.n_headings > 99:
            raise ValidationError("at most 99 headings")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SyntheticSpec":
        known = {f: raw[f] for f in cls.__dataclass_fields__ if f in raw}
        return cls(**known)


def generate_synthetic_corpus(
    spec: SyntheticSpec,
) -> tuple[CaseCollection, Manual, KnowledgeBase]:
    """Build cases, a manual, and a knowledge base that exercise the whole
    pipeline at desk scale.

    Class c's keywords all appear in each of its case descriptions; each
    heading manual has one intro sentence, one keyword sentence per
    subheading, and one trailing exclusion sentence; each class gets one KB
    entry whose evidence is its keyword sentence plus the heading intro.
    """
    rng = np.random.default_rng(spec.seed)
    headings = [f"84{i + 1:02d}" for i in range(spec.n_headings)]
    subheadings: list[str] = []
    keywords: dict[str, list[str]] = {}
    for hi, heading in enumerate(headings):
        for j in range(spec.n_subheadings_per_heading):
            sub = f"{heading}{j + 10:02d}"
            c = len(subheadings)
            subheadings.append(sub)
            keywords[sub] = [f"kw{c:03d}x{t}" for t in range(spec.keywords_per_class)]

    noise_pool = [f"common{i:02d}" for i in range(max(16, 2 * spec.noise_tokens_per_case))]

    n_total = spec.n_train + spec.n_val + spec.n_test
    base_date = dt.date(2018, 1, 1)
    cases = []
    for i in range(n_total):
        sub = subheadings[i % len(subheadings)]
        words = list(keywords[sub])
        noise = rng.choice(len(noise_pool), size=spec.noise_tokens_per_case, replace=False)
        words.extend(noise_pool[j] for j in noise)
        perm = rng.permutation(len(words))
        description = " ".join(words[j] for j in perm)
        if i % 23 == 11:
            origin = CaseOrigin.COMMITTEE
        elif i % 17 == 5:
            origin = CaseOrigin.COUNCIL
        elif i % 7 == 3:
            origin = CaseOrigin.INTERNATIONAL
        else:
            origin = CaseOrigin.GENERAL
        cases.append(
            DecisionCase(
                id=f"case{i:06d}",
                date=base_date + dt.timedelta(days=i),
                description=description,
                label=HsCode(sub),
                origin=origin,
            )
        )

    heading_manuals: dict[str, HeadingManual] = {}
    for hi, heading in enumerate(headings):
        texts = [f"heading {heading} covers synthetic apparatus of family {heading}"]
        oneliners: dict[str, str] = {}
        for j in range(spec.n_subheadings_per_heading):
            sub = headings[hi] + f"{j + 10:02d}"
            kws = keywords[sub]
            texts.append(f"items marked {' '.join(kws)} fall under subheading {sub}")
            oneliners[sub] = f"goods bearing {kws[0]} and {kws[1 % len(kws)]}"
        texts.append(f"parts of general use are excluded from heading {heading}")
        sentences = tuple(
            ManualSentence(sid=f"{heading}:{i}", text=t) for i, t in enumerate(texts)
        )
        heading_manuals[heading] = HeadingManual(
            heading=HsCode(heading),
            title=f"synthetic heading {heading}",
            sentences=sentences,
            subheading_oneliners=oneliners,
        )
    manual = Manual(headings=heading_manuals)

    entries = []
    for c, sub in enumerate(subheadings):
        heading = sub[:4]
        j = c % spec.n_subheadings_per_heading
        noise = rng.choice(len(noise_pool), size=min(2, spec.noise_tokens_per_case), replace=False)
        description = " ".join(keywords[sub] + [noise_pool[i] for i in noise])
        entries.append(
            KnowledgeBaseEntry(
                case_id=f"kb{c:03d}",
                description=description,
                label=HsCode(sub),
                evidence=frozenset({f"{heading}:0", f"{heading}:{j + 1}"}),
            )
        )
    kb = KnowledgeBase(entries=tuple(entries))
    return CaseCollection.from_cases(cases), manual, kb
