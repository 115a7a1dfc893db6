"""Data model and ingestion for decision cases, the HS manual, and the
expert knowledge base, plus temporal splitting and frequency analysis.

File formats (all JSON-lines, UTF-8, unknown fields ignored):

* cases:  ``{"id", "date": "YYYY-MM-DD", "description", "hs6", "origin"}``
* manual: ``{"heading", "title", "sentences": [text, ...],
  "subheadings": {"SSSSSS": "one-liner", ...}}`` -- one object per heading
* kb:     ``{"case_id", "description", "hs6",
  "evidence": [{"sid": ...} | {"quote": ...}, ...]}``

All loaded objects are immutable; loading is single-threaded per file and the
results are safe for concurrent reads.
"""

from __future__ import annotations

import datetime as dt
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateHeadingError,
    EmptyEvidenceError,
    ParseError,
    SplitError,
    ValidationError,
)
from .text import tokenize

_LEVEL_BY_LEN = {2: "chapter", 4: "heading", 6: "subheading"}


class CodeLevel(str, Enum):
    CHAPTER = "chapter"
    HEADING = "heading"
    SUBHEADING = "subheading"


class CaseOrigin(str, Enum):
    GENERAL = "general"
    COUNCIL = "council"
    COMMITTEE = "committee"
    INTERNATIONAL = "international"

    @property
    def contentious(self) -> bool:
        """Escalated disputes carry expert reasoning; the rest do not."""
        return self in (CaseOrigin.COUNCIL, CaseOrigin.COMMITTEE)


@dataclass(frozen=True, order=True)
class HsCode:
    """An HS code at chapter (2), heading (4) or subheading (6) digit depth."""

    digits: str

    def __post_init__(self) -> None:
        if len(self.digits) not in _LEVEL_BY_LEN or not self.digits.isascii() or not self.digits.isdigit():
            raise ValidationError(f"bad HS code {self.digits!r}: want 2, 4 or 6 decimal digits")

    @property
    def level(self) -> CodeLevel:
        return CodeLevel(_LEVEL_BY_LEN[len(self.digits)])

    @property
    def chapter(self) -> "HsCode":
        return HsCode(self.digits[:2])

    @property
    def heading(self) -> "HsCode":
        if self.level == CodeLevel.CHAPTER:
            raise ValidationError(f"{self.digits}: a chapter has no heading prefix")
        return HsCode(self.digits[:4])

    def is_prefix_of(self, other: "HsCode") -> bool:
        return other.digits.startswith(self.digits)

    def __str__(self) -> str:
        return self.digits


@dataclass(frozen=True)
class DecisionCase:
    """One classification decision: a goods description and its HS6 label."""

    id: str
    date: dt.date
    description: str
    label: HsCode
    origin: CaseOrigin = CaseOrigin.GENERAL

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise ValidationError(f"case {self.id}: empty description")
        if self.label.level != CodeLevel.SUBHEADING:
            raise ValidationError(f"case {self.id}: label {self.label} is not a subheading")


@dataclass(frozen=True)
class CaseCollection:
    """Decision cases ordered by (date, id) ascending."""

    cases: tuple[DecisionCase, ...]

    def __post_init__(self) -> None:
        keys = [(c.date, c.id) for c in self.cases]
        if keys != sorted(keys):
            raise ValidationError("cases are not in (date, id) order")

    @classmethod
    def from_cases(cls, cases: Iterable[DecisionCase]) -> "CaseCollection":
        return cls(tuple(sorted(cases, key=lambda c: (c.date, c.id))))

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self) -> Iterator[DecisionCase]:
        return iter(self.cases)

    def __getitem__(self, i: int) -> DecisionCase:
        return self.cases[i]


@dataclass(frozen=True)
class ManualSentence:
    """One manual sentence, addressable as ``"HHHH:n"`` (zero-based index)."""

    sid: str
    text: str


@dataclass(frozen=True)
class HeadingManual:
    """The ordered explanatory sentences of one heading plus its subheading
    one-liners."""

    heading: HsCode
    title: str
    sentences: tuple[ManualSentence, ...]
    subheading_oneliners: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValidationError(f"heading {self.heading}: manual has no sentences")
        for i, s in enumerate(self.sentences):
            expected = f"{self.heading.digits}:{i}"
            if s.sid != expected:
                raise ValidationError(f"sentence id {s.sid} at position {i}, expected {expected}")
        for sub in self.subheading_oneliners:
            if not sub.startswith(self.heading.digits):
                raise ValidationError(f"one-liner key {sub} is not under heading {self.heading}")


@dataclass(frozen=True)
class Manual:
    """All loaded heading manuals, keyed by their 4-digit heading."""

    headings: Mapping[str, HeadingManual]

    def __post_init__(self) -> None:
        for key, hm in self.headings.items():
            if key != hm.heading.digits:
                raise ValidationError(f"manual key {key} != heading {hm.heading}")

    def __contains__(self, heading: str) -> bool:
        return heading in self.headings

    def get(self, heading: str) -> HeadingManual | None:
        return self.headings.get(heading)

    def sentence(self, sid: str) -> ManualSentence | None:
        heading, _, idx = sid.partition(":")
        hm = self.headings.get(heading)
        if hm is None or not idx.isdigit():
            return None
        i = int(idx)
        return hm.sentences[i] if i < len(hm.sentences) else None

    def __len__(self) -> int:
        return len(self.headings)


@dataclass(frozen=True)
class KnowledgeBaseEntry:
    """A contentious precedent: its description, label and the manual
    sentences its experts quoted."""

    case_id: str
    description: str
    label: HsCode
    evidence: frozenset[str]
    dropped_quotes: int = 0

    def __post_init__(self) -> None:
        if not self.evidence:
            raise EmptyEvidenceError(f"kb entry {self.case_id}: no resolvable evidence")


@dataclass(frozen=True)
class KnowledgeBase:
    """All expert precedent entries; case ids unique."""

    entries: tuple[KnowledgeBaseEntry, ...]
    dropped_quote_count: int = 0

    def __post_init__(self) -> None:
        ids = [e.case_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate case_id in knowledge base")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[KnowledgeBaseEntry]:
        return iter(self.entries)


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(obj, dict):
                raise ParseError("record is not a JSON object", lineno)
            yield lineno, obj


def _require(obj: dict, key: str, lineno: int) -> object:
    if key not in obj:
        raise ParseError(f"missing field {key!r}", lineno)
    return obj[key]


def load_cases(path: str | Path) -> CaseCollection:
    """Load a cases file, sorted by (date, id); duplicate ids rejected."""
    cases: list[DecisionCase] = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(Path(path)):
        case_id = str(_require(obj, "id", lineno))
        raw_date = str(_require(obj, "date", lineno))
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError as exc:
            raise ParseError(f"bad date {raw_date!r}", lineno) from exc
        description = str(_require(obj, "description", lineno))
        hs6 = str(_require(obj, "hs6", lineno))
        raw_origin = str(obj.get("origin", "general"))
        try:
            origin = CaseOrigin(raw_origin)
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: unknown origin {raw_origin!r}") from exc
        if case_id in seen:
            raise ValidationError(f"line {lineno}: duplicate case id {case_id!r}")
        seen.add(case_id)
        cases.append(DecisionCase(case_id, date, description, HsCode(hs6), origin))
    return CaseCollection.from_cases(cases)


def save_cases(collection: CaseCollection, path: str | Path) -> None:
    """Serialize a collection back to the cases file format (round-trips)."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in collection:
            record = {
                "id": c.id,
                "date": c.date.isoformat(),
                "description": c.description,
                "hs6": c.label.digits,
                "origin": c.origin.value,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_manual(*paths: str | Path) -> Manual:
    """Load one or more manual files; headings must be disjoint overall."""
    headings: dict[str, HeadingManual] = {}
    for path in paths:
        for lineno, obj in _read_jsonl(Path(path)):
            heading = HsCode(str(_require(obj, "heading", lineno)))
            if heading.level != CodeLevel.HEADING:
                raise ValidationError(f"line {lineno}: {heading} is not a 4-digit heading")
            if heading.digits in headings:
                raise DuplicateHeadingError(f"heading {heading} appears more than once")
            texts = _require(obj, "sentences", lineno)
            if not isinstance(texts, list):
                raise ParseError("'sentences' must be a list", lineno)
            if not texts:
                raise ValidationError(f"line {lineno}: heading {heading} has no sentences")
            sentences = tuple(
                ManualSentence(sid=f"{heading.digits}:{i}", text=str(t)) for i, t in enumerate(texts)
            )
            oneliners = {str(k): str(v) for k, v in dict(obj.get("subheadings", {})).items()}
            headings[heading.digits] = HeadingManual(
                heading=heading,
                title=str(obj.get("title", "")),
                sentences=sentences,
                subheading_oneliners=oneliners,
            )
    return Manual(headings=headings)


def save_manual(manual: Manual, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for digits in sorted(manual.headings):
            hm = manual.headings[digits]
            record = {
                "heading": digits,
                "title": hm.title,
                "sentences": [s.text for s in hm.sentences],
                "subheadings": dict(hm.subheading_oneliners),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _normalize(text: str) -> str:
    return " ".join(text.casefold().split())


def _token_jaccard(a: str, b: str) -> float:
    ta, tb = set(tokenize(a)), set(tokenize(b))
    union = ta | tb
    if not union:
        return 0.0
    return len(ta & tb) / len(union)


# Quotes that share fewer than this token-set fraction with every manual
# sentence are dropped rather than silently mis-resolved.
QUOTE_OVERLAP_THRESHOLD = 0.9


def load_knowledge_base(path: str | Path, manual: Manual) -> KnowledgeBase:
    """Load expert precedents, resolving quoted evidence to manual sentences.

    Quotes resolve by normalized exact match (case-folded, whitespace
    collapsed) first, else to the sentence with the highest token-set overlap
    when that overlap reaches :data:`QUOTE_OVERLAP_THRESHOLD`. Quotes below
    the threshold are dropped and counted on the returned knowledge base.
    """
    exact: dict[str, str] = {}
    for digits in sorted(manual.headings):
        for s in manual.headings[digits].sentences:
            exact.setdefault(_normalize(s.text), s.sid)

    all_sentences = [
        s for digits in sorted(manual.headings) for s in manual.headings[digits].sentences
    ]

    entries: list[KnowledgeBaseEntry] = []
    total_dropped = 0
    for lineno, obj in _read_jsonl(Path(path)):
        case_id = str(_require(obj, "case_id", lineno))
        description = str(_require(obj, "description", lineno))
        label = HsCode(str(_require(obj, "hs6", lineno)))
        if label.level != CodeLevel.SUBHEADING:
            raise ValidationError(f"line {lineno}: kb label {label} is not a subheading")
        raw_evidence = _require(obj, "evidence", lineno)
        if not isinstance(raw_evidence, list):
            raise ParseError("'evidence' must be a list", lineno)

        sids: set[str] = set()
        dropped = 0
        for item in raw_evidence:
            if not isinstance(item, dict):
                raise ParseError("evidence item is not an object", lineno)
            if "sid" in item:
                sid = str(item["sid"])
                if manual.sentence(sid) is None:
                    raise ValidationError(f"line {lineno}: unknown evidence sid {sid!r}")
                sids.add(sid)
            elif "quote" in item:
                quote = str(item["quote"])
                hit = exact.get(_normalize(quote))
                if hit is not None:
                    sids.add(hit)
                    continue
                best_sid, best_overlap = None, 0.0
                for s in all_sentences:
                    overlap = _token_jaccard(quote, s.text)
                    if overlap > best_overlap:
                        best_sid, best_overlap = s.sid, overlap
                if best_sid is not None and best_overlap >= QUOTE_OVERLAP_THRESHOLD:
                    sids.add(best_sid)
                else:
                    dropped += 1
            else:
                raise ParseError("evidence item needs 'sid' or 'quote'", lineno)

        if not sids:
            raise EmptyEvidenceError(f"kb entry {case_id}: no resolvable evidence")
        total_dropped += dropped
        entries.append(
            KnowledgeBaseEntry(case_id, description, label, frozenset(sids), dropped_quotes=dropped)
        )
    return KnowledgeBase(entries=tuple(entries), dropped_quote_count=total_dropped)


def save_knowledge_base(kb: KnowledgeBase, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in kb.entries:
            record = {
                "case_id": e.case_id,
                "description": e.description,
                "hs6": e.label.digits,
                "evidence": [{"sid": sid} for sid in sorted(e.evidence)],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def temporal_split(
    cases: CaseCollection, n_val: int, n_test: int
) -> tuple[CaseCollection, CaseCollection, CaseCollection]:
    """Newest ``n_test`` cases become test, the next newest ``n_val`` become
    validation, the oldest remainder becomes training."""
    if n_val < 0 or n_test < 0:
        raise SplitError("split sizes must be non-negative")
    if n_val + n_test > len(cases):
        raise SplitError(f"n_val + n_test = {n_val + n_test} exceeds {len(cases)} cases")
    n_train = len(cases) - n_val - n_test
    return (
        CaseCollection(cases.cases[:n_train]),
        CaseCollection(cases.cases[n_train : n_train + n_val]),
        CaseCollection(cases.cases[n_train + n_val :]),
    )


def heading_frequency(cases: CaseCollection) -> dict[str, int]:
    """Count cases per 4-digit heading (label prefix)."""
    return dict(Counter(c.label.heading.digits for c in cases))
