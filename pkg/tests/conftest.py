"""Shared fixtures: tiny hand-built models and the desk-scale synthetic run."""

from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from hs_assist.corpus import (
    CaseCollection,
    DecisionCase,
    HeadingManual,
    HsCode,
    Manual,
    ManualSentence,
)
from hs_assist.encoder import EncoderConfig, ModelArtifact
from hs_assist.evaluation import SyntheticSpec, generate_synthetic_corpus
from hs_assist.text import IdfTable, Vocabulary


def make_cases(texts, labels=None, origins=None, start=dt.date(2020, 1, 1)):
    """Sequentially dated cases from description texts."""
    labels = labels or ["854310"] * len(texts)
    cases = []
    for i, text in enumerate(texts):
        kwargs = {}
        if origins:
            kwargs["origin"] = origins[i]
        cases.append(
            DecisionCase(
                id=f"c{i:04d}",
                date=start + dt.timedelta(days=i),
                description=text,
                label=HsCode(labels[i]),
                **kwargs,
            )
        )
    return CaseCollection.from_cases(cases)


def make_manual(sentences_by_heading, oneliners=None):
    headings = {}
    for heading, texts in sentences_by_heading.items():
        headings[heading] = HeadingManual(
            heading=HsCode(heading),
            title=f"title {heading}",
            sentences=tuple(
                ManualSentence(sid=f"{heading}:{i}", text=t) for i, t in enumerate(texts)
            ),
            subheading_oneliners=(oneliners or {}).get(heading, {}),
        )
    return Manual(headings=headings)


def make_model(tokens, embeddings, labels, head=None, idf_weights=None, temperature=1.0, dim=None):
    """Hand-built artifact: explicit embeddings and head, trivial IDF."""
    embeddings = np.asarray(embeddings, dtype=float)
    dim = dim or embeddings.shape[1]
    vocab = Vocabulary(index={t: i for i, t in enumerate(tokens)}, min_count=1)
    weights = idf_weights or {t: 1.0 for t in tokens}
    idf = IdfTable(weights=weights, n_docs=1, oov_weight=max(weights.values(), default=1.0))
    if head is None:
        head = np.zeros((dim, len(labels)))
    return ModelArtifact(
        vocab=vocab,
        idf=idf,
        token_embeddings=embeddings,
        head=np.asarray(head, dtype=float),
        labels=tuple(sorted(labels)),
        temperature=temperature,
        config=EncoderConfig(dim=dim, epochs=0, learning_rate=1.0, batch_size=8, seed=0),
    )


ACCEPTANCE_SPEC = SyntheticSpec(
    seed=7,
    n_headings=6,
    n_subheadings_per_heading=5,
    n_train=600,
    n_val=100,
    n_test=100,
    keywords_per_class=4,
    noise_tokens_per_case=6,
)


@pytest.fixture(scope="session")
def synthetic_world():
    """The acceptance-scale corpus, shared read-only across tests."""
    cases, manual, kb = generate_synthetic_corpus(ACCEPTANCE_SPEC)
    return ACCEPTANCE_SPEC, cases, manual, kb


@pytest.fixture(scope="session")
def trained_model(synthetic_world):
    """A trained + calibrated model over the synthetic corpus."""
    from hs_assist.corpus import temporal_split
    from hs_assist.encoder import calibrate_temperature, train

    spec, cases, _, _ = synthetic_world
    train_cases, val_cases, test_cases = temporal_split(cases, spec.n_val, spec.n_test)
    config = EncoderConfig(dim=64, epochs=50, learning_rate=8.0, batch_size=32, seed=7)
    model = train(train_cases, val_cases, config)
    model = calibrate_temperature(model, val_cases)
    return model, train_cases, val_cases, test_cases
