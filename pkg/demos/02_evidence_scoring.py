#!/usr/bin/env python3
"""How a manual sentence earns its score, on a hand-sized example.

Each sentence of a candidate heading's manual gets
``total = text + kb_weight * expert`` where the text side rewards
IDF-weighted embedding alignment with the description and the expert side
rewards sentences that similar precedent cases quoted.
"""

import numpy as np

from hs_assist import RetrievalConfig, score_heading_sentences
from hs_assist.corpus import (
    HeadingManual,
    HsCode,
    KnowledgeBase,
    KnowledgeBaseEntry,
    Manual,
    ManualSentence,
)
from hs_assist.encoder import EncoderConfig, ModelArtifact
from hs_assist.text import IdfTable, Vocabulary

# A 5-token embedding space laid out by hand: "compressor" and "pump" point
# the same way, "fan" is nearby, "office" is orthogonal.
tokens = ["compressor", "pump", "fan", "office", "machines"]
emb = np.array(
    [
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.8, 0.6, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0],
    ]
)
idf = {"compressor": 2.5, "pump": 2.0, "fan": 1.8, "office": 2.2, "machines": 1.0}
model = ModelArtifact(
    vocab=Vocabulary(index={t: i for i, t in enumerate(tokens)}, min_count=1),
    idf=IdfTable(weights=idf, n_docs=10, oov_weight=max(idf.values())),
    token_embeddings=emb,
    head=np.zeros((3, 1)),
    labels=("841480",),
    temperature=1.0,
    config=EncoderConfig(dim=3, epochs=0, learning_rate=1.0, batch_size=1, seed=0),
)

texts = [
    "pump machines",  # strongest text match for a compressor query
    "fan machines",  # close second on text alone
    "office machines only",
]
manual = Manual(
    headings={
        "8414": HeadingManual(
            heading=HsCode("8414"),
            title="air pumps and compressors",
            sentences=tuple(ManualSentence(f"8414:{i}", t) for i, t in enumerate(texts)),
        )
    }
)

# One precedent whose experts quoted sentence 8414:1.
kb = KnowledgeBase(
    entries=(
        KnowledgeBaseEntry(
            case_id="precedent-1",
            description="compressor pump",
            label=HsCode("841480"),
            evidence=frozenset({"8414:1"}),
        ),
    )
)

description = "compressor pump fan"
for kb_weight in (0.0, 0.3, 1.0):
    config = RetrievalConfig(kb_weight=kb_weight, n_sentences=3)
    scored = score_heading_sentences(description, "8414", manual, kb, model, model.idf, config)
    print(f"\nkb_weight = {kb_weight}")
    print("rank  sid      text     expert   total")
    for i, s in enumerate(scored, 1):
        print(f"{i:>4}  {s.sid}  {s.text_score:7.3f}  {s.expert_score:7.3f}  {s.total_score:7.3f}")

# At weight 0 the precedent is invisible and the pure text ranking puts
# "pump machines" first; at 1.0 the quoted "fan machines" overtakes it.
