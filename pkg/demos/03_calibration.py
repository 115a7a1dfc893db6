#!/usr/bin/env python3
"""Temperature scaling in one picture.

An overconfident classifier keeps its rankings but gets its probabilities
divided down: we scale a fitted model's logits by 10, watch validation NLL
as a function of temperature, and let the calibrator find the minimum.
"""

import datetime as dt
import math

import numpy as np

from hs_assist import calibrate_temperature, mean_nll, predict_topk
from hs_assist.corpus import CaseCollection, DecisionCase, HsCode
from hs_assist.encoder import EncoderConfig, ModelArtifact, _logits, _nll_at
from hs_assist.text import IdfTable, Vocabulary

# Hand-built fixture: a 2-class model whose logits are exactly 10x too sharp.

scale = 10.0
model = ModelArtifact(
    vocab=Vocabulary(index={"a": 0}, min_count=1),
    idf=IdfTable(weights={"a": 1.0}, n_docs=1, oov_weight=1.0),
    token_embeddings=np.array([[1.0]]),
    head=np.array([[scale * math.log(3.0), 0.0]]),
    labels=("100000", "100010"),
    temperature=1.0,
    config=EncoderConfig(dim=1, epochs=0, learning_rate=1.0, batch_size=1, seed=0),
)
# Empirically the first class happens 3 times out of 4 -- exactly what
# unscaled logits (ln 3, 0) would predict.
val = CaseCollection.from_cases(
    DecisionCase(f"v{i}", dt.date(2024, 1, 1 + i), "a", HsCode(label))
    for i, label in enumerate(["100000", "100000", "100000", "100010"])
)

logits, y = _logits(model, val)
print("validation NLL as a function of temperature:")
for t in (0.5, 1.0, 2.0, 5.0, 8.0, 10.0, 12.0, 16.0, 20.0):
    nll = _nll_at(logits, y, t)
    bar = "#" * int(nll * 60)
    print(f"  T={t:5.1f}  {nll:.4f}  {bar}")

fitted = calibrate_temperature(model, val)
print(f"\nfitted temperature: {fitted.temperature:.4f} (the sharpening factor was {scale})")
print(f"NLL before {mean_nll(model, val, temperature=1.0):.4f} "
      f"-> after {mean_nll(fitted, val):.4f}")

before = predict_topk(model, "a", k=2)
after = predict_topk(fitted, "a", k=2)
print("\ntop prediction unchanged, confidence deflated:")
for tag, pred in (("before", before), ("after", after)):
    top = pred.ranked[0]
    print(f"  {tag:6} {top.code} calibrated={top.calibrated_prob:.4f} raw={top.raw_prob:.4f}")
