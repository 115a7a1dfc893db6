#!/usr/bin/env python3
"""End-to-end walkthrough: generate a corpus, train, calibrate, evaluate,
and build one officer-readable suggestion report.

Everything is seeded, so two runs of this script print the same numbers.
"""

import datetime as dt

from hs_assist import (
    EncoderConfig,
    SyntheticSpec,
    build_report,
    calibrate_temperature,
    evaluate_model,
    generate_synthetic_corpus,
    temporal_split,
    train,
)

# A small world: 6 headings x 5 subheadings, each subheading owning a
# disjoint keyword set that shows up in all of its goods descriptions.
spec = SyntheticSpec(seed=7)
cases, manual, kb = generate_synthetic_corpus(spec)
print(f"corpus: {len(cases)} cases, {len(manual)} heading manuals, {len(kb)} precedents")

# Time-ordered split: the newest cases are the test set, the next newest
# validate; nothing from the future leaks into training.
train_cases, val_cases, test_cases = temporal_split(cases, spec.n_val, spec.n_test)
print(f"split: {len(train_cases)} train / {len(val_cases)} val / {len(test_cases)} test")

config = EncoderConfig(dim=64, epochs=50, learning_rate=8.0, batch_size=32, seed=7)
model = train(train_cases, val_cases, config)
model = calibrate_temperature(model, val_cases)
print(f"trained: |V|={len(model.vocab)}, {len(model.labels)} classes, T={model.temperature:.3f}")

# The usual accuracy grid, at both code depths.
result = evaluate_model(model, test_cases, manual=manual, kb=kb)
print("\nlevel   k=1     k=3     k=5")
for level in ("hs4", "hs6"):
    row = "  ".join(f"{result.topk[(level, k, 'all')]:.4f}" for k in (1, 3, 5))
    print(f"{level}    {row}")
recalls = [rp.recall for rp in result.retrieval.values()]
print(f"\nevidence retrieval vs expert quotes: mean recall {sum(recalls) / len(recalls):.3f} "
      f"over {len(recalls)} precedent queries")

# One report, the way the service would build it.
query = test_cases[0]
report = build_report(
    model, manual, kb, model.idf, query.description,
    k=3, n_sentences=7,
    generated_at=dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc),
)
print(f"\nquery: {query.description}")
print(f"gold label: {query.label}")
for hc in report.heading_candidates:
    n_marked = sum(s.highlighted for s in hc.full_manual_sentences)
    print(f"  heading {hc.heading} (confidence {hc.probability:.3f}): "
          f"{n_marked} of {len(hc.full_manual_sentences)} sentences highlighted")
    best = hc.evidence[0]
    print(f"    top evidence {best.sid}: text {best.text_score:.2f} "
          f"+ 0.3 x expert {best.expert_score:.2f} = {best.total_score:.2f}")
for sc in report.subheading_candidates:
    print(f"  subheading {sc.subheading}: calibrated {sc.calibrated_prob:.3f} ({sc.one_liner})")
