"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside the pytest verdicts.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from hs_assist.corpus import CodeLevel, temporal_split
from hs_assist.encoder import (
    EncoderConfig,
    _loss_and_grads,
    _nll_at,
    calibrate_temperature,
    mean_nll,
    predict_topk,
    save_artifact,
    train,
)
from hs_assist.evaluation import (
    SyntheticSpec,
    evaluate_model,
    generate_synthetic_corpus,
    retrieval_recall_precision,
    topk_accuracy,
)
from hs_assist.report import build_report, render
from hs_assist.retrieval import (
    KbNeighborhood,
    RetrievalConfig,
    expert_score,
    relevance_score,
    retrieve_evidence,
)
from hs_assist.service import Snapshot, create_app

from conftest import ACCEPTANCE_SPEC, make_cases, make_model
from test_retrieval import _kb_entry, naive_retrieve, random_instance

FIXED_TS = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {title}")
        raise
    print(f"[PASS] criterion {number}: {title}")


def _pipeline(seed: int = 7):
    """synth -> split -> train -> calibrate, at the acceptance shape."""
    spec = SyntheticSpec(
        seed=seed, n_headings=6, n_subheadings_per_heading=5,
        n_train=600, n_val=100, n_test=100,
        keywords_per_class=4, noise_tokens_per_case=6,
    )
    assert spec == ACCEPTANCE_SPEC or seed != 7
    cases, manual, kb = generate_synthetic_corpus(spec)
    train_cases, val_cases, test_cases = temporal_split(cases, spec.n_val, spec.n_test)
    config = EncoderConfig(dim=64, epochs=50, learning_rate=8.0, batch_size=32, seed=seed)
    model = train(train_cases, val_cases, config)
    model = calibrate_temperature(model, val_cases)
    return model, manual, kb, train_cases, val_cases, test_cases


def test_criterion_1_synthetic_classification():
    with criterion(1, "synthetic-corpus classification: top-1 >= 0.90, top-3 >= 0.97, < 60 s"):
        started = time.monotonic()
        model, manual, kb, _, _, test_cases = _pipeline()
        result = evaluate_model(model, test_cases, manual=manual, kb=kb)
        elapsed = time.monotonic() - started
        top1 = result.topk[("hs6", 1, "all")]
        top3 = result.topk[("hs6", 3, "all")]
        print(f"  top-1 {top1:.3f}, top-3 {top3:.3f}, {elapsed:.1f} s")
        assert top1 >= 0.90
        assert top3 >= 0.97
        assert elapsed < 60.0


def test_criterion_2_gradient_check():
    with criterion(2, "analytic gradients match central differences, rel err < 1e-4, 5 seeds"):
        step = 1e-5
        for seed in range(5):
            rng = np.random.default_rng(1000 + seed)
            n_tokens, dim, n_classes, n_cases = 10, 6, 3, 10
            emb = rng.normal(size=(n_tokens, dim))
            head = rng.normal(size=(dim, n_classes))
            token_ids = [
                list(rng.integers(0, n_tokens, size=int(rng.integers(2, 6))))
                for _ in range(n_cases)
            ]
            y = np.array([int(rng.integers(n_classes)) for _ in range(n_cases)])
            _, d_head, d_emb = _loss_and_grads(emb, head, token_ids, y)

            def loss_of(e, h):
                return _loss_and_grads(e, h, token_ids, y)[0]

            worst = 0.0
            for i in range(dim):
                for j in range(n_classes):
                    hp, hm = head.copy(), head.copy()
                    hp[i, j] += step
                    hm[i, j] -= step
                    numeric = (loss_of(emb, hp) - loss_of(emb, hm)) / (2 * step)
                    rel = abs(d_head[i, j] - numeric) / max(abs(d_head[i, j]), abs(numeric), 1e-10)
                    worst = max(worst, rel)
            used = sorted({t for ids in token_ids for t in ids})
            for row in rng.choice(used, size=5, replace=False):
                for j in range(dim):
                    ep, em = emb.copy(), emb.copy()
                    ep[row, j] += step
                    em[row, j] -= step
                    numeric = (loss_of(ep, head) - loss_of(em, head)) / (2 * step)
                    rel = abs(d_emb[row, j] - numeric) / max(abs(d_emb[row, j]), abs(numeric), 1e-10)
                    worst = max(worst, rel)
            assert worst < 1e-4, f"seed {seed}: worst relative error {worst}"


def test_criterion_3_retrieval_oracle_equivalence():
    with criterion(3, "retrieve_evidence identical to exhaustive scorer on 100 random instances"):
        rng = np.random.default_rng(2024)
        for trial in range(100):
            description, manual, kb, model = random_instance(rng, max_sentences=60, max_kb=20)
            lam = (0.0, 0.3, 1.0)[trial % 3]
            config = RetrievalConfig(
                kb_weight=lam,
                k_case=int(rng.integers(1, 12)),
                n_sentences=int(rng.integers(1, 20)),
            )
            got = retrieve_evidence(description, "8543", manual, kb, model, model.idf, config)
            want = naive_retrieve(description, "8543", manual, kb, model, model.idf, config)
            assert [(s.sid, s.text_score, s.expert_score, s.total_score) for s in got] == want


def test_criterion_4_hand_fixtures_exact():
    with criterion(4, "expert-score and blended-score worked examples reproduce exactly"):
        e1 = _kb_entry("e1", "d1", {"8543:0", "8543:1"})
        e2 = _kb_entry("e2", "d2", {"8543:1"})
        neighborhood = KbNeighborhood(neighbors=((e1, 0.9), (e2, 0.5)))
        assert expert_score("8543:1", neighborhood) == 1.4
        assert expert_score("8543:0", neighborhood) == 0.9
        assert expert_score("8543:2", neighborhood) == 0.0

        from hs_assist.corpus import ManualSentence

        model = make_model(
            ["a", "b"], [[1.0, 0.0], [0.0, 1.0]], ["854370"],
            idf_weights={"a": 2.0, "b": 1.0},
        )
        sentence = ManualSentence(sid="8543:1", text="a")
        scored = relevance_score(
            ["a", "b"], sentence, model, model.idf, neighborhood, RetrievalConfig(kb_weight=0.3)
        )
        assert scored.text_score == 2.0
        assert scored.expert_score == 1.4
        assert scored.total_score == 2.42  # error = 0 at double precision


def _grid_oracle(logits: np.ndarray, y: np.ndarray) -> float:
    grid = np.arange(0.05, 20.0 + 1e-9, 0.01)
    values = [_nll_at(logits, y, t) for t in grid]
    return float(grid[int(np.argmin(values))])


def _grid_argmin_set(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    """All grid points achieving the minimum NLL. A heavily separable
    corpus drives NLL to exactly 0.0 over a whole temperature plateau, and
    every plateau point is then an equally valid oracle answer."""
    grid = np.arange(0.05, 20.0 + 1e-9, 0.01)
    values = np.array([_nll_at(logits, y, t) for t in grid])
    return grid[values <= values.min()]


def test_criterion_5_calibration():
    with criterion(5, "calibration: NLL never worse, argmax unchanged, T within 1e-2 of grid"):
        # overconfident fixture: logits scaled x10 post hoc
        scale = 10.0
        model = make_model(
            ["a"], [[1.0]], ["100000", "100010"],
            head=[[scale * math.log(3.0), 0.0]], dim=1,
        )
        val = make_cases(["a"] * 4, labels=["100000", "100000", "100000", "100010"])
        fitted = calibrate_temperature(model, val)
        assert fitted.temperature > 1.0
        assert mean_nll(fitted, val) < mean_nll(model, val, temperature=1.0)  # strict decrease
        logits = np.tile([scale * math.log(3.0), 0.0], (4, 1))
        y = np.array([0, 0, 0, 1])
        assert abs(fitted.temperature - _grid_oracle(logits, y)) <= 1e-2

        # trained model on the synthetic corpus: never worse, argmax unchanged
        # on 100% of samples, fitted T agrees with the grid oracle
        from hs_assist.encoder import _logits

        trained, _, _, _, val_cases, test_cases = _pipeline()
        uncal = mean_nll(trained, val_cases, temperature=1.0)
        cal = mean_nll(trained, val_cases)
        assert cal <= uncal
        val_logits, val_y = _logits(trained, val_cases)
        argmin_set = _grid_argmin_set(val_logits, val_y)
        assert min(abs(trained.temperature - g) for g in argmin_set) <= 1e-2
        for case in list(val_cases) + list(test_cases):
            pred = predict_topk(
                trained, case.description, k=len(trained.labels), level=CodeLevel.SUBHEADING
            )
            raw_top = min(pred.ranked, key=lambda r: (-r.raw_prob, r.code)).code
            assert pred.ranked[0].code == raw_top  # calibrated argmax == raw argmax


def test_criterion_6_recall_precision_fixture():
    with criterion(6, "recall/precision on 4-vs-4 with 3 shared returns exactly (0.75, 0.75)"):
        retrieved = ["8472:1", "8472:2", "8472:3", "8472:70"]
        expert = ["8472:0", "8472:1", "8472:2", "8472:3"]
        got = retrieval_recall_precision(retrieved, expert)
        assert got.recall == 0.75
        assert got.precision == 0.75


def test_criterion_7_hierarchy_consistency():
    with criterion(7, "heading accuracy >= subheading accuracy; heading mass = prefix sums"):
        model, manual, kb, train_cases, val_cases, test_cases = _pipeline()
        for corpus in (val_cases, test_cases):
            sub_ranked, head_ranked, gold = [], [], []
            for case in corpus:
                sub = predict_topk(model, case.description, k=5, level=CodeLevel.SUBHEADING)
                head = predict_topk(model, case.description, k=5, level=CodeLevel.HEADING)
                sub_ranked.append([r.code for r in sub.ranked])
                head_ranked.append([r.code for r in head.ranked])
                gold.append(case.label.digits)
            for k in (1, 3, 5):
                acc_sub = topk_accuracy(sub_ranked, gold, k, CodeLevel.SUBHEADING)
                acc_head = topk_accuracy(head_ranked, gold, k, CodeLevel.HEADING)
                assert acc_head >= acc_sub, (k, acc_head, acc_sub)

        for case in list(test_cases)[:25]:
            sub = predict_topk(model, case.description, k=len(model.labels),
                               level=CodeLevel.SUBHEADING)
            head = predict_topk(model, case.description, k=len(model.labels),
                                level=CodeLevel.HEADING)
            sums: dict[str, float] = {}
            raw_sums: dict[str, float] = {}
            for r in sub.ranked:
                sums[r.code[:4]] = sums.get(r.code[:4], 0.0) + r.calibrated_prob
                raw_sums[r.code[:4]] = raw_sums.get(r.code[:4], 0.0) + r.raw_prob
            for r in head.ranked:
                assert abs(r.calibrated_prob - sums[r.code]) <= 1e-12
                assert abs(r.raw_prob - raw_sums[r.code]) <= 1e-12


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "two identically seeded runs: byte-identical artifact and report JSON"):
        artifacts = []
        reports = []
        evals = []
        for run in range(2):
            model, manual, kb, _, _, test_cases = _pipeline(seed=7)
            path = tmp_path / f"model_{run}.hsx"
            save_artifact(model, path)
            artifacts.append(path.read_bytes())
            evals.append(evaluate_model(model, test_cases, manual=manual, kb=kb).to_json())
            report = build_report(
                model, manual, kb, model.idf, test_cases[0].description,
                k=3, n_sentences=7, generated_at=FIXED_TS,
            )
            reports.append(render(report, "json"))
        assert artifacts[0] == artifacts[1]
        assert evals[0] == evals[1]
        assert reports[0] == reports[1]


def test_criterion_9_service_contract():
    with criterion(9, "status matrix 200/400/404/422/503; 50 concurrent identical bodies"):
        model, manual, kb, _, _, test_cases = _pipeline()
        snapshot = Snapshot(model=model, manual=manual, kb=kb, config=RetrievalConfig())
        client = TestClient(create_app(snapshot=snapshot))
        description = test_cases[0].description

        assert client.post("/api/v1/classify", json={"description": description}).status_code == 200
        assert client.get(f"/api/v1/manual/{sorted(manual.headings)[0]}").status_code == 200
        assert client.get("/api/v1/manual/84").status_code == 400
        assert client.get("/api/v1/manual/9999").status_code == 404
        assert client.post("/api/v1/classify", json={"description": ""}).status_code == 422
        assert client.post(
            "/api/v1/classify", json={"description": description, "k": 100}
        ).status_code == 422

        unloaded = TestClient(create_app(paths=None))
        assert unloaded.post("/api/v1/classify", json={"description": "x"}).status_code == 503

        payload = {"description": description, "k": 3, "n_sentences": 7}

        def call(_):
            resp = client.post("/api/v1/classify", json=payload)
            assert resp.status_code == 200
            body = resp.json()
            del body["latency_ms"]
            del body["report"]["generated_at"]
            return json.dumps(body, sort_keys=True)

        with ThreadPoolExecutor(max_workers=16) as pool:
            bodies = set(pool.map(call, range(50)))
        assert len(bodies) == 1
