"""Operator entry point: ingest/validate data, train and calibrate, predict,
evaluate, serve, and generate synthetic fixtures.

Standard output is the only data channel; logs and errors go to standard
error. Exit codes: 0 success, 1 validation/domain error (one structured
JSON error line on stderr), 2 usage error (argparse usage text).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    KnowledgeBase,
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
    calibrate_temperature,
    load_artifact,
    save_artifact,
    train,
)
from .errors import HsAssistError
from .evaluation import (
    EVAL_KS,
    SyntheticSpec,
    evaluate_model,
    generate_synthetic_corpus,
)
from .report import build_report, render
from .retrieval import RetrievalConfig
from .service import SnapshotPaths, create_app, load_snapshot


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hs-assist",
        description="HS code suggestion engine: classification with calibrated "
        "confidence and highlighted manual evidence",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="validate data files and print a summary")
    p.add_argument("--cases", type=Path)
    p.add_argument("--manual", type=Path, nargs="+")
    p.add_argument("--kb", type=Path)
    p.add_argument("--normalized-out", type=Path, help="write canonical copies here")

    p = sub.add_parser("train", help="train, calibrate and write a model artifact")
    p.add_argument("--cases", type=Path, required=True)
    p.add_argument("--manual", type=Path, nargs="+", required=True)
    p.add_argument("--kb", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dim", type=int, default=EncoderConfig.dim)
    p.add_argument("--epochs", type=int, default=EncoderConfig.epochs)
    p.add_argument("--lr", type=float, default=EncoderConfig.learning_rate)
    p.add_argument("--batch-size", type=int, default=EncoderConfig.batch_size)
    p.add_argument("--seed", type=int, default=EncoderConfig.seed)
    p.add_argument("--min-count", type=int, default=EncoderConfig.min_count)
    p.add_argument("--n-val", type=int, default=None, help="validation size (default: 10%%)")
    p.add_argument("--no-calibrate", action="store_true")

    p = sub.add_parser("predict", help="classify one description and print the report")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--manual", type=Path, nargs="+", required=True)
    p.add_argument("--kb", type=Path)
    p.add_argument("--text", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--sentences", type=int, default=7)
    p.add_argument("--format", choices=("json", "html"), default="json")
    p.add_argument("--kb-weight", type=float, default=RetrievalConfig.kb_weight)
    p.add_argument("--k-case", type=int, default=RetrievalConfig.k_case)
    p.add_argument("--clamp-negative-kb", action="store_true")
    p.add_argument("--normalize-text-score", action="store_true")

    p = sub.add_parser("evaluate", help="score a model on a test set")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--cases", type=Path, required=True, help="cases to evaluate on")
    p.add_argument("--manual", type=Path, nargs="+")
    p.add_argument("--kb", type=Path)
    p.add_argument("--kb-weight", type=float, default=RetrievalConfig.kb_weight)
    p.add_argument("--sentences", type=int, default=RetrievalConfig.n_sentences)
    p.add_argument("--json", type=Path, help="also write the full result as JSON")

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--model", type=Path)
    p.add_argument("--manual", type=Path)
    p.add_argument("--kb", type=Path)
    p.add_argument("--bind", default=None, help="host:port (default 127.0.0.1:8000)")
    p.add_argument("--kb-weight", type=float, default=RetrievalConfig.kb_weight)
    p.add_argument("--k-case", type=int, default=RetrievalConfig.k_case)

    p = sub.add_parser("synth", help="generate a synthetic corpus for testing")
    p.add_argument("--spec", type=Path, help="JSON file of generator fields")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out-dir", type=Path, required=True)

    return parser


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _cmd_ingest(args: argparse.Namespace) -> int:
    summary: dict = {}
    manual = None
    if args.manual:
        manual = load_manual(*args.manual)
        summary["headings"] = len(manual)
        summary["sentences"] = sum(len(hm.sentences) for hm in manual.headings.values())
    if args.cases:
        cases = load_cases(args.cases)
        summary["cases"] = len(cases)
        if args.normalized_out:
            args.normalized_out.mkdir(parents=True, exist_ok=True)
            save_cases(cases, args.normalized_out / "cases.jsonl")
    if args.kb:
        if manual is None:
            raise HsAssistError("--kb requires --manual to resolve evidence")
        kb = load_knowledge_base(args.kb, manual)
        summary["kb_entries"] = len(kb)
        summary["kb_dropped_quotes"] = kb.dropped_quote_count
        if args.normalized_out:
            args.normalized_out.mkdir(parents=True, exist_ok=True)
            save_knowledge_base(kb, args.normalized_out / "kb.jsonl")
    if manual is not None and args.normalized_out:
        args.normalized_out.mkdir(parents=True, exist_ok=True)
        save_manual(manual, args.normalized_out / "manual.jsonl")
    if not summary:
        raise HsAssistError("nothing to ingest: pass --cases, --manual and/or --kb")
    _emit({"ok": True, **summary})
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cases = load_cases(args.cases)
    manual = load_manual(*args.manual)
    load_knowledge_base(args.kb, manual)  # fail fast on bad evidence

    n_val = args.n_val if args.n_val is not None else len(cases) // 10
    train_cases, val_cases, _ = temporal_split(cases, n_val=n_val, n_test=0)
    config = EncoderConfig(
        dim=args.dim,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        min_count=args.min_count,
    )
    model = train(train_cases, val_cases, config)
    calibrated = False
    if not args.no_calibrate and len(val_cases) > 0:
        model = calibrate_temperature(model, val_cases)
        calibrated = True
    save_artifact(model, args.out)

    model_headings = {l[:4] for l in model.labels}
    _emit(
        {
            "ok": True,
            "out": str(args.out),
            "train_cases": len(train_cases),
            "val_cases": len(val_cases),
            "classes": len(model.labels),
            "vocab": len(model.vocab),
            "calibrated": calibrated,
            "temperature": model.temperature,
            "headings_without_manual": sorted(model_headings - set(manual.headings)),
        }
    )
    return 0


def _retrieval_config(args: argparse.Namespace, n_sentences: int) -> RetrievalConfig:
    return RetrievalConfig(
        kb_weight=args.kb_weight,
        k_case=getattr(args, "k_case", RetrievalConfig.k_case),
        n_sentences=n_sentences,
        clamp_negative_kb_sim=getattr(args, "clamp_negative_kb", False),
        normalize_text_score=getattr(args, "normalize_text_score", False),
    )


def _cmd_predict(args: argparse.Namespace) -> int:
    model = load_artifact(args.model)
    manual = load_manual(*args.manual)
    kb = load_knowledge_base(args.kb, manual) if args.kb else KnowledgeBase(entries=())
    config = _retrieval_config(args, args.sentences)
    report = build_report(
        model,
        manual,
        kb,
        model.idf,
        args.text,
        k=args.k,
        n_sentences=args.sentences,
        config=config,
    )
    sys.stdout.buffer.write(render(report, args.format))
    sys.stdout.buffer.write(b"\n")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_artifact(args.model)
    cases = load_cases(args.cases)
    manual = load_manual(*args.manual) if args.manual else None
    kb = load_knowledge_base(args.kb, manual) if args.kb and manual else None
    config = _retrieval_config(args, args.sentences)
    result = evaluate_model(model, cases, manual=manual, kb=kb, config=config)

    groups = sorted({g for (_, _, g) in result.topk})
    for group in groups:
        n = result.counts.get(group, 0)
        print(f"top-k accuracy (group={group}, n={n})")
        print("level  " + "  ".join(f"k={k}   " for k in EVAL_KS))
        for level in ("hs4", "hs6"):
            cells = "  ".join(f"{result.topk[(level, k, group)]:.4f}" for k in EVAL_KS)
            print(f"{level}    {cells}")
        print()
    if result.retrieval:
        recalls = [rp.recall for rp in result.retrieval.values()]
        precisions = [rp.precision for rp in result.retrieval.values()]
        print(f"retrieval over {len(recalls)} kb queries: "
              f"mean recall {sum(recalls) / len(recalls):.4f}, "
              f"mean precision {sum(precisions) / len(precisions):.4f}")
    if result.freq_slope is not None:
        print(f"accuracy vs log10(frequency) slope: {result.freq_slope:.4f}")
    if args.json:
        args.json.write_text(result.to_json(), encoding="utf-8")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import ENV_BIND_ADDR

    config = RetrievalConfig(kb_weight=args.kb_weight, k_case=args.k_case)
    if args.model and args.manual:
        paths = SnapshotPaths(args.model, args.manual, args.kb)
        snapshot = load_snapshot(paths, config)
        app = create_app(snapshot=snapshot, paths=paths, config=config)
    else:
        app = create_app(config=config)

    bind = args.bind or os.environ.get(ENV_BIND_ADDR) or "127.0.0.1:8000"
    host, _, port = bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    raw = json.loads(args.spec.read_text(encoding="utf-8")) if args.spec else {}
    if args.seed is not None:
        raw["seed"] = args.seed
    spec = SyntheticSpec.from_dict(raw)
    cases, manual, kb = generate_synthetic_corpus(spec)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_cases(cases, args.out_dir / "cases.jsonl")
    save_manual(manual, args.out_dir / "manual.jsonl")
    save_knowledge_base(kb, args.out_dir / "kb.jsonl")
    meta = {f: getattr(spec, f) for f in spec.__dataclass_fields__}
    (args.out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    _emit({"ok": True, "out_dir": str(args.out_dir), "cases": len(cases), "kb": len(kb)})
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
    "synth": _cmd_synth,
}


def run_command(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except HsAssistError as exc:
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)}, ensure_ascii=False)
        print(line, file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        line = json.dumps({"error": "FileNotFound", "message": str(exc)}, ensure_ascii=False)
        print(line, file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
