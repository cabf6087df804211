"""Command-line entry point: prepare, run, eval, split, serve, translate.

Exit codes: 0 success; 1 the command completed but recorded per-item failures
(backend errors, unparsable predictions, duplicate traces); 2 configuration or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .llm import annotation_params
from .metrics import EmptyCorpus, GoldUnparsable, match_pair, summarize
from .runtime import (
    ConfigError,
    build_backend,
    build_embedder,
    load_dataset,
    load_prepared,
    load_settings,
    parse_backend_spec,
)
from .schemadb import (
    FileMissing,
    RecordInvalid,
    TooFewExamples,
    append_annotation,
    dump_examples,
    load_annotations,
    load_examples,
    load_schemas,
    split_dataset,
)
from .vectorlib import Embedding, LibraryEntry, VectorLibrary, KIND_DVQ, KIND_NLQ


class OrphanTrace(ConfigError):
    """A trace example_id does not exist in the gold set."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(out_dir: Path, payload: dict) -> None:
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _print(msg: str) -> None:
    print(msg, flush=True)


# ------------------------------------------------------------------- prepare


def cmd_prepare(args) -> int:
    settings = load_settings(
        args.config, embed_dim=args.embed_dim, embedder=args.embedder, workers=args.workers
    )
    backend_spec = parse_backend_spec(args.backend)
    dataset = load_dataset(args.dataset)
    backend = build_backend(backend_spec, settings)
    embedder = build_embedder(settings, backend_spec.mode)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures: list[tuple[str, str]] = []

    # Embedding cache: reuse existing vectors, embed only what is missing, and
    # rewrite the file in canonical (train-order) layout.
    embeddings_path = out_dir / "embeddings.jsonl"
    cached: dict[tuple[str, str], dict] = {}
    if embeddings_path.exists():
        with open(embeddings_path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    record = json.loads(line)
                    cached[(record["example_id"], record["kind"])] = record

    entries: list[LibraryEntry] = []
    embedded = 0
    for example in dataset.train:
        for kind, text in ((KIND_NLQ, example.nlq), (KIND_DVQ, example.dvq)):
            record = cached.get((example.example_id, kind))
            if record is not None and record["model_id"] == embedder.model_id:
                embedding = Embedding(record["model_id"], record["dim"], tuple(record["values"]))
            else:
                try:
                    embedding = embedder.embed(text).normalized()
                    embedded += 1
                except Exception as exc:
                    failures.append((example.example_id, f"{type(exc).__name__}: {exc}"))
                    continue
            entries.append(LibraryEntry(f"{len(entries):06d}", kind, embedding, example.example_id))
    library = VectorLibrary(entries, embedder.model_id)
    library.save(embeddings_path)
    _print(f"embeddings: {len(entries)} cached entries ({embedded} newly embedded)")

    # Annotations: one per database, append-only.
    annotations_path = out_dir / "annotations.jsonl"
    existing = load_annotations(annotations_path) if annotations_path.exists() else {}
    from .pipeline import annotate_databases

    new_records, annotation_failures = annotate_databases(
        dataset.schemas, backend, model_id=settings.model_id, existing=existing
    )
    for record in new_records:
        append_annotation(record, annotations_path)
    if not annotations_path.exists():
        annotations_path.touch()
    failures.extend(annotation_failures)
    _print(f"annotations: {len(existing) + len(new_records)} databases ({len(new_records)} newly annotated)")

    _write_manifest(
        out_dir,
        {
            "command": "prepare",
            "created_at": _now(),
            "dataset": str(args.dataset),
            "out": str(out_dir),
            "backend": backend_spec.describe(),
            "embed_model_id": embedder.model_id,
            "model_id": settings.model_id,
            "annotation_params": vars(annotation_params(settings.model_id)),
            "train_examples": len(dataset.train),
        },
    )
    if failures:
        for item_id, reason in failures:
            _print(f"FAILED {item_id}: {reason}")
        return 1
    return 0


# ----------------------------------------------------------------------- run


def cmd_run(args) -> int:
    settings = load_settings(
        args.config, k=args.k, workers=args.workers, seed=args.seed, embed_dim=args.embed_dim
    )
    backend_spec = parse_backend_spec(args.backend)
    bundle = load_prepared(
        args.dataset,
        args.prep,
        backend_spec,
        settings,
        test_path=args.test,
        k=settings.k,
        enable_retune=not args.no_retune,
        enable_debug=not args.no_debug,
    )
    examples = bundle.dataset.test
    if not examples:
        raise ConfigError("no test examples to run (expected test.jsonl or --test)")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces_path = out_dir / "traces.jsonl"
    done_path = out_dir / "done.txt"
    done: set[str] = set()
    if done_path.exists():
        done = {line.strip() for line in done_path.read_text(encoding="utf-8").splitlines() if line.strip()}
    remaining = [e for e in examples if e.example_id not in done]
    _print(f"running {len(remaining)} of {len(examples)} examples (backend={backend_spec.describe()})")

    _write_manifest(
        out_dir,
        {
            "command": "run",
            "created_at": _now(),
            "dataset": str(args.dataset),
            "test": str(args.test) if args.test else str(Path(args.dataset) / "test.jsonl"),
            "prep": str(args.prep),
            "out": str(out_dir),
            "backend": backend_spec.describe(),
            "k": bundle.config.k,
            "enable_retune": bundle.config.enable_retune,
            "enable_debug": bundle.config.enable_debug,
            "workers": settings.workers,
            "seed": settings.seed,
            "model_id": settings.model_id,
            "embed_model_id": bundle.config.embed_model_id,
            "gen_params": vars(bundle.config.gen_params),
        },
    )

    if remaining:
        with open(traces_path, "a", encoding="utf-8") as traces_file, open(
            done_path, "a", encoding="utf-8"
        ) as done_file:

            def checkpoint(trace):
                traces_file.write(json.dumps(trace.to_dict(), ensure_ascii=False) + "\n")
                traces_file.flush()
                done_file.write(trace.example_id + "\n")
                done_file.flush()

            bundle.pipeline.run_corpus(remaining, workers=settings.workers, on_trace=checkpoint)

    # Score whatever is on disk (covers resumed runs too).
    finals = _read_traces(traces_path)
    gold = {e.example_id: e for e in examples}
    records = [
        match_pair(final, gold[example_id].dvq, pair_id=example_id)
        for example_id, final, _err in finals
        if example_id in gold
    ]
    summary = summarize(records)
    (out_dir / "summary.json").write_text(
        json.dumps({"backend": backend_spec.describe(), **summary.to_dict()}, indent=2) + "\n",
        encoding="utf-8",
    )
    _print_summary_table(summary)
    errors = sum(1 for _id, _final, err in finals if err)
    if errors:
        _print(f"{errors} example(s) recorded backend/extraction errors")
        return 1
    return 0


def _read_traces(path: Path) -> list[tuple[str, str, str | None]]:
    if not path.exists():
        raise FileMissing(f"trace file {path} does not exist")
    rows: list[tuple[str, str, str | None]] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                record = json.loads(line)
                rows.append((record["example_id"], record.get("final", ""), record.get("error")))
    return rows


# ---------------------------------------------------------------------- eval


def _print_summary_table(summary) -> None:
    headers = ["Vis Acc.", "Data Acc.", "Axis Acc.", "Acc."]
    values = [summary.vis_acc, summary.data_acc, summary.axis_acc, summary.acc]
    _print("  ".join(f"{h:>10}" for h in headers))
    _print("  ".join(f"{v * 100:>9.2f}%" for v in values))


def cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset, test_path=args.test, need_train=False)
    if not dataset.test:
        raise ConfigError("no gold examples (expected test.jsonl or --test)")
    gold = {e.example_id: e for e in dataset.test}
    traces_path = Path(args.traces)
    rows = _read_traces(traces_path)
    if not rows:
        raise EmptyCorpus(f"trace file {traces_path} is empty")

    deduped: dict[str, str] = {}
    duplicates = 0
    for example_id, final, _err in rows:
        if example_id not in gold:
            raise OrphanTrace(f"trace {example_id!r} does not exist in the gold set")
        if example_id in deduped:
            duplicates += 1
            _print(f"warning: duplicate trace for {example_id!r}; keeping the last one")
        deduped[example_id] = final

    records = [match_pair(final, gold[eid].dvq, pair_id=eid) for eid, final in deduped.items()]
    summary = summarize(records)
    parse_failures = sum(1 for r in records if not r.pred_parse_ok)

    backend_mode = "unknown"
    manifest_path = traces_path.parent / "manifest.json"
    if manifest_path.exists():
        backend_mode = json.loads(manifest_path.read_text(encoding="utf-8")).get("backend", "unknown")

    report = {
        "backend": backend_mode,
        **summary.to_dict(),
        "pred_parse_failures": parse_failures,
        "duplicate_traces": duplicates,
    }
    out_path = Path(args.out) if args.out else traces_path.parent / "report.json"
    out_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    _print(f"backend: {backend_mode}   n: {summary.n}")
    _print_summary_table(summary)
    _print(f"report written to {out_path}")
    return 1 if (parse_failures or duplicates) else 0


# --------------------------------------------------------------------- split


def cmd_split(args) -> int:
    try:
        ratios = tuple(float(part) for part in args.ratios.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --ratios {args.ratios!r}: {exc}") from exc
    if len(ratios) != 3:
        raise ConfigError("--ratios needs exactly three comma-separated numbers")
    schemas = load_schemas(args.schemas)
    examples = load_examples(args.examples, schemas)
    try:
        split = split_dataset(examples, ratios=ratios, seed=args.seed)
    except (TooFewExamples, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
        dump_examples(part, out_dir / f"{name}.jsonl")
    _print(f"split {len(examples)} examples into {len(split.train)}/{len(split.dev)}/{len(split.test)}")
    return 0


# --------------------------------------------------------------------- serve


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    settings = load_settings(args.config, k=args.k, embed_dim=args.embed_dim)
    backend_spec = parse_backend_spec(args.backend)
    bundle = load_prepared(
        args.dataset,
        args.prep,
        backend_spec,
        settings,
        k=settings.k,
        enable_retune=not args.no_retune,
        enable_debug=not args.no_debug,
    )
    app = create_app(bundle)
    _print(f"serving on http://{args.host}:{args.port} (backend={backend_spec.describe()})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ----------------------------------------------------------------- translate


def cmd_translate(args) -> int:
    if args.server:
        import httpx

        try:
            response = httpx.post(
                args.server.rstrip("/") + "/translate",
                json={"nlq": args.nlq, "db_id": args.db, "include_prompts": args.include_prompts},
                timeout=120.0,
            )
        except httpx.HTTPError as exc:
            raise ConfigError(f"could not reach server {args.server}: {exc}") from exc
        if response.status_code != 200:
            raise ConfigError(f"server returned HTTP {response.status_code}: {response.text}")
        _print(json.dumps(response.json(), indent=2, ensure_ascii=False))
        return 0

    if not args.dataset or not args.prep or not args.backend:
        raise ConfigError("translate needs either --server or --dataset/--prep/--backend")
    settings = load_settings(args.config, k=args.k, embed_dim=args.embed_dim)
    backend_spec = parse_backend_spec(args.backend)
    bundle = load_prepared(
        args.dataset,
        args.prep,
        backend_spec,
        settings,
        k=settings.k,
        enable_retune=not args.no_retune,
        enable_debug=not args.no_debug,
    )
    trace = bundle.pipeline.translate(args.nlq, args.db)
    record = trace.to_dict()
    if not args.include_prompts:
        for key in ("gen_prompt", "rtn_prompt", "dbg_prompt", "gen_reply", "rtn_reply", "dbg_reply"):
            record.pop(key, None)
    _print(json.dumps(record, indent=2, ensure_ascii=False))
    return 0 if trace.error is None else 1


# -------------------------------------------------------------------- parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override file values")
    parser.add_argument("--embed-dim", type=int, default=None, help="local embedder dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gred",
        description="Retrieval-augmented generate/retune/debug translation of questions into DVQs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build the embedding cache and database annotations")
    p.add_argument("--dataset", required=True, help="dataset dir with schemas.json and train.jsonl")
    p.add_argument("--out", required=True, help="output dir for preparation artifacts")
    p.add_argument("--backend", required=True, help="remote|scripted:<script>|replay:<cache>")
    p.add_argument("--embedder", choices=["auto", "local", "remote"], default=None)
    p.add_argument("--workers", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("run", help="run the pipeline over a test set, writing resumable traces")
    p.add_argument("--dataset", required=True)
    p.add_argument("--prep", required=True, help="preparation dir from `gred prepare`")
    p.add_argument("--out", required=True, help="output dir for traces")
    p.add_argument("--test", default=None, help="test JSONL (default: <dataset>/test.jsonl)")
    p.add_argument("--backend", required=True)
    p.add_argument("--k", type=int, default=None, help="retrieval count per stage")
    p.add_argument("--no-retune", action="store_true", help="disable the style-retuning stage")
    p.add_argument("--no-debug", action="store_true", help="disable the schema-debugging stage")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score a trace file against gold queries")
    p.add_argument("--traces", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--test", default=None)
    p.add_argument("--out", default=None, help="report path (default: report.json beside traces)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("split", help="split an example file into train/dev/test")
    p.add_argument("--examples", required=True)
    p.add_argument("--schemas", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ratios", default="80,4.5,15.5")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("serve", help="serve the pipeline and evaluator over HTTP")
    p.add_argument("--dataset", required=True)
    p.add_argument("--prep", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--no-retune", action="store_true")
    p.add_argument("--no-debug", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("translate", help="translate one question (thin client of a server, or in-process)")
    p.add_argument("--nlq", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--server", default=None, help="base URL of a running `gred serve`")
    p.add_argument("--dataset", default=None)
    p.add_argument("--prep", default=None)
    p.add_argument("--backend", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--no-retune", action="store_true")
    p.add_argument("--no-debug", action="store_true")
    p.add_argument("--include-prompts", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_translate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileMissing, RecordInvalid, EmptyCorpus, GoldUnparsable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
