"""Command-line front end: corpus prep, training, generation, eval, serving."""

from __future__ import annotations

import argparse
import dataclasses
import json
import signal
import sys
from pathlib import Path

from . import corpus as C
from . import figures
from .errors import RecipegenError
from .evaluate import SMOOTHINGS, eval_harness, eval_report_rows
from .generator import SamplingParams, generate
from .nn.checkpoint import KINDS, load_checkpoint
from .service import create_app, service_schema
from .tokenizer import build_vocab
from .trainer import build_configs, parse_kv_file, split_by_id_hash, train


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _read_docs(path: str) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [line for line in lines if line.strip()]


def _write_tsv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    cols = list(rows[0].keys())
    lines = ["\t".join(cols)]
    for row in rows:
        lines.append("\t".join(row[c] for c in cols))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_corpus_stats(args) -> int:
    result = C.ingest(args.input, format=args.format)
    kept, dropped = C.clean(result.records)
    docs = [C.serialize(r) for r in kept]
    stats = C.length_stats(docs)
    print(f"records: {len(result.records)} parsed, {len(result.rejects)} rejected rows")
    print(f"cleaned: {len(kept)} kept, {len(dropped)} dropped")
    print(f"docs: {stats.n}")
    print(f"mean_len: {stats.mean_len:.2f}")
    print(f"std_len: {stats.std_len:.2f}")
    print(f"min_len: {stats.min_len}")
    print(f"max_len: {stats.max_len}")
    return 0


def cmd_corpus_prep(args) -> int:
    out = Path(args.output)
    result = C.ingest(args.input, format=args.format)
    cleaned, dropped_clean = C.clean(result.records)
    if not cleaned:
        return _fail("no records survived cleaning")
    docs = [C.serialize(r) for r in cleaned]
    stats_all = C.length_stats(docs)
    kept, dropped_long = C.select_window(docs, stats_all, hard_cap=args.cap)
    if not kept:
        return _fail("length window dropped every document")
    stats_kept = C.length_stats(kept)
    merged = kept if args.no_merge else C.merge_short(kept, stats_kept)

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(d.text + "\n" for d in merged), encoding="utf-8")
    index_path = out.with_suffix(out.suffix + ".ingredients.txt")
    index_path.write_text(
        "".join(name + "\n" for name in C.ingredient_index(cleaned)), encoding="utf-8"
    )

    report_rows = [
        {
            "stage": "ingested", "docs": str(len(result.records)),
            "mean_len": "", "std_len": "",
        },
        {
            "stage": "cleaned", "docs": str(len(cleaned)),
            "mean_len": f"{stats_all.mean_len:.4f}", "std_len": f"{stats_all.std_len:.4f}",
        },
        {
            "stage": "windowed", "docs": str(len(kept)),
            "mean_len": f"{stats_kept.mean_len:.4f}", "std_len": f"{stats_kept.std_len:.4f}",
        },
        {
            "stage": "merged", "docs": str(len(merged)),
            "mean_len": "", "std_len": "",
        },
    ]
    _write_tsv(out.with_suffix(out.suffix + ".report.tsv"), report_rows)
    figures.save_length_histogram(
        stats_all, str(out.with_suffix(out.suffix + ".lengths.png")), "document lengths"
    )

    print(f"ingested: {len(result.records)} records ({len(result.rejects)} rejected rows)")
    print(
        f"cleaned: {len(cleaned)} kept, {len(dropped_clean)} dropped "
        f"({sum(1 for _, why in dropped_clean if why == 'incomplete')} incomplete, "
        f"{sum(1 for _, why in dropped_clean if why == 'redundant')} redundant)"
    )
    print(f"window: {len(kept)} kept, {len(dropped_long)} dropped over length cap")
    print(f"merged: {len(merged)} documents ({len(kept) - len(merged)} absorbed)")
    print(f"mean_len: {stats_kept.mean_len:.2f}")
    print(f"std_len: {stats_kept.std_len:.2f}")
    print(f"wrote: {out}")
    print(f"wrote: {index_path}")
    return 0


def cmd_corpus_synth(args) -> int:
    from . import synth

    if args.kind == "toy":
        records = synth.toy_records(n=args.n or 10, seed=args.seed)
    elif args.kind == "planted":
        records, _ = synth.planted_records(seed=args.seed)
    else:
        records = synth.demo_records(n=args.n or 40, seed=args.seed)
    C.export_records(records, args.output)
    print(f"wrote: {args.output} ({len(records)} records)")
    return 0


def cmd_corpus_split(args) -> int:
    result = C.ingest(args.input, format=args.format)
    train_part, held_part = split_by_id_hash(result.records, held_fraction=args.fraction)
    C.export_records(train_part, args.train_output)
    C.export_records(held_part, args.heldout_output)
    print(f"wrote: {args.train_output} ({len(train_part)} records)")
    print(f"wrote: {args.heldout_output} ({len(held_part)} records)")
    return 0


def cmd_train(args) -> int:
    docs = _read_docs(args.corpus)
    if not docs:
        return _fail(f"no documents in {args.corpus}")
    kv = parse_kv_file(args.config)
    min_freq = int(kv.pop("min_freq", "1"))
    mode = "char" if args.model == "char-lstm" else "word"
    tagged = [C.TaggedDocument(text=d) for d in docs]
    vocab = build_vocab(tagged, mode=mode, min_freq=min_freq)
    model_cfg, train_cfg = build_configs(args.model, kv, vocab.size)

    def log(step: int, mean_loss: float, rate: float) -> None:
        print(f"{step}\t{mean_loss:.6f}")

    ckpt, report = train(
        args.model, model_cfg, docs, vocab, train_cfg, out_path=args.out, log=log
    )
    loss_rows = [
        {"step": str(s), "loss": f"{v!r}", "tokens_per_sec": f"{r:.1f}"}
        for s, v, r in report.log_rows
    ]
    out = Path(args.out)
    _write_tsv(out.with_suffix(out.suffix + ".loss.tsv"), loss_rows)
    if report.losses:
        figures.save_loss_curve(
            report.losses, str(out.with_suffix(out.suffix + ".loss.png")), args.model
        )
    print(f"steps: {report.total_steps}")
    print(f"final_loss: {report.final_loss:.6f}")
    print(f"elapsed_s: {report.elapsed_s:.2f}")
    print(f"vocab_size: {report.vocab_size}")
    print(f"stream_tokens: {report.stream_len}")
    print(f"wrote: {args.out}")
    return 0


def cmd_generate(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    items = [part.strip() for part in args.ingredients.split(",") if part.strip()]
    sp = SamplingParams(
        temperature=args.temperature,
        top_k=args.top_k,
        max_new_tokens=args.max_new_tokens,
        seed=args.seed,
    )
    result = generate(ckpt, items, sp)
    if args.json:
        payload = dataclasses.asdict(result)
        payload["record"] = None
        if result.record is not None:
            payload["record"] = {
                "id": result.record.id,
                "title": result.record.title,
                "ingredients": [C.render_ingredient(l) for l in result.record.ingredients],
                "instructions": list(result.record.instructions),
            }
        print(json.dumps(payload, indent=2))
        return 0
    if result.record is None:
        print("[unparseable output]")
        print(result.raw_text)
        return 0
    rec = result.record
    print(rec.title or "(untitled)")
    print()
    for line in rec.ingredients:
        print(f"- {C.render_ingredient(line)}")
    print()
    for i, step in enumerate(rec.instructions, start=1):
        print(f"{i}. {step}")
    if result.malformed:
        print()
        print("[warning: output did not parse cleanly; fields may be incomplete]")
    return 0


def cmd_eval(args) -> int:
    checkpoints = [load_checkpoint(p) for p in args.ckpt]
    heldout = C.ingest(args.heldout, format=args.format).records
    sp = SamplingParams(seed=args.seed)
    report = eval_harness(checkpoints, heldout, params=sp, smoothing=args.smoothing)
    text = report.render()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        _write_tsv(out.with_suffix(out.suffix + ".tsv"), eval_report_rows(report))
        figures.save_bleu_bars(
            [(row.model, row.result.score) for row in report.rows],
            str(out.with_suffix(out.suffix + ".png")),
            "corpus BLEU",
        )
        print(f"wrote: {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    checkpoints = [load_checkpoint(p) for p in args.ckpt]
    names = None
    if args.corpus_index:
        names = [
            line.strip()
            for line in Path(args.corpus_index).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    app = create_app(checkpoints, names, allow_origins=args.allow_origin or None)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_schema(args) -> int:
    text = json.dumps(service_schema(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote: {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recipegen")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="corpus preparation commands")
    csub = corpus.add_subparsers(dest="subcommand", required=True)

    stats = csub.add_parser("stats", help="print length statistics of a recipe export")
    stats.add_argument("input")
    stats.add_argument("--format", choices=("record-lines", "delimited-table"), default="record-lines")
    stats.set_defaults(func=cmd_corpus_stats)

    prep = csub.add_parser("prep", help="clean, window, merge, and write tagged documents")
    prep.add_argument("input")
    prep.add_argument("output")
    prep.add_argument("--cap", type=int, default=2000, help="hard length cap in characters")
    prep.add_argument("--no-merge", action="store_true", help="skip short-document merging")
    prep.add_argument("--format", choices=("record-lines", "delimited-table"), default="record-lines")
    prep.set_defaults(func=cmd_corpus_prep)

    synth = csub.add_parser("synth", help="write a synthetic recipe export")
    synth.add_argument("output")
    synth.add_argument("--kind", choices=("demo", "toy", "planted"), default="demo")
    synth.add_argument("--n", type=int, default=0, help="record count (demo/toy)")
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_corpus_synth)

    split = csub.add_parser("split", help="deterministic train/held-out split by id hash")
    split.add_argument("input")
    split.add_argument("train_output")
    split.add_argument("heldout_output")
    split.add_argument("--fraction", type=float, default=0.1)
    split.add_argument("--format", choices=("record-lines", "delimited-table"), default="record-lines")
    split.set_defaults(func=cmd_corpus_split)

    tr = sub.add_parser("train", help="train a model over a prepped corpus")
    tr.add_argument("--model", choices=KINDS, required=True)
    tr.add_argument("--corpus", required=True, help="prepped documents, one per line")
    tr.add_argument("--config", required=True, help="flat key=value config file")
    tr.add_argument("--out", required=True, help="checkpoint output path")
    tr.set_defaults(func=cmd_train)

    gen = sub.add_parser("generate", help="sample a recipe from a checkpoint")
    gen.add_argument("--ckpt", required=True)
    gen.add_argument("--ingredients", required=True, help='comma-separated, e.g. "salt,flour"')
    gen.add_argument("--temperature", type=float, default=0.8)
    gen.add_argument("--top-k", type=int, default=40, dest="top_k")
    gen.add_argument("--max-new-tokens", type=int, default=1024, dest="max_new_tokens")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--json", action="store_true")
    gen.set_defaults(func=cmd_generate)

    ev = sub.add_parser("eval", help="score checkpoints against held-out recipes")
    ev.add_argument("--ckpt", action="append", required=True)
    ev.add_argument("--heldout", required=True, help="held-out recipe export")
    ev.add_argument("--smoothing", choices=SMOOTHINGS, default="add-one")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="report path; table, TSV, and chart written here")
    ev.add_argument("--format", choices=("record-lines", "delimited-table"), default="record-lines")
    ev.set_defaults(func=cmd_eval)

    srv = sub.add_parser("serve", help="run the HTTP generation service")
    srv.add_argument("--ckpt", action="append", required=True)
    srv.add_argument("--corpus-index", help="ingredient names, one per line")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--allow-origin", action="append", help="CORS origin, repeatable")
    srv.set_defaults(func=cmd_serve)

    schema = sub.add_parser("schema", help="print the service JSON schemas")
    schema.add_argument("--out")
    schema.set_defaults(func=cmd_schema)

    return parser


def main(argv: list[str] | None = None) -> int:
    if hasattr(signal, "SIGPIPE"):
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RecipegenError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
