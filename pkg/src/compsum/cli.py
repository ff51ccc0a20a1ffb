"""Command-line surface: option extraction, oracle building, training,
summarization, evaluation, threshold sweeps, statistics, gradient checks.

An optional --config JSON file supplies defaults for any flag of the chosen
subcommand; explicit flags always win.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import model as model_mod
from . import oracle as oracle_mod
from . import pipeline
from .corpus import load_corpus
from .oracle import OracleConfig
from .pipeline import SummarizeConfig
from .rules import extract_options, normalize_options, option_record

logger = logging.getLogger(__name__)


def _load_documents(path):
    docs = list(load_corpus(path))
    if not docs:
        raise ValueError(f"no usable documents in {path}")
    return docs


def _parse_tau_grid(spec: str) -> list[float]:
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"--tau-grid expects start:stop:step, got {spec!r}") from exc
    if step <= 0:
        raise ValueError("--tau-grid step must be positive")
    grid = []
    value = start
    while value <= stop + 1e-9:
        grid.append(round(value, 10))
        value += step
    return grid


def cmd_options_extract(args) -> int:
    docs = _load_documents(args.corpus)
    count = 0
    with Path(args.out).open("w", encoding="utf-8") as handle:
        for doc in docs:
            for i, tree in enumerate(doc.sentences):
                options = normalize_options(extract_options(tree), len(tree.tokens))
                handle.write(json.dumps(option_record(doc.id, i, options)) + "\n")
                count += 1
    print(f"wrote options for {count} sentences to {args.out}")
    return 0


def cmd_oracle_build(args) -> int:
    docs = _load_documents(args.corpus)
    cfg = OracleConfig(k=args.k, beam_width=args.beam, max_sents=args.max_sents, m=args.m)
    entries = (oracle_mod.build_document_oracles(doc, cfg) for doc in docs)
    count = oracle_mod.write_oracle_cache(args.out, entries)
    print(f"wrote oracles for {count} documents to {args.out}")
    return 0


def _load_examples(corpus_path, oracle_path):
    docs = _load_documents(corpus_path)
    by_id = {doc.id: doc for doc in docs}
    entries = oracle_mod.read_oracle_cache(oracle_path, by_id)
    return [
        model_mod.TrainingExample(by_id[e.doc_id], e.candidates, e.labels)
        for e in entries
    ]


def cmd_train(args) -> int:
    examples = _load_examples(args.corpus, args.oracles)
    cfg = model_mod.TrainConfig(
        alpha=args.alpha, learning_rate=args.lr, epochs=args.epochs,
        seed=args.seed, hidden_size=args.hidden, oracles_per_doc=args.m)
    model, trace = model_mod.train(examples, cfg)
    model_mod.save_model(model, args.out)
    for epoch, loss in enumerate(trace, start=1):
        print(f"epoch {epoch}: mean loss {loss:.6f}")
    print(f"saved model to {args.out}")
    return 0


def cmd_summarize(args) -> int:
    docs = _load_documents(args.corpus)
    model = model_mod.load_model(args.model)
    cfg = SummarizeConfig(k=args.k, tau=args.tau, dedup=not args.no_dedup)
    with Path(args.out).open("w", encoding="utf-8") as handle:
        for doc in docs:
            summary = pipeline.summarize(model, doc, cfg)
            record = pipeline.summary_to_record(summary)
            record["rendered"] = " ".join(" ".join(sent) for sent in summary.text)
            handle.write(json.dumps(record) + "\n")
    print(f"wrote {len(docs)} summaries to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    docs = _load_documents(args.corpus)
    model = model_mod.load_model(args.model)
    cfg = SummarizeConfig(k=args.k, tau=args.tau, dedup=not args.no_dedup)
    result = pipeline.evaluate_corpus(model, docs, cfg)
    if args.csv:
        pipeline.write_evaluation_csv(args.csv, result)
    if args.json:
        Path(args.json).write_text(
            json.dumps(pipeline.evaluation_to_json(result), indent=2), encoding="utf-8")
    print(f"documents evaluated: {len(result.rows)} (skipped {result.skipped})")
    print(f"ROUGE-1 F1: {result.mean1.f1:.4f}")
    print(f"ROUGE-2 F1: {result.mean2.f1:.4f}")
    print(f"ROUGE-L F1: {result.mean_l.f1:.4f}")
    return 0


def cmd_sweep(args) -> int:
    docs = _load_documents(args.corpus)
    model = model_mod.load_model(args.model)
    grid = _parse_tau_grid(args.tau_grid)
    cfg = SummarizeConfig(k=args.k, tau=0.0, dedup=not args.no_dedup)
    points = pipeline.sweep_threshold(model, docs, grid, cfg)
    pipeline.write_sweep_csv(args.out, points)
    for point in points:
        print(f"tau={point.tau:.2f} mean_f1={point.mean_f1:.4f} "
              f"ratio={point.compression_ratio:.4f}")
    print(f"wrote sweep to {args.out}")
    return 0


def cmd_stats(args) -> int:
    docs = _load_documents(args.corpus)
    oracles = None
    if args.oracles:
        by_id = {doc.id: doc for doc in docs}
        oracles = oracle_mod.read_oracle_cache(args.oracles, by_id)
    summaries = None
    if args.summaries:
        summaries = []
        with Path(args.summaries).open("r", encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    summaries.append(pipeline.summary_from_record(json.loads(line)))
    rows = pipeline.stats_report(docs, oracles, summaries)
    pipeline.write_stats_csv(args.out, rows)
    print(f"{'node':8} {'len':>6} {'% comps':>8} {'comp acc':>9} {'dedup':>7}")
    for row in rows:
        acc = "-" if row.comp_acc is None else f"{row.comp_acc:.0f}%"
        ded = "-" if row.dedup_pct is None else f"{row.dedup_pct:.0f}%"
        print(f"{row.node_label:8} {row.mean_len:>6.1f} {row.pct_of_comps:>7.1f}% "
              f"{acc:>9} {ded:>7}")
    print(f"wrote stats to {args.out}")
    return 0


def cmd_gradcheck(args) -> int:
    examples = _load_examples(args.corpus, args.oracles)
    rng = np.random.default_rng(args.seed)
    model = model_mod.init_model(args.hidden, args.seed)
    picks = rng.choice(len(examples), size=min(args.samples, len(examples)), replace=False)
    worst = 0.0
    for index in picks:
        error = model_mod.gradient_check(model, examples[int(index)])
        worst = max(worst, error)
        print(f"document {examples[int(index)].doc.id}: max relative error {error:.3e}")
    print(f"overall max relative error: {worst:.3e}")
    return 0 if worst < 1e-4 else 1


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="compsum",
        description="Extractive-compressive summarization toolkit")
    parser.add_argument("--config", help="JSON file of default flag values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves: list[argparse.ArgumentParser] = []

    p_options = sub.add_parser("options", help="compression-option utilities")
    options_sub = p_options.add_subparsers(dest="subcommand", required=True)
    p_extract = options_sub.add_parser("extract", help="dump options per sentence")
    p_extract.add_argument("--corpus")
    p_extract.add_argument("--out")
    leaves.append(p_extract)
    p_extract.set_defaults(func=cmd_options_extract, required_args=("corpus", "out"))

    p_oracle = sub.add_parser("oracle", help="oracle construction")
    oracle_sub = p_oracle.add_subparsers(dest="subcommand", required=True)
    p_build = oracle_sub.add_parser("build", help="build and cache training oracles")
    p_build.add_argument("--corpus")
    p_build.add_argument("--out")
    p_build.add_argument("--k", type=int, default=3)
    p_build.add_argument("--beam", type=int, default=8)
    p_build.add_argument("--max-sents", type=int, default=30)
    p_build.add_argument("--m", type=int, default=5)
    leaves.append(p_build)
    p_build.set_defaults(func=cmd_oracle_build, required_args=("corpus", "out"))

    p_train = sub.add_parser("train", help="train the joint model")
    p_train.add_argument("--corpus")
    p_train.add_argument("--oracles")
    p_train.add_argument("--out")
    p_train.add_argument("--alpha", type=float, default=1.0)
    p_train.add_argument("--lr", type=float, default=0.001)
    p_train.add_argument("--epochs", type=int, default=2)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--hidden", type=int, default=32)
    p_train.add_argument("--m", type=int, default=5)
    leaves.append(p_train)
    p_train.set_defaults(func=cmd_train, required_args=("corpus", "oracles", "out"))

    p_sum = sub.add_parser("summarize", help="produce summaries")
    p_sum.add_argument("--corpus")
    p_sum.add_argument("--model")
    p_sum.add_argument("--out")
    p_sum.add_argument("--tau", type=float, default=0.45)
    p_sum.add_argument("--k", type=int, default=3)
    p_sum.add_argument("--no-dedup", action="store_true")
    leaves.append(p_sum)
    p_sum.set_defaults(func=cmd_summarize, required_args=("corpus", "model", "out"))

    p_eval = sub.add_parser("evaluate", help="score summaries against references")
    p_eval.add_argument("--corpus")
    p_eval.add_argument("--model")
    p_eval.add_argument("--tau", type=float, default=0.45)
    p_eval.add_argument("--k", type=int, default=3)
    p_eval.add_argument("--no-dedup", action="store_true")
    p_eval.add_argument("--csv")
    p_eval.add_argument("--json")
    leaves.append(p_eval)
    p_eval.set_defaults(func=cmd_evaluate, required_args=("corpus", "model"))

    p_sweep = sub.add_parser("sweep", help="sweep the deletion threshold")
    p_sweep.add_argument("--corpus")
    p_sweep.add_argument("--model")
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--tau-grid", default="0:1:0.1")
    p_sweep.add_argument("--k", type=int, default=3)
    p_sweep.add_argument("--no-dedup", action="store_true")
    leaves.append(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep, required_args=("corpus", "model", "out"))

    p_stats = sub.add_parser("stats", help="option statistics per node type")
    p_stats.add_argument("--corpus")
    p_stats.add_argument("--out")
    p_stats.add_argument("--oracles")
    p_stats.add_argument("--summaries")
    leaves.append(p_stats)
    p_stats.set_defaults(func=cmd_stats, required_args=("corpus", "out"))

    p_grad = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p_grad.add_argument("--corpus")
    p_grad.add_argument("--oracles")
    p_grad.add_argument("--samples", type=int, default=3)
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--hidden", type=int, default=32)
    leaves.append(p_grad)
    p_grad.set_defaults(func=cmd_gradcheck, required_args=("corpus", "oracles"))

    return parser, leaves


def main(argv=None) -> int:
    conf_parser = argparse.ArgumentParser(add_help=False)
    conf_parser.add_argument("--config")
    known, _ = conf_parser.parse_known_args(argv)
    parser, leaves = build_parser()
    if known.config:
        try:
            defaults = json.loads(Path(known.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": f"cannot read config {known.config}: {exc}"}),
                  file=sys.stderr)
            return 2
        # subcommands parse into a fresh namespace, so defaults must land on
        # every leaf parser; explicit flags still override them
        for leaf in leaves:
            leaf.set_defaults(**defaults)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    missing = [name for name in getattr(args, "required_args", ())
               if getattr(args, name, None) is None]
    if missing:
        flags = ", ".join(f"--{name}" for name in missing)
        print(json.dumps({"error": f"missing required arguments: {flags}",
                          "command": args.command}), file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except Exception as exc:  # surfaces a structured error and a nonzero exit
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
