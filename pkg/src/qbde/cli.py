"""Command line front end: ``qbde prepare|train|evaluate|compare|make-corpus``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import metrics
from .corpus import make_corpus, write_corpus_csv
from .data import records_csv_rows
from .errors import (
    ConfigurationError, DivergenceError, IngestionError, OptimizationError, ParseError, RecordError,
)
from .pipeline import compare, evaluate, fit_model, load_config, prepare, resolve_config, table_header, table_row
from .serialize import MODEL_KINDS, atomic_write_text, dumps, load_pipeline, save_pipeline

log = logging.getLogger("qbde")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


def _config(args) -> dict:
    user = load_config(args.config) if args.config else {}
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return resolve_config(user, **overrides)


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_resolved(out: str, cfg: dict) -> None:
    atomic_write_text(os.path.join(out, "resolved_config.json"), dumps(cfg))


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _report_doc(ev) -> dict:
    return {"model": ev.kind, "metrics": ev.report.to_dict(),
            "binned_profile": [vars(b) for b in ev.profile], "abs_error_boxplot": ev.boxplot}


def _write_evaluation(out: str, ev, cfg) -> None:
    atomic_write_text(os.path.join(out, f"report-{ev.kind}.json"), dumps(_report_doc(ev)))
    path = os.path.join(out, f"samples-{ev.kind}.csv")
    tmp = path + ".part"
    metrics.write_per_sample_csv(tmp, ev.actual, ev.predictions, cfg["report.bin_edges"])
    os.replace(tmp, path)


def cmd_prepare(args) -> int:
    cfg = _config(args)
    out = _outdir(args)
    _write_resolved(out, cfg)
    prep = prepare(cfg)
    records = prep.train.records + prep.test.records
    labels = ["train"] * len(prep.train) + ["test"] * len(prep.test)
    atomic_write_text(os.path.join(out, "dataset.csv"), _csv_text(records_csv_rows(records, labels)))
    atomic_write_text(os.path.join(out, "manifest.json"), dumps(prep.manifest))
    m = prep.manifest
    print(f"kept {m['kept']} rejected {m['rejected']} of {m['rows']} rows; "
          f"sampled {m['sample_size']} ({m['n_train']} train / {m['n_test']} test)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    if not args.model:
        raise ConfigurationError("train needs --model")
    if args.model not in MODEL_KINDS:
        raise ConfigurationError(f"unknown model kind {args.model!r}; choose from {list(MODEL_KINDS)}")
    out = _outdir(args)
    _write_resolved(out, cfg)
    prep = prepare(cfg)
    pipe = fit_model(args.model, prep.train, cfg)
    save_pipeline(os.path.join(out, f"model-{args.model}.json"), pipe)
    atomic_write_text(os.path.join(out, f"train-{args.model}.log.json"), dumps(pipe.meta))
    print(f"trained {args.model} on {len(prep.train)} samples -> model-{args.model}.json")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    if not args.model:
        raise ConfigurationError("evaluate needs --model (a kind or a model file)")
    out = _outdir(args)
    path = args.model if os.path.isfile(args.model) else os.path.join(out, f"model-{args.model}.json")
    if not os.path.isfile(path):
        raise IngestionError(f"model file not found: {path}")
    _write_resolved(out, cfg)
    pipe = load_pipeline(path)
    prep = prepare(cfg)
    ev = evaluate(pipe, prep.test, cfg)
    _write_evaluation(out, ev, cfg)
    r = ev.report
    print(f"{pipe.kind}: mae {r.mae:.3f} rmse {r.rmse:.3f} r2 {r.r2:.3f} on {r.n} test bonds")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    if args.models:
        cfg = resolve_config(cfg, models=[m.strip() for m in args.models.split(",") if m.strip()])
    out = _outdir(args)
    _write_resolved(out, cfg)
    _, results = compare(cfg, jobs=args.jobs)
    rows = [table_header(cfg)]
    profiles = {}
    for pipe, ev in results:
        rows.append(table_row(ev))
        _write_evaluation(out, ev, cfg)
        save_pipeline(os.path.join(out, f"model-{ev.kind}.json"), pipe)
        profiles[ev.kind] = [vars(b) for b in ev.profile]
    table = _csv_text(rows)
    atomic_write_text(os.path.join(out, "comparison.csv"), table)
    atomic_write_text(os.path.join(out, "profiles.json"), dumps(profiles))
    sys.stdout.write(table)
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    out = _outdir(args)
    records = make_corpus(seed=args.seed or 0)
    path = os.path.join(out, "corpus.csv")
    write_corpus_csv(path + ".part", records)
    os.replace(path + ".part", path)
    print(f"wrote {len(records)} bonds to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbde", description="Quantum vs classical BDE regression benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "prepare": (cmd_prepare, "ingest, filter, sample and split the dataset"),
        "train": (cmd_train, "train one model"),
        "evaluate": (cmd_evaluate, "evaluate a trained model on the test split"),
        "compare": (cmd_compare, "train and evaluate every selected model"),
        "make-corpus": (cmd_make_corpus, "write the synthetic reference corpus as CSV"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", default="qbde-out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        if name != "make-corpus":
            p.add_argument("--config", help="JSON config file")
        if name in ("train", "evaluate"):
            p.add_argument("--model", help="model kind" + (" or model file" if name == "evaluate" else ""))
        if name == "compare":
            p.add_argument("--model", "--models", dest="models",
                           help="comma-separated subset of model kinds")
            p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IngestionError, RecordError, ParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OptimizationError, DivergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
