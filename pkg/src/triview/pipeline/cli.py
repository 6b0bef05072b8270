"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..augment import AugmentationConfig, make_views
from ..classifier import SingleClassPool
from ..contrastive import DegenerateBatch
from ..dfg import build_dfg
from ..equiangle import DegenerateGradient, ZeroVectorInput, solve_batch
from ..frontend import LexError, ParseError, parse_source
from .config import ConfigError, RunConfig, apply_overrides, config_keys, load_config
from .dataset import DataError, DatasetRecord, ingest_directory, load_dataset, save_dataset
from .model import DimMismatch, ModelFile
from .run import embed_records, evaluate_records, predict_records, pretrain_model, train_model
from .synth import generate_records

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("triview")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    group = p.add_argument_group("config overrides (one flag per config key)")
    for key in config_keys():
        group.add_argument(f"--{key}", dest=f"cfg:{key}", metavar="VALUE")


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg:") and v is not None}
    return apply_overrides(cfg, overrides)


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# -- commands -------------------------------------------------------------------


def cmd_pretrain(args) -> int:
    cfg = _config(args)
    records = load_dataset(args.corpus)
    model, result = pretrain_model(records, cfg)
    model.save(args.out)
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "loss", "pos_sim_mean", "neg_sim_mean"])
            for step, loss, pos, neg in result.trace:
                w.writerow([step, repr(loss), repr(pos), repr(neg)])
    print(f"pretrained on {result.used} contracts, skipped {result.skipped} unparseable")
    if result.trace:
        print(f"loss {result.trace[0][1]:.6f} -> {result.trace[-1][1]:.6f}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    model = ModelFile.load(args.model)
    labeled = load_dataset(args.labeled)
    unlabeled = load_dataset(args.unlabeled) if args.unlabeled else None
    outcome = train_model(model, labeled, unlabeled, cfg, supervised_only=args.supervised_only)
    outcome.model.save(args.out or args.model)
    print(
        f"labeled {outcome.n_labeled}, unlabeled {outcome.n_unlabeled}, "
        f"self-training iterations {outcome.selftrain.iterations}"
    )
    for name, rep in (("validation", outcome.validation_report), ("test", outcome.test_report)):
        if rep is not None:
            print(f"{name}: " + json.dumps(rep, sort_keys=True))
    if args.report and outcome.test_report is not None:
        _write_text(args.report, json.dumps(outcome.test_report, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = ModelFile.load(args.model)
    if args.config or any(k.startswith("cfg:encoder.") and v is not None for k, v in vars(args).items()):
        model.check_config(_config(args).encoder)
    records = load_dataset(args.data)
    rows = predict_records(model, records)
    lines = ["idx,label,probability\n"] + [f"{idx},{label},{prob:.6f}\n" for idx, label, prob in rows]
    _write_text(args.out, "".join(lines))
    rep = evaluate_records(rows, records)
    if rep is not None:
        text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
        if args.report:
            _write_text(args.report, text)
        else:
            sys.stderr.write(text)
    return EXIT_OK


def cmd_export_embeddings(args) -> int:
    model = ModelFile.load(args.model)
    records = load_dataset(args.data)
    Z = embed_records(records, model)
    header = "idx," + ",".join(f"e{j}" for j in range(Z.shape[1])) + "\n"
    rows = [f"{rec.idx}," + ",".join(repr(float(v)) for v in z) + "\n" for rec, z in zip(records, Z)]
    _write_text(args.out, header + "".join(rows))
    return EXIT_OK


def _read_source(path) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def cmd_augment(args) -> int:
    cfg = AugmentationConfig(seed=args.seed, fixed_k=args.k)
    views = make_views(_read_source(args.source), cfg)
    chosen = ["strong", "medium", "weak"] if args.view == "all" else [args.view]
    for name in chosen:
        if len(chosen) > 1:
            print(f"// ---- {name} view ----")
        sys.stdout.write(getattr(views, name)[0])
    return EXIT_OK


def cmd_dfg(args) -> int:
    graph = build_dfg(parse_source(_read_source(args.source)))
    if args.nodes:
        for n in graph.nodes:
            print(f"{n.ordinal}\t{n.kind}\t{n.name}")
    sys.stdout.write(graph.to_text())
    return EXIT_OK


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.replace(",", " ").split()])
    except ValueError:
        raise UsageError(f"not a vector of numbers: {text!r}") from None


def cmd_sim(args) -> int:
    a, b, c = (_vector(t) for t in (args.a, args.b, args.c))
    if not a.shape == b.shape == c.shape:
        raise UsageError("the three vectors must have the same length")
    v, cos, flags, signs = solve_batch(a[None], b[None], c[None], args.length)
    print(f"cosine {float(cos[0])!r}")
    print("v " + ",".join(repr(float(x)) for x in v[0]))
    print(f"rank {flags[0]}")
    return EXIT_OK


def cmd_synth(args) -> int:
    records = [
        DatasetRecord(r["idx"], r["source"], None if args.unlabeled else r["label"])
        for r in generate_records(args.n, args.seed, args.ponzi_fraction)
    ]
    save_dataset(records, args.out)
    return EXIT_OK


def cmd_ingest(args) -> int:
    save_dataset(ingest_directory(args.directory, args.labels), args.out)
    return EXIT_OK


def cmd_config(args) -> int:
    sys.stdout.write(_config(args).to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triview", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pretrain", help="fit the encoder head on an unlabeled corpus")
    p.add_argument("corpus", help="JSONL dataset (labels ignored) or bundled:NAME")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--trace", help="CSV loss trace path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="self-train the classifier over frozen embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--labeled", required=True, help="labeled JSONL dataset (split train/test/validation)")
    p.add_argument("--unlabeled", help="extra unlabeled JSONL dataset")
    p.add_argument("--out", help="model file to write (default: overwrite --model)")
    p.add_argument("--report", help="write the test-split metrics report here")
    p.add_argument("--supervised-only", action="store_true", help="ignore all unlabeled data")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify contracts")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-", help="predictions CSV (default stdout)")
    p.add_argument("--report", help="metrics report path (when records are labeled)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export-embeddings", help="write idx and embedding vector rows")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export_embeddings)

    p = sub.add_parser("augment", help="print augmented views of a source file")
    p.add_argument("source", help="Solidity file or - for stdin")
    p.add_argument("--view", choices=["strong", "medium", "weak", "all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=4, help="sub-variables per split variable")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("dfg", help="print the data-flow graph of a source file")
    p.add_argument("source")
    p.add_argument("--nodes", action="store_true", help="also list nodes")
    p.set_defaults(func=cmd_dfg)

    p = sub.add_parser("sim", help="equiangular similarity of three vectors")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("c")
    p.add_argument("--length", type=float, default=1.0, help="norm of the intermediate vector")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ponzi-fraction", type=float, default=0.5)
    p.add_argument("--unlabeled", action="store_true", help="omit labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="convert a directory of .sol files plus a label CSV")
    p.add_argument("directory")
    p.add_argument("--labels", help="CSV with idx,label columns")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("config", help="print the effective configuration")
    _add_config_flags(p)
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"triview: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"triview: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateBatch, DegenerateGradient, ZeroVectorInput, FloatingPointError) as exc:
        print(f"triview: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DimMismatch as exc:
        print(f"triview: DimMismatch: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, SingleClassPool, ParseError, LexError, OSError, ValueError) as exc:
        print(f"triview: data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
