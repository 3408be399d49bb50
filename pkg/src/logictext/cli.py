"""Command-line workflows over the library.

Subcommands: validate, score, eval, stats, bucket, sample-fewshot,
selftrain, convert.  Usage errors exit 2 (argparse), data errors exit 1
with file/line diagnostics.  Machine-readable output via --format records
(one JSON object per line).
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from . import corpus_io
from .content_consistency import ConsistencyConfig, content_score
from .corpus_io import InputConfig
from .eval_metrics import corpus_eval, format_metric_report
from .logic_ast import LogicParseError, UnknownFunction, classify_logic_type, parse_logical_form
from .self_training import SelfTrainConfig, run_self_training
from .structure_rules import DEFAULT_KAPPA, default_schema, load_schema, structure_verdict
from .taggers import (
    LOGIC2TEXT,
    TEXT2LOGIC,
    ExternalBackend,
    ProtocolClient,
    ReplayBackend,
    TemplateBackend,
)

DEFAULTS = {"k": 1000, "kappa": DEFAULT_KAPPA, "beta": 1.0}


class DataError(Exception):
    """File-level problem: reported and mapped to exit code 1."""


def _read_lines(path: str) -> list[str]:
    p = Path(path)
    if not p.exists():
        raise DataError(f"{path}: no such file")
    return p.read_text(encoding="utf-8").splitlines()


def _emit(records: list[dict], text_lines: list[str], fmt: str) -> None:
    if fmt == "records":
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _schema_from(path: str | None):
    return load_schema(path) if path else default_schema()


def cmd_validate(args) -> int:
    schema = _schema_from(args.schema)
    records = []
    lines = []
    failures = 0
    for lineno, raw in enumerate(_read_lines(args.logic_file), start=1):
        if not raw.strip():
            continue
        verdict = structure_verdict(raw, schema, args.kappa)
        if not verdict.overall_pass:
            failures += 1
        records.append({"line": lineno, **verdict.flags()})
        lines.append(
            f"line {lineno}: {'PASS' if verdict.overall_pass else 'FAIL'} "
            f"rule1={int(verdict.rule1_pass)} rule2={int(verdict.rule2_pass)} "
            f"rule3_avg={verdict.rule3_avg:.4f}"
        )
    checked = len(records)
    lines.append(f"checked {checked} forms, {checked - failures} passed, {failures} failed")
    _emit(records, lines, args.format)
    return 1 if failures else 0


def cmd_score(args) -> int:
    originals = [l for l in _read_lines(args.original) if l.strip()]
    recovered = [l for l in _read_lines(args.recovered) if l.strip()]
    if len(originals) != len(recovered):
        raise DataError(
            f"line count mismatch: {args.original} has {len(originals)}, "
            f"{args.recovered} has {len(recovered)}"
        )
    if not originals:
        raise DataError(f"{args.original}: no lines to score")
    cfg = ConsistencyConfig(beta=args.beta)
    scores = [content_score(u, up, cfg) for u, up in zip(originals, recovered)]
    records = [{"line": i + 1, "content_score": s} for i, s in enumerate(scores)]
    lines = [f"line {i + 1}: {s:.4f}" for i, s in enumerate(scores)]
    lines.append(f"scored {len(scores)} pairs, mean {sum(scores) / len(scores):.4f} (beta={args.beta})")
    _emit(records, lines, args.format)
    return 0


def cmd_eval(args) -> int:
    candidates = [l for l in _read_lines(args.candidates) if l.strip()]
    references = [l for l in _read_lines(args.references) if l.strip()]
    if len(candidates) != len(references):
        raise DataError("candidate and reference files must have the same number of lines")
    if not candidates:
        raise DataError(f"{args.candidates}: no lines to evaluate")
    groups = None
    if args.group_by_logic:
        schema = _schema_from(args.schema)
        forms = [l for l in _read_lines(args.group_by_logic) if l.strip()]
        if len(forms) != len(candidates):
            raise DataError("--group-by-logic file must parallel the candidates")
        groups = []
        for form in forms:
            try:
                groups.append(classify_logic_type(parse_logical_form(form), schema).value)
            except (LogicParseError, UnknownFunction):
                groups.append("unknown")
    report = corpus_eval(list(zip(candidates, references)), groups)
    if args.format == "records":
        rows = [{"group": "overall", **report.overall.as_dict()}]
        rows += [{"group": g, **s.as_dict()} for g, s in report.groups.items()]
        _emit(rows, [], "records")
    else:
        print(format_metric_report(report))
    return 0


def _load_pairs(path: str):
    try:
        pairs, stats = corpus_io.load_dataset(path)
    except (FileNotFoundError, corpus_io.FormatError) as e:
        raise DataError(str(e))
    for lineno, msg in stats.errors:
        print(f"{path}:{lineno}: skipped: {msg}", file=sys.stderr)
    return pairs


def cmd_stats(args) -> int:
    pairs = _load_pairs(args.dataset)
    stats = corpus_io.dataset_stats(pairs)
    if args.format == "records":
        _emit([stats.as_dict()], [], "records")
    else:
        print(corpus_io.format_stats(stats))
    return 0


def cmd_bucket(args) -> int:
    pairs = _load_pairs(args.dataset)
    try:
        easy_max, middle_max = (int(x) for x in args.thresholds.split(","))
    except ValueError:
        raise DataError(f"bad --thresholds {args.thresholds!r}, expected e.g. 1,2")
    buckets = corpus_io.bucket_by_depth(pairs, (easy_max, middle_max))
    for pair_id, msg in buckets.parse_errors:
        print(f"{pair_id}: unparseable logic, bucketed hard: {msg}", file=sys.stderr)
    if args.format == "records":
        rows = [
            {"bucket": name, "count": len(group), "ids": [p.id for p in group]}
            for name, group in (("easy", buckets.easy), ("middle", buckets.middle), ("hard", buckets.hard))
        ]
        _emit(rows, [], "records")
    else:
        for name, group in (("easy", buckets.easy), ("middle", buckets.middle), ("hard", buckets.hard)):
            print(f"{name}: {len(group)}")
            for p in group:
                print(f"  {p.id}")
    return 0


def cmd_sample_fewshot(args) -> int:
    pairs = _load_pairs(args.dataset)
    try:
        train, pool = corpus_io.sample_few_shot(pairs, args.n, args.seed)
    except corpus_io.SampleTooLarge as e:
        raise DataError(str(e))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus_io.save_pairs(train, out / "train.jsonl")
    corpus_io.save_pool(pool, out / "pool.jsonl")
    print(f"wrote {len(train)} train pairs and {len(pool)} pool items to {out}")
    return 0


def _make_backends(spec: str, schema, warmup_pairs, input_cfg: InputConfig):
    if spec == "replay":
        t2l, l2t = ReplayBackend(TEXT2LOGIC), ReplayBackend(LOGIC2TEXT)
    elif spec == "template":
        t2l, l2t = TemplateBackend(TEXT2LOGIC, schema), TemplateBackend(LOGIC2TEXT, schema)
    elif spec.startswith("external:"):
        client = ProtocolClient(shlex.split(spec[len("external:"):]))
        t2l, l2t = ExternalBackend(TEXT2LOGIC, client), ExternalBackend(LOGIC2TEXT, client)
    else:
        raise DataError(f"unknown backend {spec!r}")
    if warmup_pairs:
        from .self_training import _l2t_pairs, _t2l_pairs

        if t2l.trainable:
            t2l.train(_t2l_pairs(warmup_pairs, input_cfg))
        if l2t.trainable:
            l2t.train(_l2t_pairs(warmup_pairs, input_cfg))
    return t2l, l2t


def cmd_selftrain(args) -> int:
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"{args.config}: {e}")

    def effective(flag_value, name, default):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(name, default)

    schema = _schema_from(args.schema)
    train_pairs = _load_pairs(args.train)
    try:
        pool_items, pool_stats = corpus_io.load_pool(args.pool)
    except (FileNotFoundError, corpus_io.FormatError) as e:
        raise DataError(str(e))
    for lineno, msg in pool_stats.errors:
        print(f"{args.pool}:{lineno}: skipped: {msg}", file=sys.stderr)

    config = SelfTrainConfig(
        k=effective(args.k, "k", DEFAULTS["k"]),
        kappa=effective(args.kappa, "kappa", DEFAULTS["kappa"]),
        beta=effective(args.beta, "beta", DEFAULTS["beta"]),
        max_iterations=effective(args.max_iterations, "max_iterations", None),
        shuffle_seed=effective(args.seed, "seed", 0),
        jobs=effective(args.jobs, "jobs", 1),
        check_invariants=args.verify_invariants,
    )

    warmup_pairs = _load_pairs(args.warmup) if args.warmup else None
    t2l, l2t = _make_backends(args.backend, schema, warmup_pairs, config.input_cfg)
    try:
        result = run_self_training(
            train_pairs,
            pool_items,
            t2l,
            l2t,
            config=config,
            checkpoint_dir=args.checkpoint,
            schema=schema,
            resume=args.resume,
        )
    finally:
        if args.backend.startswith("external:"):
            t2l.client.close()

    report = result.report
    for row in report["iterations"]:
        print(
            f"iteration {row['iteration']}: pool={row['pool_size']} "
            f"qualified={row['qualified']} selected={row['selected']}"
        )
    print(
        f"stopped: {report['stop_reason']} "
        f"(train={report['final_train_size']}, pool={report['final_pool_size']})"
    )
    return 0


def cmd_convert(args) -> int:
    try:
        n = corpus_io.convert_source_file(args.source, args.out)
    except (FileNotFoundError, corpus_io.FormatError, json.JSONDecodeError, KeyError) as e:
        raise DataError(f"{args.source}: {e}")
    print(f"wrote {n} records to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logictext", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=["text", "records"], default="text")

    p = sub.add_parser("validate", help="structure-consistency verdicts for a file of logical forms")
    p.add_argument("logic_file")
    p.add_argument("--schema")
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    add_format(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="content-consistency scores for aligned text files")
    p.add_argument("--original", required=True)
    p.add_argument("--recovered", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    add_format(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="BLEU-1 / ROUGE-1/2/L over aligned candidate and reference files")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--group-by-logic", dest="group_by_logic")
    p.add_argument("--schema")
    add_format(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="corpus statistics for a dataset file")
    p.add_argument("dataset")
    add_format(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bucket", help="partition a dataset by logic-tree depth")
    p.add_argument("dataset")
    p.add_argument("--thresholds", default="1,2", help="easy_max,middle_max")
    add_format(p)
    p.set_defaults(func=cmd_bucket)

    p = sub.add_parser("sample-fewshot", help="split a dataset into a seed train set and unlabeled pool")
    p.add_argument("dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_fewshot)

    p = sub.add_parser("selftrain", help="run the self-training loop")
    p.add_argument("--train", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--backend", default="replay", help="replay | template | external:<cmd>")
    p.add_argument("--k", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--schema")
    p.add_argument("--warmup", help="pairs file used to pre-train the backends before the loop")
    p.add_argument("--verify-invariants", action="store_true")
    p.set_defaults(func=cmd_selftrain)

    p = sub.add_parser("convert", help="convert a published-layout corpus file to the native JSONL format")
    p.add_argument("source")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
