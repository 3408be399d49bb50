"""Dataset ingestion, table linearization, few-shot splits and statistics.

The native dataset format is one JSON object per line (UTF-8) with the
fields {id, caption, headers, rows, logic, text}.  Unlabeled pools use the
same layout without the logic field.  A converter from the published
logic/table corpus layout is included (records carrying topic/sent/
logic_str/table_header/table_cont keys); it strips any trailing
"= true" / "= false" marker from the logical form.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .logic_ast import LogicParseError, linearize, node_counts, parse_logical_form, tree_depth

__all__ = [
    "SEPARATOR",
    "DEFAULT_DEPTH_THRESHOLDS",
    "FormatError",
    "SampleTooLarge",
    "TableContext",
    "ParallelPair",
    "UnlabeledItem",
    "LoadStats",
    "load_dataset",
    "load_pool",
    "save_pairs",
    "save_pool",
    "linearize_table",
    "InputConfig",
    "build_input_sequence",
    "sample_few_shot",
    "DepthBuckets",
    "bucket_by_depth",
    "calibrate_depth_thresholds",
    "CorpusStats",
    "dataset_stats",
    "format_stats",
    "convert_source_record",
    "convert_source_file",
]

SEPARATOR = "<sep>"

# easy: depth <= 1, middle: depth <= 2, hard: deeper
DEFAULT_DEPTH_THRESHOLDS = (1, 2)


class FormatError(ValueError):
    pass


class SampleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TableContext:
    caption: str
    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.headers):
                raise ValueError(
                    f"row length {len(row)} != header length {len(self.headers)}"
                )

    @classmethod
    def make(cls, caption: str, headers: Iterable[str], rows: Iterable[Iterable[str]] = ()) -> "TableContext":
        return cls(
            caption=str(caption),
            headers=tuple(str(h) for h in headers),
            rows=tuple(tuple(str(c) for c in row) for row in rows),
        )


@dataclass(frozen=True)
class ParallelPair:
    """One training instance: a logical form plus table context paired
    with its target text."""

    id: str
    logic: str
    table: TableContext
    text: str
    provenance: str = "gold"
    score: float | None = None

    def __post_init__(self):
        if self.provenance not in ("gold", "pseudo"):
            raise ValueError(f"bad provenance: {self.provenance!r}")
        if self.provenance == "gold" and self.score is not None:
            raise ValueError("gold pairs carry no score")


@dataclass(frozen=True)
class UnlabeledItem:
    id: str
    table: TableContext
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("unlabeled text must be non-empty")


@dataclass
class LoadStats:
    total_lines: int = 0
    loaded: int = 0
    skipped: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)


def _table_from_record(rec: dict) -> TableContext:
    return TableContext.make(
        caption=rec.get("caption", ""),
        headers=rec.get("headers", []),
        rows=rec.get("rows", []),
    )


def _pair_from_record(rec: dict) -> ParallelPair:
    return ParallelPair(
        id=str(rec["id"]),
        logic=str(rec["logic"]),
        table=_table_from_record(rec),
        text=str(rec["text"]),
        provenance=rec.get("provenance", "gold"),
        score=rec.get("score"),
    )


def _iter_records(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8") as f:
        lines = f.readlines()
    if not any(line.strip() for line in lines):
        raise FormatError(f"{path}: empty dataset file")
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            yield lineno, line


def load_dataset(path: str | Path) -> tuple[list[ParallelPair], LoadStats]:
    """Load parallel pairs from a JSONL file.

    Malformed records are reported with their line number and skipped;
    an unreadable or empty file raises instead.
    """
    pairs = []
    stats = LoadStats()
    for lineno, line in _iter_records(path):
        stats.total_lines += 1
        try:
            pairs.append(_pair_from_record(json.loads(line)))
            stats.loaded += 1
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            stats.skipped += 1
            stats.errors.append((lineno, str(e)))
    return pairs, stats


def load_pool(path: str | Path) -> tuple[list[UnlabeledItem], LoadStats]:
    """Load an unlabeled pool (same layout as pairs, no logic field)."""
    items = []
    stats = LoadStats()
    for lineno, line in _iter_records(path):
        stats.total_lines += 1
        try:
            rec = json.loads(line)
            items.append(
                UnlabeledItem(id=str(rec["id"]), table=_table_from_record(rec), text=str(rec["text"]))
            )
            stats.loaded += 1
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            stats.skipped += 1
            stats.errors.append((lineno, str(e)))
    return items, stats


def _pair_record(p: ParallelPair) -> dict:
    rec = {
        "id": p.id,
        "caption": p.table.caption,
        "headers": list(p.table.headers),
        "rows": [list(r) for r in p.table.rows],
        "logic": p.logic,
        "text": p.text,
    }
    if p.provenance != "gold":
        rec["provenance"] = p.provenance
        rec["score"] = p.score
    return rec


def save_pairs(pairs: Iterable[ParallelPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps(_pair_record(p), ensure_ascii=False, sort_keys=True) + "\n")


def save_pool(items: Iterable[UnlabeledItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for u in items:
            rec = {
                "id": u.id,
                "caption": u.table.caption,
                "headers": list(u.table.headers),
                "rows": [list(r) for r in u.table.rows],
                "text": u.text,
            }
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def linearize_table(t: TableContext, include_rows: bool = False) -> str:
    """Flatten a table to the frozen format
    ``caption : <c> . header : <h1> | <h2> ... . [row <k> : <v1> | ... .]``
    with single spaces and lowercase keywords."""
    tokens = ["caption", ":"] + t.caption.split() + ["."]
    tokens += ["header", ":"]
    for i, h in enumerate(t.headers):
        if i:
            tokens.append("|")
        tokens += h.split()
    tokens.append(".")
    if include_rows:
        for k, row in enumerate(t.rows, start=1):
            tokens += ["row", str(k), ":"]
            for i, cell in enumerate(row):
                if i:
                    tokens.append("|")
                tokens += cell.split()
            tokens.append(".")
    return " ".join(tokens)


@dataclass(frozen=True)
class InputConfig:
    separator: str = SEPARATOR
    include_rows: bool = False


def build_input_sequence(logic: str, table: TableContext, cfg: InputConfig = InputConfig()) -> str:
    """Model input: logical form, separator token, linearized table."""
    logic_part = " ".join(logic.split())
    return f"{logic_part} {cfg.separator} {linearize_table(table, cfg.include_rows)}"


def strip_to_unlabeled(pair: ParallelPair) -> UnlabeledItem:
    return UnlabeledItem(id=pair.id, table=pair.table, text=pair.text)


def sample_few_shot(
    pairs: list[ParallelPair], n: int, seed: int
) -> tuple[list[ParallelPair], list[UnlabeledItem]]:
    """Uniform sample of n pairs as the seed train set; every other pair
    is stripped of its logical form and returned as the unlabeled pool."""
    if n > len(pairs):
        raise SampleTooLarge(f"n={n} exceeds corpus size {len(pairs)}")
    rng = random.Random(seed)
    chosen = set(rng.sample(range(len(pairs)), n))
    train = [pairs[i] for i in sorted(chosen)]
    pool = [strip_to_unlabeled(pairs[i]) for i in range(len(pairs)) if i not in chosen]
    return train, pool


@dataclass
class DepthBuckets:
    easy: list[ParallelPair] = field(default_factory=list)
    middle: list[ParallelPair] = field(default_factory=list)
    hard: list[ParallelPair] = field(default_factory=list)
    parse_errors: list[tuple[str, str]] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {"easy": len(self.easy), "middle": len(self.middle), "hard": len(self.hard)}


def bucket_by_depth(
    pairs: Iterable[ParallelPair],
    thresholds: tuple[int, int] = DEFAULT_DEPTH_THRESHOLDS,
) -> DepthBuckets:
    """Partition pairs into easy/middle/hard by logic-tree depth.

    depth <= easy_max -> easy, <= middle_max -> middle, else hard.
    Unparseable forms are reported and bucketed as hard.
    """
    easy_max, middle_max = thresholds
    buckets = DepthBuckets()
    for p in pairs:
        try:
            depth = tree_depth(parse_logical_form(p.logic))
        except LogicParseError as e:
            buckets.parse_errors.append((p.id, str(e)))
            buckets.hard.append(p)
            continue
        if depth <= easy_max:
            buckets.easy.append(p)
        elif depth <= middle_max:
            buckets.middle.append(p)
        else:
            buckets.hard.append(p)
    return buckets


def calibrate_depth_thresholds(
    pairs: list[ParallelPair],
    target_counts: tuple[int, int, int],
    max_depth: int = 8,
) -> tuple[int, int]:
    """Sweep (easy_max, middle_max) pairs and return the thresholds whose
    bucket sizes deviate least (L1) from target (easy, middle, hard)."""
    best = DEFAULT_DEPTH_THRESHOLDS
    best_cost = None
    for easy_max in range(0, max_depth):
        for middle_max in range(easy_max + 1, max_depth + 1):
            counts = bucket_by_depth(pairs, (easy_max, middle_max)).counts()
            cost = (
                abs(counts["easy"] - target_counts[0])
                + abs(counts["middle"] - target_counts[1])
                + abs(counts["hard"] - target_counts[2])
            )
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best = (easy_max, middle_max)
    return best


@dataclass
class CorpusStats:
    examples: int = 0
    tables: int = 0
    vocabulary: int = 0
    avg_description_length: float = 0.0
    avg_nodes: float = 0.0
    avg_function_nodes: float = 0.0
    avg_linearized_length: float = 0.0
    parse_failures: int = 0

    def as_dict(self) -> dict:
        return {
            "examples": self.examples,
            "tables": self.tables,
            "vocabulary": self.vocabulary,
            "avg_description_length": self.avg_description_length,
            "avg_nodes": self.avg_nodes,
            "avg_function_nodes": self.avg_function_nodes,
            "avg_linearized_length": self.avg_linearized_length,
            "parse_failures": self.parse_failures,
        }


def dataset_stats(pairs: list[ParallelPair]) -> CorpusStats:
    """Corpus statistics: distinct tables, vocabulary of the lowercased
    description tokens, average description length, average total and
    function node counts, average linearized logical-form token length."""
    stats = CorpusStats(examples=len(pairs))
    if not pairs:
        return stats
    tables = set()
    vocab = set()
    desc_len = 0
    totals = 0
    functions = 0
    lin_len = 0
    parsed = 0
    for p in pairs:
        tables.add(p.table)
        tokens = p.text.lower().split()
        vocab.update(tokens)
        desc_len += len(tokens)
        try:
            tree = parse_logical_form(p.logic)
        except LogicParseError:
            stats.parse_failures += 1
            lin_len += len(p.logic.split())
            continue
        parsed += 1
        total, fn = node_counts(tree)
        totals += total
        functions += fn
        lin_len += len(linearize(tree).split())
    stats.tables = len(tables)
    stats.vocabulary = len(vocab)
    stats.avg_description_length = desc_len / len(pairs)
    stats.avg_linearized_length = lin_len / len(pairs)
    if parsed:
        stats.avg_nodes = totals / parsed
        stats.avg_function_nodes = functions / parsed
    return stats


def format_stats(stats: CorpusStats) -> str:
    rows = [
        ("Examples", f"{stats.examples}"),
        ("Tables", f"{stats.tables}"),
        ("Vocabulary", f"{stats.vocabulary}"),
        ("Avg. description length", f"{stats.avg_description_length:.2f}"),
        ("Avg. nodes in logical form", f"{stats.avg_nodes:.2f}"),
        ("Avg. function nodes in logical form", f"{stats.avg_function_nodes:.2f}"),
        ("Avg. linearized logical form length", f"{stats.avg_linearized_length:.2f}"),
        ("Unparseable logical forms", f"{stats.parse_failures}"),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _strip_truth_marker(logic_str: str) -> str:
    s = logic_str.strip()
    for marker in ("= true", "= false"):
        if s.endswith(marker):
            s = s[: -len(marker)].strip()
    return s


def convert_source_record(rec: dict, fallback_id: str | None = None) -> ParallelPair:
    """Convert one record of the published corpus layout to a ParallelPair.

    Expects topic/sent/logic_str plus table_header and table_cont; the id
    comes from url#nid when present, else a digest of the content.
    """
    logic = _strip_truth_marker(str(rec["logic_str"]))
    text = str(rec["sent"]).strip()
    table = TableContext.make(
        caption=rec.get("topic", ""),
        headers=rec.get("table_header", []),
        rows=rec.get("table_cont", []),
    )
    if "url" in rec and "nid" in rec:
        pair_id = f"{rec['url']}#{rec['nid']}"
    elif fallback_id is not None:
        pair_id = fallback_id
    else:
        pair_id = hashlib.sha1(f"{logic}\t{text}".encode()).hexdigest()[:16]
    return ParallelPair(id=pair_id, logic=logic, table=table, text=text)


def convert_source_file(src: str | Path, dst: str | Path) -> int:
    """Convert a published-layout corpus file (JSON array or JSONL) to the
    native JSONL format; returns the number of records written."""
    src = Path(src)
    raw = src.read_text(encoding="utf-8").strip()
    if not raw:
        raise FormatError(f"{src}: empty source file")
    if raw.startswith("["):
        records = json.loads(raw)
    else:
        records = [json.loads(line) for line in raw.splitlines() if line.strip()]
    pairs = [
        convert_source_record(rec, fallback_id=f"{src.stem}-{i}")
        for i, rec in enumerate(records)
    ]
    save_pairs(pairs, dst)
    return len(pairs)
