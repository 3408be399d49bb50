"""Structure-consistency rules for generated logical forms.

Rule 1: braces balanced and properly nested (checked on the raw string so
unparseable generations can still be scored).
Rule 2: every function used must belong to the default function set.
Rule 3: per function node, 1 if its child count matches the declared arity
else 0, averaged over all function nodes in BFS order; holds when the
average is at least kappa.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .logic_ast import (
    LogicNode,
    LogicParseError,
    LogicType,
    UnknownFunction,
    bfs_function_nodes,
    parse_logical_form,
)

__all__ = [
    "DEFAULT_KAPPA",
    "SchemaEntry",
    "FunctionSchema",
    "StructureVerdict",
    "load_schema",
    "default_schema",
    "check_rule1",
    "check_rule2",
    "check_rule3",
    "structure_verdict",
]

DEFAULT_KAPPA = 0.5


@dataclass(frozen=True)
class SchemaEntry:
    arity: int
    category: LogicType


@dataclass(frozen=True)
class FunctionSchema:
    """The default function set: name -> (expected arity, category)."""

    entries: dict[str, SchemaEntry]

    def __post_init__(self):
        for name, entry in self.entries.items():
            if entry.arity < 1:
                raise ValueError(f"arity must be >= 1 for {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def arity(self, name: str) -> int:
        try:
            return self.entries[name].arity
        except KeyError:
            raise UnknownFunction(name) from None

    @classmethod
    def from_mapping(cls, mapping: dict) -> "FunctionSchema":
        entries = {}
        for name, spec in mapping.items():
            entries[name] = SchemaEntry(
                arity=int(spec["arity"]), category=LogicType(spec["category"])
            )
        return cls(entries=entries)


def load_schema(path: str | Path) -> FunctionSchema:
    """Load a schema file: JSON object mapping name -> {arity, category}."""
    with open(path, encoding="utf-8") as f:
        return FunctionSchema.from_mapping(json.load(f))


def default_schema() -> FunctionSchema:
    """The schema shipped with the package (see data/default_schema.json)."""
    text = resources.files("logictext").joinpath("data/default_schema.json").read_text("utf-8")
    return FunctionSchema.from_mapping(json.loads(text))


@dataclass(frozen=True)
class StructureVerdict:
    rule1_pass: bool
    rule2_pass: bool
    rule3_avg: float
    rule3_pass: bool
    overall_pass: bool
    kappa: float

    def __post_init__(self):
        assert self.overall_pass == (self.rule1_pass and self.rule2_pass and self.rule3_pass)
        assert self.rule3_pass == (self.rule3_avg >= self.kappa)
        assert 0.0 <= self.rule3_avg <= 1.0

    def flags(self) -> dict:
        return {
            "rule1": self.rule1_pass,
            "rule2": self.rule2_pass,
            "rule3_avg": self.rule3_avg,
            "rule3": self.rule3_pass,
            "overall": self.overall_pass,
        }


def check_rule1(raw: str) -> bool:
    """True iff '{' and '}' occurrences are balanced and properly nested."""
    depth = 0
    for c in raw:
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def check_rule2(n: LogicNode, schema: FunctionSchema) -> bool:
    """True iff every function name in the tree is a schema key."""
    return all(name in schema for name, _ in bfs_function_nodes(n))


def check_rule3(n: LogicNode, schema: FunctionSchema, kappa: float = DEFAULT_KAPPA) -> tuple[float, bool]:
    """Average per-node parameter consistency in BFS order.

    Each function node scores 1 when its child count equals the schema
    arity, else 0.  Raises UnknownFunction for names the schema does not
    know; gate on check_rule2 first.
    """
    scores = []
    for name, arity in bfs_function_nodes(n):
        scores.append(1.0 if arity == schema.arity(name) else 0.0)
    avg = sum(scores) / len(scores)
    return avg, avg >= kappa


def _verdict(r1: bool, r2: bool, avg: float, kappa: float) -> StructureVerdict:
    r3 = avg >= kappa
    return StructureVerdict(
        rule1_pass=r1,
        rule2_pass=r2,
        rule3_avg=avg,
        rule3_pass=r3,
        overall_pass=r1 and r2 and r3,
        kappa=kappa,
    )


def structure_verdict(raw: str, schema: FunctionSchema, kappa: float = DEFAULT_KAPPA) -> StructureVerdict:
    """Run Rules 1-3 on a raw generation; total over arbitrary strings.

    Rule 1 runs on the raw text.  When it passes and the form parses,
    Rules 2 and 3 run on the tree; any parse failure fails the verdict
    while preserving the Rule 1 result.
    """
    r1 = check_rule1(raw)
    if not r1:
        return _verdict(False, False, 0.0, kappa)
    try:
        tree = parse_logical_form(raw)
    except LogicParseError:
        return _verdict(r1, False, 0.0, kappa)
    r2 = check_rule2(tree, schema)
    if not r2:
        return _verdict(r1, False, 0.0, kappa)
    avg, _ = check_rule3(tree, schema, kappa)
    return _verdict(r1, r2, avg, kappa)
