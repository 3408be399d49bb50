"""Tree representation of linearized logical forms.

A logical form is written as nested function applications with braces as
layer dividers and semicolons between arguments::

    eq { hop { all_rows ; name } ; canada }

Function names and leaf words are whitespace tokens; the characters
``{ } ;`` are reserved and always act as standalone punctuation.  Leaves
may span several words ("gold medals") and are normalized to single
internal spaces.
"""

from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

__all__ = [
    "RESERVED_CHARS",
    "LogicNode",
    "LogicType",
    "LogicParseError",
    "UnbalancedBraces",
    "EmptyArgument",
    "TrailingInput",
    "EmptyFunctionName",
    "UnknownFunction",
    "func_node",
    "leaf",
    "parse_logical_form",
    "linearize",
    "tree_depth",
    "node_counts",
    "bfs_function_nodes",
    "collect_leaf_tokens",
    "classify_logic_type",
]

RESERVED_CHARS = frozenset("{};")

FUNCTION = "function"
LEAF = "leaf"


class LogicType(Enum):
    """The seven root-operation categories a logical form can fall into."""

    COUNT = "count"
    SUPERLATIVE = "superlative"
    COMPARATIVE = "comparative"
    AGGREGATION = "aggregation"
    MAJORITY = "majority"
    UNIQUE = "unique"
    ORDINAL = "ordinal"


class LogicParseError(ValueError):
    """Malformed logical form; ``offset`` is the character position of the
    first violation (end of string when input ends too early)."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnbalancedBraces(LogicParseError):
    pass


class EmptyArgument(LogicParseError):
    pass


class TrailingInput(LogicParseError):
    pass


class EmptyFunctionName(LogicParseError):
    pass


class UnknownFunction(LookupError):
    """Function name not present in the schema."""

    def __init__(self, name: str):
        super().__init__(f"unknown function: {name!r}")
        self.name = name


@dataclass(frozen=True)
class LogicNode:
    """One node of a logic tree.

    Either a function node (``name`` plus one or more ``children``) or a
    leaf carrying a trimmed, non-empty ``text`` free of reserved characters.
    Instances are immutable and compare structurally.
    """

    kind: str
    name: str = ""
    children: tuple["LogicNode", ...] = ()
    text: str = ""

    def __post_init__(self):
        if self.kind == FUNCTION:
            if not self.name:
                raise ValueError("function node needs a name")
            if any(c in RESERVED_CHARS or c.isspace() for c in self.name):
                raise ValueError(f"bad function name: {self.name!r}")
            if len(self.children) < 1:
                raise ValueError("function node needs at least one child")
            if self.text:
                raise ValueError("function node carries no text")
        elif self.kind == LEAF:
            if self.children:
                raise ValueError("leaf node has no children")
            if not self.text or self.text != " ".join(self.text.split()):
                raise ValueError(f"leaf text must be trimmed and non-empty: {self.text!r}")
            if any(c in RESERVED_CHARS for c in self.text):
                raise ValueError(f"leaf text contains reserved character: {self.text!r}")
        else:
            raise ValueError(f"bad node kind: {self.kind!r}")

    @property
    def is_function(self) -> bool:
        return self.kind == FUNCTION


def func_node(name: str, *children: LogicNode) -> LogicNode:
    return LogicNode(kind=FUNCTION, name=name, children=tuple(children))


def leaf(text: str) -> LogicNode:
    return LogicNode(kind=LEAF, text=" ".join(text.split()))


@dataclass(frozen=True)
class _Token:
    value: str
    offset: int


_TOKEN_RE = re.compile(r"[{};]|[^{};\s]+")


def _lex(s: str) -> list[_Token]:
    return [_Token(m.group(), m.start()) for m in _TOKEN_RE.finditer(s)]


class _Parser:
    def __init__(self, s: str):
        self.tokens = _lex(s)
        self.pos = 0
        self.end = len(s)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_form(self) -> LogicNode:
        tok = self.peek()
        if tok is None:
            raise EmptyFunctionName("expected function name", self.end)
        if tok.value in RESERVED_CHARS:
            raise EmptyFunctionName("expected function name", tok.offset)
        name = self.advance()
        opener = self.peek()
        if opener is None:
            raise UnbalancedBraces("expected '{' after function name", self.end)
        if opener.value != "{":
            raise UnbalancedBraces("expected '{' after function name", opener.offset)
        self.advance()
        children = [self.parse_arg()]
        while True:
            tok = self.peek()
            if tok is None:
                raise UnbalancedBraces("missing '}'", self.end)
            if tok.value == ";":
                self.advance()
                children.append(self.parse_arg())
            elif tok.value == "}":
                self.advance()
                return func_node(name.value, *children)
            else:
                # a word or '{' right after a completed argument
                raise UnbalancedBraces("expected ';' or '}'", tok.offset)

    def parse_arg(self) -> LogicNode:
        tok = self.peek()
        if tok is None:
            raise UnbalancedBraces("missing '}'", self.end)
        if tok.value in ("}", ";"):
            raise EmptyArgument("empty argument", tok.offset)
        if tok.value == "{":
            raise EmptyFunctionName("expected function name", tok.offset)
        # one word so far: function application if '{' follows, else a leaf run
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        if nxt is not None and nxt.value == "{":
            return self.parse_form()
        words = [self.advance().value]
        while True:
            tok = self.peek()
            if tok is None or tok.value in ("}", ";"):
                return leaf(" ".join(words))
            if tok.value == "{":
                raise UnbalancedBraces("unexpected '{' inside argument", tok.offset)
            words.append(self.advance().value)


def parse_logical_form(s: str) -> LogicNode:
    """Parse a linearized logical form into its unique tree.

    Raises UnbalancedBraces, EmptyArgument, TrailingInput or
    EmptyFunctionName on the first violation encountered.
    """
    parser = _Parser(s)
    root = parser.parse_form()
    trailing = parser.peek()
    if trailing is not None:
        raise TrailingInput("input continues after logical form", trailing.offset)
    return root


def linearize(n: LogicNode) -> str:
    """Serialize a tree back to its canonical single-spaced string."""
    if n.kind == LEAF:
        return n.text
    inner = " ; ".join(linearize(c) for c in n.children)
    return f"{n.name} {{ {inner} }}"


def tree_depth(n: LogicNode) -> int:
    """Maximum nesting depth of function nodes (root function = 1)."""
    if n.kind == LEAF:
        return 0
    return 1 + max(tree_depth(c) for c in n.children)


def node_counts(n: LogicNode) -> tuple[int, int]:
    """(total nodes, function nodes) over the whole tree."""
    total = 0
    functions = 0
    for node in _walk(n):
        total += 1
        if node.kind == FUNCTION:
            functions += 1
    return total, functions


def _walk(n: LogicNode) -> Iterator[LogicNode]:
    yield n
    for c in n.children:
        yield from _walk(c)


def bfs_function_nodes(n: LogicNode) -> list[tuple[str, int]]:
    """Level-order (name, arity) pairs for every function node."""
    out = []
    queue = deque([n])
    while queue:
        node = queue.popleft()
        if node.kind == FUNCTION:
            out.append((node.name, len(node.children)))
            queue.extend(node.children)
    return out


def collect_leaf_tokens(n: LogicNode) -> Counter:
    """Multiset of all whitespace tokens of leaf texts plus function names."""
    tokens: Counter = Counter()
    for node in _walk(n):
        if node.kind == FUNCTION:
            tokens[node.name] += 1
        else:
            tokens.update(node.text.split())
    return tokens


def classify_logic_type(n: LogicNode, schema) -> LogicType:
    """Category of the root function per the schema mapping."""
    if n.kind != FUNCTION:
        raise ValueError("root must be a function node")
    entry = schema.entries.get(n.name)
    if entry is None:
        raise UnknownFunction(n.name)
    return entry.category
