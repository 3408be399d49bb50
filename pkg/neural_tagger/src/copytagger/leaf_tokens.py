"""Logic-tree token extraction, kept local so the worker has no
dependency on the orchestrator package.

The tree tokens of a linearized form are its function names plus all
leaf words, i.e. every whitespace token that is not brace/semicolon
punctuation.  Model inputs carry a table segment after a separator
token; only the part before the separator contributes.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[{};]|[^{};\s]+")
SEPARATOR = "<sep>"


def source_segment(s: str, separator: str = SEPARATOR) -> str:
    head, sep, _ = s.partition(f" {separator} ")
    return head if sep else s


def tree_tokens(s: str, separator: str = SEPARATOR) -> set[str]:
    segment = source_segment(s, separator)
    return {m.group() for m in _TOKEN_RE.finditer(segment) if m.group() not in "{};"}
