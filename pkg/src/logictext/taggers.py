"""Pluggable sequence transducers for the two pipeline directions.

A backend maps input strings to output strings in one direction
(text2logic or logic2text).  Built-in backends are deterministic desk
stand-ins for neural taggers; the external backend drives a child
process speaking a line-delimited JSON protocol, one message per line:

    -> {"op":"train","direction":"text2logic","pairs":[{"in":..,"out":..}]}
    <- {"ok":true,"loss":0.12}
    -> {"op":"tag","direction":"text2logic","inputs":["..."]}
    <- {"ok":true,"outputs":["..."]}
    -> {"op":"reset"} / {"op":"shutdown"}
    <- {"ok":true}

Errors come back as {"ok":false,"error":"..."}.
"""

from __future__ import annotations

import json
import subprocess
import threading
from dataclasses import dataclass, field

from .structure_rules import FunctionSchema, default_schema

__all__ = [
    "TEXT2LOGIC",
    "LOGIC2TEXT",
    "NotTrainable",
    "EmptyTrainingSet",
    "BackendFailure",
    "TrainReport",
    "TagBatch",
    "TaggerBackend",
    "ReplayBackend",
    "IdentityBackend",
    "TemplateBackend",
    "ProtocolClient",
    "ExternalBackend",
]

TEXT2LOGIC = "text2logic"
LOGIC2TEXT = "logic2text"
_DIRECTIONS = (TEXT2LOGIC, LOGIC2TEXT)


class NotTrainable(RuntimeError):
    pass


class EmptyTrainingSet(ValueError):
    pass


class BackendFailure(RuntimeError):
    """External backend failed; carries any captured diagnostics."""

    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message if not diagnostics else f"{message}\n{diagnostics}")
        self.diagnostics = diagnostics


@dataclass
class TrainReport:
    pair_count: int
    loss: float


@dataclass(frozen=True)
class TagBatch:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if len(self.inputs) != len(self.outputs):
            raise ValueError("inputs and outputs must correspond positionally")


class TaggerBackend:
    """Base backend: one direction, train() then tag()."""

    direction: str
    trainable: bool = False
    deterministic: bool = True

    def __init__(self, direction: str):
        if direction not in _DIRECTIONS:
            raise ValueError(f"bad direction: {direction!r}")
        self.direction = direction

    def train(self, pairs: list[tuple[str, str]]) -> TrainReport:
        raise NotTrainable(f"{type(self).__name__} does not train")

    def tag(self, inputs: list[str]) -> list[str]:
        raise NotImplementedError

    def tag_batch(self, inputs: list[str]) -> TagBatch:
        return TagBatch(inputs=tuple(inputs), outputs=tuple(self.tag(inputs)))


class ReplayBackend(TaggerBackend):
    """Memorizes training pairs exactly; unseen inputs tag to the empty
    string.  Later training calls update the stored mapping in place."""

    trainable = True

    def __init__(self, direction: str):
        super().__init__(direction)
        self.mapping: dict[str, str] = {}

    def train(self, pairs: list[tuple[str, str]]) -> TrainReport:
        if not pairs:
            raise EmptyTrainingSet("no training pairs")
        self.mapping.update(pairs)
        return TrainReport(pair_count=len(pairs), loss=0.0)

    def tag(self, inputs: list[str]) -> list[str]:
        return [self.mapping.get(x, "") for x in inputs]


class IdentityBackend(TaggerBackend):
    """Echoes its inputs unchanged."""

    def tag(self, inputs: list[str]) -> list[str]:
        return list(inputs)


def _before_separator(s: str, separator: str = "<sep>") -> str:
    head, sep, _ = s.partition(f" {separator} ")
    return head if sep else s


class TemplateBackend(TaggerBackend):
    """Fixed-template stand-in.

    text2logic emits a schema-conformant form whose leaves copy the most
    salient input tokens (longest first, ties by position); logic2text
    joins the leaf tokens of the input form.  Accepts train() as a no-op
    so it can sit in the training loop, but learns nothing.
    """

    def __init__(self, direction: str, schema: FunctionSchema | None = None, root: str = "count"):
        super().__init__(direction)
        self.schema = schema or default_schema()
        if root not in self.schema:
            raise ValueError(f"template root {root!r} not in schema")
        self.root = root
        self.arity = self.schema.arity(root)

    def train(self, pairs: list[tuple[str, str]]) -> TrainReport:
        if not pairs:
            raise EmptyTrainingSet("no training pairs")
        return TrainReport(pair_count=len(pairs), loss=0.0)

    def tag(self, inputs: list[str]) -> list[str]:
        if self.direction == TEXT2LOGIC:
            return [self._to_logic(x) for x in inputs]
        return [self._to_text(x) for x in inputs]

    def _to_logic(self, s: str) -> str:
        words = [w for w in _before_separator(s).split() if not set(w) & set("{};")]
        if not words:
            words = ["all_rows"]
        ranked = sorted(range(len(words)), key=lambda i: (-len(words[i]), i))
        leaves = [words[i] for i in sorted(ranked[: self.arity])]
        while len(leaves) < self.arity:
            leaves.append("all_rows")
        return f"{self.root} {{ {' ; '.join(leaves)} }}"

    def _to_text(self, s: str) -> str:
        from .logic_ast import LogicParseError, parse_logical_form

        try:
            tree = parse_logical_form(_before_separator(s))
        except LogicParseError:
            return ""
        words = []
        stack = [tree]
        while stack:
            node = stack.pop()
            if node.is_function:
                stack.extend(reversed(node.children))
            else:
                words.extend(node.text.split())
        return " ".join(words)


class ProtocolClient:
    """Owns a child process speaking the line protocol; thread-safe, one
    request in flight at a time."""

    def __init__(self, cmd: list[str]):
        self.cmd = list(cmd)
        self._lock = threading.Lock()
        try:
            self.proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as e:
            raise BackendFailure(f"cannot launch backend {self.cmd!r}: {e}")

    def _diagnostics(self) -> str:
        try:
            if self.proc.poll() is not None and self.proc.stderr is not None:
                return self.proc.stderr.read() or ""
        except Exception:
            pass
        return ""

    def request(self, message: dict) -> dict:
        with self._lock:
            try:
                self.proc.stdin.write(json.dumps(message, ensure_ascii=False) + "\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                raise BackendFailure(f"backend pipe closed: {e}", self._diagnostics())
            line = self.proc.stdout.readline()
        if not line:
            raise BackendFailure("backend exited before replying", self._diagnostics())
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise BackendFailure(f"malformed backend reply: {line!r}")
        if not reply.get("ok"):
            raise BackendFailure(f"backend error: {reply.get('error', 'unknown')}")
        return reply

    def reset(self) -> None:
        self.request({"op": "reset"})

    def shutdown(self) -> None:
        try:
            self.request({"op": "shutdown"})
        except BackendFailure:
            pass
        try:
            self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()

    def close(self) -> None:
        if self.proc.poll() is None:
            self.shutdown()


class ExternalBackend(TaggerBackend):
    """Backend facade over a ProtocolClient; several facades (one per
    direction) may share a client/process."""

    trainable = True
    deterministic = False

    def __init__(self, direction: str, client: ProtocolClient):
        super().__init__(direction)
        self.client = client

    def train(self, pairs: list[tuple[str, str]]) -> TrainReport:
        if not pairs:
            raise EmptyTrainingSet("no training pairs")
        reply = self.client.request(
            {
                "op": "train",
                "direction": self.direction,
                "pairs": [{"in": i, "out": o} for i, o in pairs],
            }
        )
        return TrainReport(pair_count=len(pairs), loss=float(reply.get("loss", 0.0)))

    def tag(self, inputs: list[str]) -> list[str]:
        if not inputs:
            return []
        reply = self.client.request(
            {"op": "tag", "direction": self.direction, "inputs": list(inputs)}
        )
        outputs = reply.get("outputs")
        if not isinstance(outputs, list) or len(outputs) != len(inputs):
            raise BackendFailure("backend returned mismatched outputs")
        return [str(o) for o in outputs]
