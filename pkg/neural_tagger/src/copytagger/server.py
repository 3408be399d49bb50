"""Line-protocol worker serving one model per direction.

Messages are one JSON object per line on stdin, replies one per line on
stdout:

    {"op":"train","direction":"text2logic","pairs":[{"in":..,"out":..}]}
    {"op":"tag","direction":"logic2text","inputs":[...]}
    {"op":"reset"}
    {"op":"shutdown"}

Replies are {"ok":true,...} or {"ok":false,"error":...}; the loop never
exits silently on a bad message.
"""

from __future__ import annotations

import argparse
import json
import sys

from .model import Seq2SeqCopyModel

DIRECTIONS = ("text2logic", "logic2text")


class Service:
    def __init__(self, args):
        self.args = args
        self.models: dict[str, Seq2SeqCopyModel] = {}
        self.reset()

    def reset(self):
        for i, direction in enumerate(DIRECTIONS):
            self.models[direction] = Seq2SeqCopyModel(
                dim=self.args.dim,
                hidden=self.args.hidden,
                lam=self.args.lam,
                seed=self.args.seed + i,
                max_decode_len=self.args.max_decode_len,
                lr=self.args.lr,
            )

    def _model(self, message) -> Seq2SeqCopyModel:
        direction = message.get("direction")
        if direction not in DIRECTIONS:
            raise ValueError(f"bad direction {direction!r}")
        return self.models[direction]

    def handle(self, message: dict) -> dict:
        op = message.get("op")
        if op == "train":
            pairs = [(p["in"], p["out"]) for p in message.get("pairs", [])]
            if not pairs:
                raise ValueError("empty training set")
            summary = self._model(message).train_pairs(
                pairs, max_epochs=self.args.max_epochs, patience=self.args.patience
            )
            return {"ok": True, "loss": summary.loss}
        if op == "tag":
            model = self._model(message)
            inputs = message.get("inputs")
            if not isinstance(inputs, list):
                raise ValueError("inputs must be a list")
            return {"ok": True, "outputs": [model.decode(s) for s in inputs]}
        if op == "reset":
            self.reset()
            return {"ok": True}
        raise ValueError(f"unknown op {op!r}")


def serve(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    service = Service(args)

    def reply(payload: dict) -> None:
        stdout.write(json.dumps(payload, ensure_ascii=False) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError as e:
            reply({"ok": False, "error": f"bad json: {e}"})
            continue
        if message.get("op") == "shutdown":
            reply({"ok": True})
            return 0
        try:
            reply(service.handle(message))
        except Exception as e:  # keep serving after any handler error
            reply({"ok": False, "error": str(e)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copytagger", description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=24)
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--lam", type=float, default=1.0)
    parser.add_argument("--lr", type=float, default=5e-3)
    parser.add_argument("--max-epochs", type=int, default=500)
    parser.add_argument("--patience", type=int, default=4)
    parser.add_argument("--max-decode-len", type=int, default=48)
    return parser


def main(argv=None) -> int:
    return serve(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
