"""Minimal line-protocol worker used by the tagger tests.

Memorizes train pairs per direction and replays them on tag; unknown
inputs tag to "". A tag input of "CRASH" makes the process exit without
replying, to exercise failure handling in the client.
"""

import json
import sys


def main():
    mappings = {"text2logic": {}, "logic2text": {}}
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            print(json.dumps({"ok": False, "error": "bad json"}), flush=True)
            continue
        op = msg.get("op")
        if op == "shutdown":
            print(json.dumps({"ok": True}), flush=True)
            return 0
        if op == "reset":
            mappings = {"text2logic": {}, "logic2text": {}}
            print(json.dumps({"ok": True}), flush=True)
        elif op == "train":
            direction = msg.get("direction")
            if direction not in mappings:
                print(json.dumps({"ok": False, "error": f"bad direction {direction!r}"}), flush=True)
                continue
            for pair in msg.get("pairs", []):
                mappings[direction][pair["in"]] = pair["out"]
            print(json.dumps({"ok": True, "loss": 0.0}), flush=True)
        elif op == "tag":
            direction = msg.get("direction")
            inputs = msg.get("inputs", [])
            if "CRASH" in inputs:
                sys.stderr.write("worker crashing on purpose\n")
                sys.stderr.flush()
                return 3
            outputs = [mappings.get(direction, {}).get(x, "") for x in inputs]
            print(json.dumps({"ok": True, "outputs": outputs}), flush=True)
        else:
            print(json.dumps({"ok": False, "error": f"unknown op {op!r}"}), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
