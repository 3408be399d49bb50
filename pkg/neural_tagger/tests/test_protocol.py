"""Wire-protocol conformance, driven through the orchestrator's client."""

import json
import subprocess
import sys

import pytest

from logictext.taggers import (
    LOGIC2TEXT,
    TEXT2LOGIC,
    BackendFailure,
    ExternalBackend,
    ProtocolClient,
)

WORKER = [sys.executable, "-m", "copytagger", "--seed", "0", "--max-epochs", "120"]

PAIRS = [
    ("the nation listed is canada .", "eq { hop { all_rows ; nation } ; canada }"),
    ("most rows list 3 gold medals .", "most_eq { all_rows ; gold ; 3 }"),
]


@pytest.fixture()
def client():
    c = ProtocolClient(WORKER)
    yield c
    c.close()


def test_train_and_tag_round_trip(client):
    t2l = ExternalBackend(TEXT2LOGIC, client)
    report = t2l.train(PAIRS)
    assert report.pair_count == 2
    assert report.loss >= 0.0
    outputs = t2l.tag([src for src, _ in PAIRS])
    assert outputs == [tgt for _, tgt in PAIRS]


def test_directions_are_independent(client):
    t2l = ExternalBackend(TEXT2LOGIC, client)
    l2t = ExternalBackend(LOGIC2TEXT, client)
    t2l.train(PAIRS)
    l2t.train([(tgt, src) for src, tgt in PAIRS])
    assert t2l.tag([PAIRS[0][0]]) == [PAIRS[0][1]]
    assert l2t.tag([PAIRS[0][1]]) == [PAIRS[0][0]]


def test_tag_before_train_produces_outputs(client):
    t2l = ExternalBackend(TEXT2LOGIC, client)
    outputs = t2l.tag(["totally unseen words", "more of them"])
    assert len(outputs) == 2
    assert all(isinstance(o, str) for o in outputs)


def test_reset_restores_seeded_initialization(client):
    t2l = ExternalBackend(TEXT2LOGIC, client)
    probe = ["the nation listed is canada ."]
    fresh = t2l.tag(probe)
    t2l.train(PAIRS)
    assert t2l.tag(probe) != fresh  # training moved the weights
    client.reset()
    assert t2l.tag(probe) == fresh  # back to the seeded initial weights


def test_empty_training_set_is_an_error_reply(client):
    with pytest.raises(BackendFailure):
        client.request({"op": "train", "direction": "text2logic", "pairs": []})
    # the worker keeps serving afterwards
    assert client.request({"op": "reset"})["ok"]


def test_unknown_op_and_bad_direction_error_framing(client):
    with pytest.raises(BackendFailure):
        client.request({"op": "frobnicate"})
    with pytest.raises(BackendFailure):
        client.request({"op": "tag", "direction": "sideways", "inputs": ["x"]})
    assert client.request({"op": "reset"})["ok"]


def test_shutdown_exits_cleanly():
    client = ProtocolClient(WORKER)
    client.shutdown()
    assert client.proc.returncode == 0


def test_raw_bad_json_gets_error_reply():
    proc = subprocess.Popen(
        WORKER, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True
    )
    try:
        proc.stdin.write("this is not json\n")
        proc.stdin.flush()
        reply = json.loads(proc.stdout.readline())
        assert reply["ok"] is False and "json" in reply["error"]
        proc.stdin.write(json.dumps({"op": "shutdown"}) + "\n")
        proc.stdin.flush()
        assert json.loads(proc.stdout.readline())["ok"] is True
        assert proc.wait(timeout=10) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
