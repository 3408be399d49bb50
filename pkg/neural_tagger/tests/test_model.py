import torch

from copytagger.leaf_tokens import source_segment, tree_tokens
from copytagger.model import Seq2SeqCopyModel

PAIRS = [
    ("eq { hop { all_rows ; nation } ; canada }", "the nation listed is canada ."),
    ("most_eq { all_rows ; gold ; 3 }", "most rows list 3 gold medals ."),
]


def test_tree_tokens_extraction():
    assert tree_tokens("eq { hop { all_rows ; name } ; canada }") == {
        "eq", "hop", "all_rows", "name", "canada",
    }
    assert tree_tokens("count { a } <sep> caption : x . header : y .") == {"count", "a"}
    assert source_segment("left <sep> right") == "left"
    assert source_segment("no separator here") == "no separator here"


def test_decode_before_training_is_safe():
    model = Seq2SeqCopyModel(seed=0)
    out = model.decode("anything at all")
    assert isinstance(out, str)
    assert model.decode("") == ""


def test_training_reduces_loss_and_memorizes():
    model = Seq2SeqCopyModel(seed=0)
    model.ingest([s for pair in PAIRS for s in pair])
    with torch.no_grad():
        before = sum(float(model.sequence_loss(s, t)) for s, t in PAIRS)
    summary = model.train_pairs(PAIRS, max_epochs=300)
    with torch.no_grad():
        after = sum(float(model.sequence_loss(s, t)) for s, t in PAIRS)
    assert after < before
    assert summary.stopped_by in ("exact_match", "max_epochs", "patience")
    for src, tgt in PAIRS:
        assert model.decode(src) == tgt


def test_determinism_across_runs():
    outs = []
    for _ in range(2):
        model = Seq2SeqCopyModel(seed=7)
        model.train_pairs(PAIRS, max_epochs=50)
        outs.append([model.decode(src) for src, _ in PAIRS])
    assert outs[0] == outs[1]


def test_decode_deterministic_for_fixed_weights():
    model = Seq2SeqCopyModel(seed=3)
    model.train_pairs(PAIRS, max_epochs=30)
    assert model.decode(PAIRS[0][0]) == model.decode(PAIRS[0][0])


def test_vocab_growth_across_train_calls():
    model = Seq2SeqCopyModel(seed=1)
    model.train_pairs(PAIRS[:1], max_epochs=30)
    size_before = len(model.vocab)
    model.train_pairs([("brand new tokens here", "fresh output words")], max_epochs=30)
    assert len(model.vocab) > size_before
    out = model.decode("brand new tokens here")
    assert isinstance(out, str)


def test_total_loss_gate_gradients_match_finite_differences():
    # the invariant: d(total loss)/d(gate params) via autograd equals the
    # central-difference oracle at eps=1e-5 within 1e-4 relative
    model = Seq2SeqCopyModel(seed=5, dim=8, hidden=10, lam=0.7)
    src, tgt = PAIRS[0]
    model.ingest([src, tgt])

    loss = model.sequence_loss(src, tgt)
    loss.backward()

    eps = 1e-5
    for tensor in model.gate_parameters():
        analytic = tensor.grad.clone()
        flat = tensor.data.view(-1)
        for i in range(flat.numel()):
            orig = float(flat[i])
            with torch.no_grad():
                flat[i] = orig + eps
                up = float(model.sequence_loss(src, tgt))
                flat[i] = orig - eps
                down = float(model.sequence_loss(src, tgt))
                flat[i] = orig
            numeric = (up - down) / (2 * eps)
            a = float(analytic.view(-1)[i])
            scale = max(abs(a), abs(numeric))
            if scale > 1e-6:
                assert abs(a - numeric) / scale <= 1e-4, (a, numeric)
            else:
                assert abs(a - numeric) <= 1e-8


def test_penalty_increases_loss_when_gates_low():
    # same data, lambda on vs off; with fresh weights gates sit near 0.5
    with_pen = Seq2SeqCopyModel(seed=9, lam=1.0)
    without = Seq2SeqCopyModel(seed=9, lam=0.0)
    src, tgt = PAIRS[0]
    for m in (with_pen, without):
        m.ingest([src, tgt])
    with torch.no_grad():
        assert float(with_pen.sequence_loss(src, tgt)) > float(without.sequence_loss(src, tgt))
