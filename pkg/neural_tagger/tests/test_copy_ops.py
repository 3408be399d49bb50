import math
import random

import pytest
import torch

from copytagger.copy_ops import (
    CopyGateParams,
    DecoderStep,
    ShapeMismatch,
    UnnormalizedInput,
    attention_context,
    copy_gate,
    copy_loss,
    mix_output_distribution,
)


def make_step(gen, context_dim=4, state_dim=3, input_dim=5, n=6):
    a = torch.softmax(torch.randn(n, generator=gen, dtype=torch.float64), dim=0)
    return DecoderStep(
        x_t=torch.randn(input_dim, generator=gen, dtype=torch.float64),
        s_t=torch.randn(state_dim, generator=gen, dtype=torch.float64),
        c_t=torch.randn(context_dim, generator=gen, dtype=torch.float64),
        a_t=a,
    )


def test_gate_zero_inputs_is_half():
    step = DecoderStep(
        x_t=torch.zeros(2, dtype=torch.float64),
        s_t=torch.zeros(3, dtype=torch.float64),
        c_t=torch.zeros(4, dtype=torch.float64),
        a_t=torch.tensor([0.5, 0.5], dtype=torch.float64),
    )
    params = CopyGateParams(
        w_c=torch.zeros(4, dtype=torch.float64),
        w_s=torch.zeros(3, dtype=torch.float64),
        w_x=torch.zeros(2, dtype=torch.float64),
        b=torch.zeros((), dtype=torch.float64),
    )
    assert float(copy_gate(step, params)) == 0.5


def test_gate_saturates_with_large_bias():
    gen = torch.Generator().manual_seed(0)
    step = make_step(gen)
    params = CopyGateParams.init(4, 3, 5, generator=gen)
    params.b = torch.tensor(30.0, dtype=torch.float64)
    gate = float(copy_gate(step, params))
    assert gate > 1.0 - 1e-9
    assert gate < 1.0  # sigmoid never reaches 1 in exact arithmetic


def test_gate_strictly_inside_unit_interval():
    gen = torch.Generator().manual_seed(1)
    for _ in range(50):
        gate = float(copy_gate(make_step(gen), CopyGateParams.init(4, 3, 5, generator=gen)))
        assert 0.0 < gate < 1.0


def test_gate_shape_mismatch():
    gen = torch.Generator().manual_seed(2)
    step = make_step(gen, context_dim=4)
    params = CopyGateParams.init(5, 3, 5, generator=gen)  # wrong context dim
    with pytest.raises(ShapeMismatch):
        copy_gate(step, params)


def test_decoder_step_rejects_bad_attention():
    x = torch.zeros(2, dtype=torch.float64)
    with pytest.raises(UnnormalizedInput):
        DecoderStep(x_t=x, s_t=x, c_t=x, a_t=torch.tensor([0.7, 0.7], dtype=torch.float64))
    with pytest.raises(UnnormalizedInput):
        DecoderStep(x_t=x, s_t=x, c_t=x, a_t=torch.tensor([1.5, -0.5], dtype=torch.float64))


def test_attention_context():
    h = torch.tensor([[1.0, 0.0], [0.0, 1.0]], dtype=torch.float64)
    a = torch.tensor([0.25, 0.75], dtype=torch.float64)
    assert torch.allclose(attention_context(a, h), torch.tensor([0.25, 0.75], dtype=torch.float64))
    with pytest.raises(ShapeMismatch):
        attention_context(torch.tensor([1.0], dtype=torch.float64), h)


def fd_gradient(f, tensor, eps=1e-5):
    """Central-difference oracle, one entry at a time."""
    grad = torch.zeros_like(tensor)
    flat = tensor.view(-1)
    gflat = grad.view(-1)
    for i in range(flat.numel()):
        orig = float(flat[i])
        with torch.no_grad():
            flat[i] = orig + eps
            up = float(f())
            flat[i] = orig - eps
            down = float(f())
            flat[i] = orig
        gflat[i] = (up - down) / (2 * eps)
    return grad


def assert_grads_close(analytic, numeric, rel=1e-4, abs_floor=1e-8):
    for a, n in zip(analytic.view(-1), numeric.view(-1)):
        a, n = float(a), float(n)
        scale = max(abs(a), abs(n))
        if scale > 1e-6:
            assert abs(a - n) / scale <= rel, (a, n)
        else:
            assert abs(a - n) <= abs_floor, (a, n)


def test_gate_gradient_matches_finite_differences():
    gen = torch.Generator().manual_seed(3)
    step = make_step(gen)
    params = CopyGateParams.init(4, 3, 5, generator=gen)
    for t in params.tensors():
        t.requires_grad_()
    gate = copy_gate(step, params)
    gate.backward()
    for t in params.tensors():
        numeric = fd_gradient(lambda: copy_gate(step, params), t.data)
        assert_grads_close(t.grad, numeric)


def test_copy_loss_lambda_zero_identity():
    assert copy_loss(1.75, [(0, 0.3), (1, 0.9)], {"a", "b"}, ["a", "b"], 0.0) == 1.75


def test_copy_loss_all_gates_one():
    loss = copy_loss(1.5, [(0, 1.0), (1, 1.0)], {"a", "b"}, ["a", "b"], 2.0)
    assert loss == 1.5


def test_copy_loss_hand_case():
    loss = copy_loss(2.0, [(0, 0.8), (1, 0.6)], {"x", "y"}, ["x", "y"], 0.5)
    assert loss == 2.3


def test_copy_loss_skips_non_tree_positions():
    # only position 0 carries a tree token
    loss = copy_loss(1.0, [(0, 0.5), (1, 0.5)], {"x"}, ["x", "q"], 1.0)
    assert loss == 1.5


def test_copy_loss_penalty_nonnegative():
    rng = random.Random(4)
    for _ in range(100):
        targets = [rng.choice("abcd") for _ in range(6)]
        gates = [(j, rng.random()) for j in range(6)]
        lam = rng.random() * 3
        base = rng.random()
        assert copy_loss(base, gates, {"a", "b"}, targets, lam) >= base - 1e-12


def test_copy_loss_rejects_negative_lambda():
    with pytest.raises(ValueError):
        copy_loss(1.0, [], set(), [], -0.1)


def test_mix_gate_extremes():
    copy_d = {"a": 0.5, "b": 0.5}
    vocab_d = {"b": 0.25, "c": 0.75}
    assert mix_output_distribution(1.0, copy_d, vocab_d) == {"a": 0.5, "b": 0.5, "c": 0.0}
    assert mix_output_distribution(0.0, copy_d, vocab_d) == {"a": 0.0, "b": 0.25, "c": 0.75}


def test_mix_halves_on_disjoint_supports():
    out = mix_output_distribution(0.5, {"a": 1.0}, {"b": 1.0})
    assert out == {"a": 0.5, "b": 0.5}


def test_mix_normalized_and_nonnegative():
    rng = random.Random(5)
    for _ in range(100):
        ks = ["a", "b", "c", "d"]
        raw1 = [rng.random() + 1e-3 for _ in ks]
        raw2 = [rng.random() + 1e-3 for _ in ks[1:]]
        copy_d = {k: v / sum(raw1) for k, v in zip(ks, raw1)}
        vocab_d = {k: v / sum(raw2) for k, v in zip(ks[1:], raw2)}
        out = mix_output_distribution(rng.random(), copy_d, vocab_d)
        assert abs(sum(out.values()) - 1.0) <= 1e-6
        assert all(v >= 0 for v in out.values())


def test_mix_rejects_unnormalized():
    with pytest.raises(UnnormalizedInput):
        mix_output_distribution(0.5, {"a": 0.9}, {"b": 1.0})
    with pytest.raises(UnnormalizedInput):
        mix_output_distribution(0.5, {"a": 1.0}, {"b": 1.2})
    with pytest.raises(ValueError):
        mix_output_distribution(1.5, {"a": 1.0}, {"b": 1.0})
