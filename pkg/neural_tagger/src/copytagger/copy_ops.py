"""The copy mechanism: gate, auxiliary loss, and output mixture.

At each decoding step a soft gate decides between copying a source token
(attention weights as the copy distribution) and generating from the
vocabulary softmax:

    p_copy = sigmoid(W_c c_t + W_s s_t + W_x x_t + b)

The gate is pushed toward copying wherever the target token appears in
the source logic tree, through an auxiliary term added to the
cross-entropy loss:

    L = L_c + lambda * sum_{w_j in V} (1 - p_copy_j)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import torch

__all__ = [
    "ShapeMismatch",
    "UnnormalizedInput",
    "CopyGateParams",
    "DecoderStep",
    "attention_context",
    "copy_gate",
    "copy_loss",
    "mix_output_distribution",
]


class ShapeMismatch(ValueError):
    pass


class UnnormalizedInput(ValueError):
    pass


@dataclass
class CopyGateParams:
    """Gate weights; each W maps its input vector to a single scalar."""

    w_c: torch.Tensor  # (context_dim,)
    w_s: torch.Tensor  # (state_dim,)
    w_x: torch.Tensor  # (input_dim,)
    b: torch.Tensor  # scalar

    @classmethod
    def init(cls, context_dim: int, state_dim: int, input_dim: int,
             generator: torch.Generator | None = None, scale: float = 0.1) -> "CopyGateParams":
        def rand(n):
            return torch.randn(n, generator=generator, dtype=torch.float64) * scale

        return cls(w_c=rand(context_dim), w_s=rand(state_dim), w_x=rand(input_dim),
                   b=torch.zeros((), dtype=torch.float64))

    def tensors(self) -> list[torch.Tensor]:
        return [self.w_c, self.w_s, self.w_x, self.b]


@dataclass
class DecoderStep:
    """Everything the gate sees at one decoding step."""

    x_t: torch.Tensor  # decoder input embedding (input_dim,)
    s_t: torch.Tensor  # decoder state (state_dim,)
    c_t: torch.Tensor  # attention context (context_dim,)
    a_t: torch.Tensor  # attention weights over source positions (n,)

    def __post_init__(self):
        weights = self.a_t.detach()
        if (weights < -1e-9).any():
            raise UnnormalizedInput("attention weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > 1e-6:
            raise UnnormalizedInput(f"attention weights sum to {total}, not 1")


def attention_context(a_t: torch.Tensor, encoder_states: torch.Tensor) -> torch.Tensor:
    """c_t = sum_i a_t[i] * h_i for encoder states h of shape (n, dim)."""
    if a_t.shape[0] != encoder_states.shape[0]:
        raise ShapeMismatch("one attention weight per encoder state")
    return a_t @ encoder_states


def copy_gate(step: DecoderStep, params: CopyGateParams) -> torch.Tensor:
    """Sigmoid of the affine combination of context, state and input;
    a scalar strictly inside (0, 1)."""
    if params.w_c.shape != step.c_t.shape:
        raise ShapeMismatch(f"w_c {tuple(params.w_c.shape)} vs c_t {tuple(step.c_t.shape)}")
    if params.w_s.shape != step.s_t.shape:
        raise ShapeMismatch(f"w_s {tuple(params.w_s.shape)} vs s_t {tuple(step.s_t.shape)}")
    if params.w_x.shape != step.x_t.shape:
        raise ShapeMismatch(f"w_x {tuple(params.w_x.shape)} vs x_t {tuple(step.x_t.shape)}")
    pre = params.w_c @ step.c_t + params.w_s @ step.s_t + params.w_x @ step.x_t + params.b
    return torch.sigmoid(pre)


def copy_loss(
    base_loss: float | torch.Tensor,
    gates: Iterable[tuple[int, float | torch.Tensor]],
    tree_tokens: set[str],
    targets: list[str],
    lam: float,
) -> float | torch.Tensor:
    """base_loss plus lambda times the summed (1 - gate) at positions
    whose target token belongs to the source logic-tree token set."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    penalty = 0.0
    for position, gate in gates:
        if targets[position] in tree_tokens:
            penalty = penalty + (1.0 - gate)
    return base_loss + lam * penalty


def mix_output_distribution(
    gate: float,
    copy_dist: dict[str, float],
    vocab_dist: dict[str, float],
    tol: float = 1e-6,
) -> dict[str, float]:
    """gate * copy + (1 - gate) * vocab over the union support."""
    if not 0.0 <= gate <= 1.0:
        raise ValueError(f"gate must lie in [0, 1], got {gate}")
    for name, dist in (("copy", copy_dist), ("vocab", vocab_dist)):
        total = sum(dist.values())
        if abs(total - 1.0) > tol or any(p < -tol for p in dist.values()):
            raise UnnormalizedInput(f"{name} distribution sums to {total}")
    out: dict[str, float] = {}
    for token, p in copy_dist.items():
        out[token] = out.get(token, 0.0) + gate * p
    for token, p in vocab_dist.items():
        out[token] = out.get(token, 0.0) + (1.0 - gate) * p
    return out
