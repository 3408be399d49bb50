"""A deliberately small encoder-decoder with attention and a copy gate.

Word-level vocabulary grown from the training pairs, positionwise
encoder over token+position embeddings, an Elman decoder with dot
attention, and at every step a gated mixture of copying a source token
(attention weights) and generating from the vocabulary softmax.  The
gate is regularized toward copying at target positions whose token
appears among the source logic-tree tokens.

Everything runs in float64 on CPU from a seeded initializer, so
training and greedy decoding are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch

from .copy_ops import CopyGateParams, DecoderStep, attention_context, copy_gate, copy_loss
from .leaf_tokens import tree_tokens

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

DTYPE = torch.float64


class Vocab:
    def __init__(self):
        self.tokens: list[str] = [BOS, EOS, UNK]
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def grow(self, tokens) -> int:
        """Add unseen tokens; returns how many were added."""
        added = 0
        for tok in tokens:
            if tok not in self.index:
                self.index[tok] = len(self.tokens)
                self.tokens.append(tok)
                added += 1
        return added

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.index[UNK]
        return [self.index.get(t, unk) for t in tokens]


@dataclass
class TrainSummary:
    epochs: int
    loss: float
    stopped_by: str  # exact_match | patience | max_epochs


class Seq2SeqCopyModel:
    def __init__(
        self,
        dim: int = 24,
        hidden: int = 32,
        lam: float = 1.0,
        seed: int = 0,
        max_positions: int = 128,
        max_decode_len: int = 48,
        lr: float = 5e-3,
    ):
        self.dim = dim
        self.hidden = hidden
        self.lam = lam
        self.seed = seed
        self.max_positions = max_positions
        self.max_decode_len = max_decode_len
        self.lr = lr
        self.vocab = Vocab()
        self.gen = torch.Generator().manual_seed(seed)
        scale = 0.1

        def rand(*shape):
            return (torch.randn(*shape, generator=self.gen, dtype=DTYPE) * scale).requires_grad_()

        self.emb = rand(len(self.vocab), dim)
        self.pos = rand(max_positions, dim)
        self.w_enc = rand(hidden, dim)
        self.b_enc = torch.zeros(hidden, dtype=DTYPE, requires_grad=True)
        self.w_init = rand(hidden, hidden)
        self.b_init = torch.zeros(hidden, dtype=DTYPE, requires_grad=True)
        self.w_ss = rand(hidden, hidden)
        self.w_sx = rand(hidden, dim)
        self.b_s = torch.zeros(hidden, dtype=DTYPE, requires_grad=True)
        self.w_att = rand(hidden, hidden)
        self.gate = CopyGateParams.init(hidden, hidden, dim, generator=self.gen)
        for t in self.gate.tensors():
            t.requires_grad_()
        self.w_out = rand(len(self.vocab), 2 * hidden)
        self.b_out = torch.zeros(len(self.vocab), dtype=DTYPE, requires_grad=True)

    # -- parameters --

    def parameters(self) -> list[torch.Tensor]:
        return [
            self.emb, self.pos, self.w_enc, self.b_enc, self.w_init, self.b_init,
            self.w_ss, self.w_sx, self.b_s, self.w_att,
            *self.gate.tensors(), self.w_out, self.b_out,
        ]

    def gate_parameters(self) -> list[torch.Tensor]:
        return self.gate.tensors()

    def _grow_rows(self, added: int) -> None:
        """Extend the vocabulary-indexed matrices with seeded fresh rows."""
        if not added:
            return
        scale = 0.1
        with torch.no_grad():
            new_emb = torch.randn(added, self.dim, generator=self.gen, dtype=DTYPE) * scale
            new_out = torch.randn(added, 2 * self.hidden, generator=self.gen, dtype=DTYPE) * scale
        self.emb = torch.cat([self.emb.detach(), new_emb]).requires_grad_()
        self.w_out = torch.cat([self.w_out.detach(), new_out]).requires_grad_()
        self.b_out = torch.cat(
            [self.b_out.detach(), torch.zeros(added, dtype=DTYPE)]
        ).requires_grad_()

    def ingest(self, texts) -> None:
        added = 0
        for text in texts:
            added += self.vocab.grow(text.split())
        self._grow_rows(added)

    # -- forward --

    def _encode(self, src_ids: list[int]) -> torch.Tensor:
        ids = torch.tensor(src_ids[: self.max_positions])
        e = self.emb[ids] + self.pos[: len(ids)]
        return torch.tanh(e @ self.w_enc.T + self.b_enc)

    def _initial_state(self, h: torch.Tensor) -> torch.Tensor:
        return torch.tanh(self.w_init @ h.mean(dim=0) + self.b_init)

    def _step(self, prev_id: int, s: torch.Tensor, h: torch.Tensor):
        x = self.emb[prev_id]
        s = torch.tanh(self.w_ss @ s + self.w_sx @ x + self.b_s)
        scores = h @ (self.w_att @ s)
        a = torch.softmax(scores, dim=0)
        c = attention_context(a, h)
        step = DecoderStep(x_t=x, s_t=s, c_t=c, a_t=a)
        p = copy_gate(step, self.gate)
        vocab_dist = torch.softmax(self.w_out @ torch.cat([s, c]) + self.b_out, dim=0)
        return s, a, p, vocab_dist

    def _mix(self, p, a, vocab_dist, src_ids: list[int]) -> torch.Tensor:
        copy_dist = torch.zeros(len(self.vocab), dtype=DTYPE)
        copy_dist = copy_dist.index_add(
            0, torch.tensor(src_ids[: self.max_positions]), a
        )
        return p * copy_dist + (1.0 - p) * vocab_dist

    def sequence_loss(self, src: str, tgt: str) -> torch.Tensor:
        """Teacher-forced negative log-likelihood plus the copy penalty."""
        src_tokens = src.split()
        tgt_tokens = tgt.split() + [EOS]
        src_ids = self.vocab.encode(src_tokens)
        tgt_ids = self.vocab.encode(tgt_tokens)
        h = self._encode(src_ids)
        s = self._initial_state(h)
        nll = torch.zeros((), dtype=DTYPE)
        gates = []
        prev = self.vocab.index[BOS]
        for j, tgt_id in enumerate(tgt_ids):
            s, a, p, vocab_dist = self._step(prev, s, h)
            mixed = self._mix(p, a, vocab_dist, src_ids)
            nll = nll - torch.log(mixed[tgt_id] + 1e-12)
            gates.append((j, p))
            prev = tgt_id
        nll = nll / len(tgt_ids)
        return copy_loss(nll, gates, tree_tokens(src), tgt_tokens, self.lam)

    @torch.no_grad()
    def decode(self, src: str) -> str:
        """Greedy decoding until <eos> or the length cap."""
        src_ids = self.vocab.encode(src.split())
        if not src_ids:
            return ""
        h = self._encode(src_ids)
        s = self._initial_state(h)
        prev = self.vocab.index[BOS]
        out: list[str] = []
        bos_id = self.vocab.index[BOS]
        eos_id = self.vocab.index[EOS]
        for _ in range(self.max_decode_len):
            s, a, p, vocab_dist = self._step(prev, s, h)
            mixed = self._mix(p, a, vocab_dist, src_ids)
            mixed[bos_id] = 0.0
            nxt = int(torch.argmax(mixed))
            if nxt == eos_id:
                break
            out.append(self.vocab.tokens[nxt])
            prev = nxt
        return " ".join(out)

    # -- training --

    def train_pairs(
        self,
        pairs: list[tuple[str, str]],
        max_epochs: int = 500,
        patience: int = 4,
        holdout_fraction: float = 0.1,
        min_holdout_pairs: int = 12,
        exact_match_limit: int = 64,
    ) -> TrainSummary:
        """Fit the pairs, continuing from the current weights.

        With enough pairs a held-out slice drives patience-based early
        stopping; tiny sets monitor training loss instead and stop as
        soon as every pair decodes exactly.
        """
        self.ingest([s for pair in pairs for s in pair])
        n_holdout = int(len(pairs) * holdout_fraction) if len(pairs) >= min_holdout_pairs else 0
        held_out = pairs[len(pairs) - n_holdout :]
        fitted = pairs[: len(pairs) - n_holdout] or pairs

        optimizer = torch.optim.Adam(self.parameters(), lr=self.lr)
        best = math.inf
        since_best = 0
        last_loss = math.inf
        for epoch in range(1, max_epochs + 1):
            total = 0.0
            for src, tgt in fitted:
                optimizer.zero_grad()
                loss = self.sequence_loss(src, tgt)
                loss.backward()
                optimizer.step()
                total += float(loss.detach())
            last_loss = total / len(fitted)

            if held_out:
                with torch.no_grad():
                    monitor = sum(
                        float(self.sequence_loss(src, tgt)) for src, tgt in held_out
                    ) / len(held_out)
            else:
                monitor = last_loss
            if monitor < best - 1e-9:
                best = monitor
                since_best = 0
            else:
                since_best += 1
                if since_best >= patience:
                    return TrainSummary(epochs=epoch, loss=last_loss, stopped_by="patience")

            if len(pairs) <= exact_match_limit and epoch % 10 == 0:
                if all(self.decode(src) == tgt for src, tgt in fitted):
                    return TrainSummary(epochs=epoch, loss=last_loss, stopped_by="exact_match")

        return TrainSummary(epochs=max_epochs, loss=last_loss, stopped_by="max_epochs")
