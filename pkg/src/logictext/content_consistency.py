"""Semantic consistency between a text and its round-trip reconstruction.

The score is an F-beta combination over the longest common subsequence of
the two token sequences, with recall taken against the reconstruction and
precision against the original:

    R = LCS(u, u') / len(u')        P = LCS(u, u') / len(u)
    score = (1 + b^2) * R * P / (R + b^2 * P)

Note the denominators: recall divides by the reconstruction length and
precision by the original length (the reverse of the ROUGE-L convention).
At beta = 1 the two assignments coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ConsistencyConfig", "tokenize", "lcs_length", "content_score"]


@dataclass(frozen=True)
class ConsistencyConfig:
    beta: float = 1.0
    lowercase: bool = True
    tokenizer: str = "whitespace"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.tokenizer != "whitespace":
            raise ValueError(f"unsupported tokenizer: {self.tokenizer!r}")


def tokenize(s: str, cfg: ConsistencyConfig = ConsistencyConfig()) -> list[str]:
    """Whitespace-split tokens, lowercased when configured; punctuation
    stays attached to its word."""
    if cfg.lowercase:
        s = s.lower()
    return s.split()


def lcs_length(a: list[str], b: list[str]) -> int:
    """Length of the longest common subsequence of two token lists."""
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def content_score(u: str, u_prime: str, cfg: ConsistencyConfig = ConsistencyConfig()) -> float:
    """F-beta LCS consistency between original u and reconstruction u'.

    Returns 0.0 when either text is empty or the sequences share no
    common subsequence (the 0/0 convention: no evidence of consistency).
    """
    tokens_u = tokenize(u, cfg)
    tokens_up = tokenize(u_prime, cfg)
    if not tokens_u or not tokens_up:
        return 0.0
    lcs = lcs_length(tokens_u, tokens_up)
    if lcs == 0:
        return 0.0
    recall = lcs / len(tokens_up)
    precision = lcs / len(tokens_u)
    b2 = cfg.beta ** 2
    return (1.0 + b2) * recall * precision / (recall + b2 * precision)
