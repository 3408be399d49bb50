"""Automatic evaluation metrics: BLEU-1 and ROUGE-1/2/L (F-measure).

Single-reference variants only; corpus scores are macro (per-instance)
averages.  These follow the standard formulas but do not replicate the
stemming and segmentation quirks of the NIST mteval or ROUGE-1.5.5 perl
scripts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .content_consistency import ConsistencyConfig, lcs_length, tokenize

__all__ = [
    "EmptyCorpus",
    "bleu1",
    "bleu",
    "bleu4",
    "rouge_n",
    "rouge_l",
    "MetricSummary",
    "MetricReport",
    "corpus_eval",
    "format_metric_report",
]


class EmptyCorpus(ValueError):
    pass


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_matches(candidate: list[str], reference: list[str], n: int) -> int:
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    return sum(min(count, ref[gram]) for gram, count in cand.items())


def bleu(candidate: list[str], reference: list[str], max_n: int = 1) -> float:
    """BLEU with uniform n-gram weights up to max_n, no smoothing.

    Brevity penalty min(1, exp(1 - r/c)); empty candidate scores 0, as
    does any candidate with a zero n-gram precision.
    """
    c = len(candidate)
    r = len(reference)
    if c == 0:
        return 0.0
    log_precisions = []
    for n in range(1, max_n + 1):
        total = max(c - n + 1, 0)
        matched = _clipped_matches(candidate, reference, n) if total else 0
        if matched == 0:
            return 0.0
        log_precisions.append(math.log(matched / total))
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(log_precisions) / max_n)


def bleu1(candidate: list[str], reference: list[str]) -> float:
    """Clipped unigram precision times the brevity penalty."""
    return bleu(candidate, reference, max_n=1)


def bleu4(candidate: list[str], reference: list[str]) -> float:
    return bleu(candidate, reference, max_n=4)


def rouge_n(candidate: list[str], reference: list[str], n: int) -> float:
    """F1 over clipped n-gram overlap; 0 when either side has no n-grams."""
    cand_total = max(len(candidate) - n + 1, 0)
    ref_total = max(len(reference) - n + 1, 0)
    if cand_total == 0 or ref_total == 0:
        return 0.0
    matches = _clipped_matches(candidate, reference, n)
    if matches == 0:
        return 0.0
    precision = matches / cand_total
    recall = matches / ref_total
    return 2.0 * precision * recall / (precision + recall)


def rouge_l(candidate: list[str], reference: list[str]) -> float:
    """LCS-based F1 with recall against the reference and precision
    against the candidate (the conventional assignment)."""
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class MetricSummary:
    count: int = 0
    bleu1: float = 0.0
    rouge1: float = 0.0
    rouge2: float = 0.0
    rougeL: float = 0.0

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "bleu1": self.bleu1,
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
        }


@dataclass
class MetricReport:
    overall: MetricSummary
    groups: dict[str, MetricSummary] = field(default_factory=dict)


def _summarize(scored: list[tuple[float, float, float, float]]) -> MetricSummary:
    n = len(scored)
    return MetricSummary(
        count=n,
        bleu1=sum(s[0] for s in scored) / n,
        rouge1=sum(s[1] for s in scored) / n,
        rouge2=sum(s[2] for s in scored) / n,
        rougeL=sum(s[3] for s in scored) / n,
    )


def corpus_eval(
    pairs: list[tuple[str, str]],
    groups: list[str] | None = None,
    cfg: ConsistencyConfig = ConsistencyConfig(),
) -> MetricReport:
    """Macro-averaged B-1/R-1/R-2/R-L over (candidate, reference) pairs,
    with optional per-group breakdown via a parallel group-label list."""
    if not pairs:
        raise EmptyCorpus("no pairs to evaluate")
    if groups is not None and len(groups) != len(pairs):
        raise ValueError("groups must parallel pairs")
    scored = []
    for candidate, reference in pairs:
        c = tokenize(candidate, cfg)
        r = tokenize(reference, cfg)
        scored.append((bleu1(c, r), rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r)))
    report = MetricReport(overall=_summarize(scored))
    if groups is not None:
        by_group: dict[str, list] = {}
        for label, row in zip(groups, scored):
            by_group.setdefault(label, []).append(row)
        report.groups = {label: _summarize(rows) for label, rows in sorted(by_group.items())}
    return report


def format_metric_report(report: MetricReport) -> str:
    """One record per group: name, count, B-1, R-1, R-2, R-L (4 decimals).
    Scores are macro averages over instances."""
    lines = ["# macro-averaged metrics"]
    header = f"{'group':<16} {'count':>6} {'B-1':>8} {'R-1':>8} {'R-2':>8} {'R-L':>8}"
    lines.append(header)

    def row(name: str, s: MetricSummary) -> str:
        return (
            f"{name:<16} {s.count:>6} {s.bleu1:>8.4f} {s.rouge1:>8.4f} "
            f"{s.rouge2:>8.4f} {s.rougeL:>8.4f}"
        )

    lines.append(row("overall", report.overall))
    for name, summary in report.groups.items():
        lines.append(row(name, summary))
    return "\n".join(lines)
