import json
import math
import random
from collections import Counter
from fractions import Fraction
from pathlib import Path

import pytest

from logictext.eval_metrics import (
    EmptyCorpus,
    bleu,
    bleu1,
    bleu4,
    corpus_eval,
    format_metric_report,
    rouge_l,
    rouge_n,
)
from logictext.content_consistency import content_score

GOLDEN = json.loads((Path(__file__).parent / "data" / "metric_golden.json").read_text())


# -- independent rational-arithmetic oracle used to vet the golden file --

def oracle_bleu1(c, r):
    if not c:
        return 0.0
    cc, rc = Counter(c), Counter(r)
    matched = sum(min(v, rc[g]) for g, v in cc.items())
    bp = 1.0 if len(c) > len(r) else math.exp(1 - len(r) / len(c))
    return float(Fraction(matched, len(c))) * bp

def oracle_rouge_n(c, r, n):
    cn = Counter(tuple(c[i : i + n]) for i in range(len(c) - n + 1))
    rn = Counter(tuple(r[i : i + n]) for i in range(len(r) - n + 1))
    tc, tr = sum(cn.values()), sum(rn.values())
    if not tc or not tr:
        return 0.0
    m = sum(min(v, rn[g]) for g, v in cn.items())
    if not m:
        return 0.0
    p, q = Fraction(m, tc), Fraction(m, tr)
    return float(2 * p * q / (p + q))

def oracle_lcs(a, b):
    best = 0
    from itertools import combinations

    def contains(sub, seq):
        it = iter(seq)
        return all(tok in it for tok in sub)

    for k in range(min(len(a), len(b)), 0, -1):
        if any(contains(sub, b) for sub in combinations(a, k)):
            return k
    return best

def oracle_rouge_l(c, r):
    if not c or not r:
        return 0.0
    l = oracle_lcs(c, r)
    if not l:
        return 0.0
    p, q = Fraction(l, len(c)), Fraction(l, len(r))
    return float(2 * p * q / (p + q))


def test_golden_file_agrees_with_oracle():
    for case in GOLDEN:
        c, r = case["candidate"].split(), case["reference"].split()
        assert round(oracle_bleu1(c, r), 4) == case["bleu1"]
        assert round(oracle_rouge_n(c, r, 1), 4) == case["rouge1"]
        assert round(oracle_rouge_n(c, r, 2), 4) == case["rouge2"]
        assert round(oracle_rouge_l(c, r), 4) == case["rougeL"]


def test_metrics_match_golden_file():
    for case in GOLDEN:
        c, r = case["candidate"].split(), case["reference"].split()
        assert bleu1(c, r) == pytest.approx(case["bleu1"], abs=5e-5)
        assert rouge_n(c, r, 1) == pytest.approx(case["rouge1"], abs=5e-5)
        assert rouge_n(c, r, 2) == pytest.approx(case["rouge2"], abs=5e-5)
        assert rouge_l(c, r) == pytest.approx(case["rougeL"], abs=5e-5)


def test_bleu1_clipping_case():
    assert bleu1(["the", "the", "the"], ["the", "cat"]) == pytest.approx(1 / 3)


def test_bleu1_identity_and_empty():
    assert bleu1(["a", "b"], ["a", "b"]) == 1.0
    assert bleu1([], ["a"]) == 0.0


def test_rouge1_hand_case():
    assert rouge_n(["a", "b", "c"], ["a", "c"], 1) == pytest.approx(0.8)


def test_rouge2_short_reference():
    assert rouge_n(["a", "b", "c"], ["a"], 2) == 0.0


def test_rouge_l_hand_case():
    assert rouge_l(["a", "b", "x", "d"], ["a", "b", "c", "d"]) == pytest.approx(0.75)


def test_rouge_l_zero_overlap():
    assert rouge_l(["a"], ["b"]) == 0.0


def test_all_metrics_in_range_and_one_on_equal():
    rng = random.Random(40)
    words = ["a", "b", "c", "d"]
    for _ in range(200):
        c = [rng.choice(words) for _ in range(rng.randrange(1, 9))]
        r = [rng.choice(words) for _ in range(rng.randrange(1, 9))]
        for score in (bleu1(c, r), rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r)):
            assert 0.0 <= score <= 1.0
        for score in (bleu1(c, c), rouge_n(c, c, 1), rouge_l(c, c)):
            assert score == 1.0


def test_rouge1_permutation_invariance():
    rng = random.Random(41)
    for _ in range(100):
        c = [rng.choice("abcde") for _ in range(rng.randrange(1, 9))]
        r = [rng.choice("abcde") for _ in range(rng.randrange(1, 9))]
        shuffled = list(c)
        rng.shuffle(shuffled)
        assert rouge_n(c, r, 1) == pytest.approx(rouge_n(shuffled, r, 1))


def test_rouge_l_agrees_with_content_score_on_equal_lengths():
    rng = random.Random(42)
    words = ["m", "n", "o", "p"]
    for _ in range(100):
        n = rng.randrange(1, 9)
        c = [rng.choice(words) for _ in range(n)]
        r = [rng.choice(words) for _ in range(n)]
        assert rouge_l(c, r) == pytest.approx(content_score(" ".join(r), " ".join(c)))


def test_bleu4():
    c = ["a", "b", "c", "d", "e"]
    assert bleu4(c, c) == pytest.approx(1.0)
    assert bleu4(["a", "b", "c"], ["x", "y", "z"]) == 0.0
    # candidate shorter than 4 tokens has no 4-grams
    assert bleu(["a", "b"], ["a", "b"], max_n=4) == 0.0


def test_corpus_eval_identity_pair():
    report = corpus_eval([("a b c", "a b c")])
    assert report.overall.count == 1
    for v in (report.overall.bleu1, report.overall.rouge1, report.overall.rouge2, report.overall.rougeL):
        assert v == 1.0


def test_corpus_eval_macro_average():
    pairs = [("a b c", "a b c"), ("x y z", "a b c")]
    report = corpus_eval(pairs)
    assert report.overall.bleu1 == pytest.approx(0.5)
    assert report.overall.rougeL == pytest.approx(0.5)


def test_corpus_eval_groups_partition():
    pairs = [("a", "a"), ("b", "b"), ("c", "x")]
    report = corpus_eval(pairs, groups=["g1", "g2", "g1"])
    assert sum(s.count for s in report.groups.values()) == len(pairs)
    assert report.groups["g1"].count == 2
    assert report.groups["g2"].bleu1 == 1.0


def test_corpus_eval_empty_raises():
    with pytest.raises(EmptyCorpus):
        corpus_eval([])


def test_corpus_eval_order_independent():
    pairs = [("a b", "a b"), ("c", "c d"), ("e f", "f e")]
    a = corpus_eval(pairs)
    b = corpus_eval(list(reversed(pairs)))
    assert a.overall == b.overall


def test_report_formatting():
    report = corpus_eval([("a b", "a b")], groups=["count"])
    text = format_metric_report(report)
    assert "overall" in text and "count" in text
    assert "1.0000" in text
