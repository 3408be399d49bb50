"""Evaluate generated text with BLEU-1 and ROUGE-1/2/L, grouped by the
logic type of the conditioning form.

Run: python3 demos/03_text_metrics.py
"""

from logictext import (
    classify_logic_type,
    corpus_eval,
    default_schema,
    parse_logical_form,
)
from logictext.eval_metrics import format_metric_report

schema = default_schema()

# (candidate, reference, conditioning logical form)
results = [
    (
        "canada won the most gold medals",
        "canada obtained the most gold medals",
        "eq { hop { argmax { all_rows ; gold } ; nation } ; canada }",
    ),
    (
        "there are 3 rows with year 2008",
        "3 rows list the year 2008",
        "eq { count { filter_eq { all_rows ; year ; 2008 } } ; 3 }",
    ),
    (
        "most nations won at least one medal",
        "most of the nations have a medal",
        "most_greater_eq { all_rows ; medals ; 1 }",
    ),
]

pairs = [(cand, ref) for cand, ref, _ in results]
groups = [classify_logic_type(parse_logical_form(logic), schema).value for _, _, logic in results]

print(format_metric_report(corpus_eval(pairs, groups)))
