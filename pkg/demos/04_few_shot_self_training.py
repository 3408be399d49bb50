"""End-to-end few-shot self-training on a tiny synthetic corpus.

Builds 40 logic/text pairs, keeps 10 as the seed train set, strips the
rest to an unlabeled pool, and runs the loop with replay backends (warm
stand-ins for trained taggers).  Every iteration pseudo-labels the pool,
keeps the top-K consistent candidates, and grows the train set.

Run: python3 demos/04_few_shot_self_training.py
"""

import tempfile
from pathlib import Path

from logictext import (
    ParallelPair,
    ReplayBackend,
    SelfTrainConfig,
    TableContext,
    run_self_training,
    sample_few_shot,
)
from logictext.self_training import _l2t_pairs, _t2l_pairs
from logictext.taggers import LOGIC2TEXT, TEXT2LOGIC


def toy_corpus(n=40):
    pairs = []
    for i in range(n):
        table = TableContext.make(
            caption=f"standings {i}", headers=["team", "wins"], rows=[[f"team{i}", str(i)]]
        )
        pairs.append(
            ParallelPair(
                id=f"pair{i:03d}",
                logic=f"eq {{ hop {{ all_rows ; team }} ; team{i} }}",
                table=table,
                text=f"the team in standings {i} is team{i} .",
            )
        )
    return pairs


corpus = toy_corpus()
train, pool = sample_few_shot(corpus, n=10, seed=7)
print(f"seed train set: {len(train)} pairs, unlabeled pool: {len(pool)} texts")

config = SelfTrainConfig(k=12, kappa=0.5, beta=1.0, shuffle_seed=7)

# replay backends warmed on the whole corpus play the role of strong taggers
t2l, l2t = ReplayBackend(TEXT2LOGIC), ReplayBackend(LOGIC2TEXT)
t2l.train(_t2l_pairs(corpus, config.input_cfg))
l2t.train(_l2t_pairs(corpus, config.input_cfg))

with tempfile.TemporaryDirectory() as tmp:
    result = run_self_training(train, pool, t2l, l2t, config=config, checkpoint_dir=Path(tmp))
    for row in result.report["iterations"]:
        print(
            f"iteration {row['iteration']}: pool={row['pool_size']} "
            f"qualified={row['qualified']} selected={row['selected']} "
            f"buckets={row['selected_buckets']}"
        )
    print(f"stopped: {result.state.stop_reason}")
    pseudo = [p for p in result.train_pairs if p.provenance == "pseudo"]
    print(f"final train set: {len(result.train_pairs)} pairs ({len(pseudo)} pseudo-labeled)")
    print("sample pseudo pair:", pseudo[0].logic, "->", pseudo[0].text)
