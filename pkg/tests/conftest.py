import pytest

from logictext.corpus_io import ParallelPair, TableContext
from logictext.structure_rules import default_schema


@pytest.fixture(scope="session")
def schema():
    return default_schema()


def make_fixture_pairs(n: int = 30) -> list[ParallelPair]:
    """Deterministic corpus of conformant pairs with mixed tree depths."""
    pairs = []
    for i in range(n):
        table = TableContext.make(
            caption=f"medal table {i}",
            headers=["nation", "gold", "year"],
            rows=[[f"nation{i}", str(i), str(2000 + i)]],
        )
        if i % 3 == 0:
            logic = f"most_eq {{ all_rows ; gold ; {i} }}"
            text = f"most rows in table {i} list {i} gold medals ."
        elif i % 3 == 1:
            logic = f"eq {{ hop {{ all_rows ; nation }} ; nation{i} }}"
            text = f"the nation listed in table {i} is nation{i} ."
        else:
            logic = f"eq {{ count {{ filter_eq {{ all_rows ; year ; {2000 + i} }} }} ; 1 }}"
            text = f"exactly one row of table {i} shows year {2000 + i} ."
        pairs.append(ParallelPair(id=f"item{i:03d}", logic=logic, table=table, text=text))
    return pairs


def make_gold_pairs(n: int = 5) -> list[ParallelPair]:
    pairs = []
    for i in range(n):
        table = TableContext.make(
            caption=f"seed table {i}", headers=["city", "venue"], rows=[]
        )
        pairs.append(
            ParallelPair(
                id=f"gold{i:03d}",
                logic=f"eq {{ hop {{ all_rows ; city }} ; city{i} }}",
                table=table,
                text=f"the city listed in seed table {i} is city{i} .",
            )
        )
    return pairs


@pytest.fixture()
def fixture_pairs():
    return make_fixture_pairs()


@pytest.fixture()
def gold_pairs():
    return make_gold_pairs()
