"""Iterative self-training with content and structure consistency.

Each iteration trains both taggers on the current train set, round-trips
every remaining pool item (text -> pseudo logical form -> recovered
text), scores content consistency on the reconstruction and structure
consistency on the pseudo form, absorbs the top-K qualified candidates
into the train set, and checkpoints.  The loop stops when the pool is
empty, the iteration cap is hit, or no candidate qualifies.

Checkpoints are a directory of three files, all deterministic given the
seed and deterministic backends: state.json (digest-protected),
selections.jsonl (one line per selected candidate) and report.json
(per-iteration summaries plus the effective configuration).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .content_consistency import ConsistencyConfig, content_score
from .corpus_io import (
    DEFAULT_DEPTH_THRESHOLDS,
    InputConfig,
    ParallelPair,
    UnlabeledItem,
    build_input_sequence,
    linearize_table,
)
from .logic_ast import LogicParseError, parse_logical_form, tree_depth
from .structure_rules import FunctionSchema, StructureVerdict, default_schema, structure_verdict
from .taggers import TaggerBackend

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "STATE_FILE",
    "SELECTION_LOG_FILE",
    "REPORT_FILE",
    "InvalidConfig",
    "CorruptCheckpoint",
    "SelfTrainConfig",
    "SelfTrainState",
    "Candidate",
    "round_trip",
    "select_top_k",
    "save_checkpoint",
    "load_checkpoint",
    "SelfTrainResult",
    "run_self_training",
]

CHECKPOINT_FORMAT_VERSION = 1
STATE_FILE = "state.json"
SELECTION_LOG_FILE = "selections.jsonl"
REPORT_FILE = "report.json"

DEFAULT_K = 1000


class InvalidConfig(ValueError):
    pass


class CorruptCheckpoint(RuntimeError):
    pass


@dataclass(frozen=True)
class SelfTrainConfig:
    k: int = DEFAULT_K
    kappa: float = 0.5
    beta: float = 1.0
    max_iterations: int | None = None  # None: ceil(|U0|/k) + 2
    shuffle_seed: int = 0
    early_stop_if_no_qualified: bool = True
    jobs: int = 1
    check_invariants: bool = False
    input_cfg: InputConfig = InputConfig()

    def __post_init__(self):
        if self.k < 1:
            raise InvalidConfig("k must be >= 1")
        if not 0.0 <= self.kappa <= 1.0:
            raise InvalidConfig("kappa must lie in [0, 1]")
        if self.beta <= 0:
            raise InvalidConfig("beta must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidConfig("max_iterations must be >= 1")
        if self.jobs < 1:
            raise InvalidConfig("jobs must be >= 1")

    def consistency_cfg(self) -> ConsistencyConfig:
        return ConsistencyConfig(beta=self.beta)

    def echo(self) -> dict:
        return {
            "k": self.k,
            "kappa": self.kappa,
            "beta": self.beta,
            "max_iterations": self.max_iterations,
            "shuffle_seed": self.shuffle_seed,
            "early_stop_if_no_qualified": self.early_stop_if_no_qualified,
            "jobs": self.jobs,
            "separator": self.input_cfg.separator,
            "include_rows": self.input_cfg.include_rows,
        }


@dataclass
class SelfTrainState:
    iteration: int = 0
    train_ids: set[str] = field(default_factory=set)
    pool_ids: set[str] = field(default_factory=set)
    last_selection: list[dict] = field(default_factory=list)
    done: bool = False
    stop_reason: str | None = None


@dataclass(frozen=True)
class Candidate:
    item: UnlabeledItem
    pseudo_logic: str
    recovered_text: str
    content_score: float
    verdict: StructureVerdict

    @property
    def qualified(self) -> bool:
        return self.verdict.overall_pass


def _t2l_input(item: UnlabeledItem, cfg: InputConfig) -> str:
    table = linearize_table(item.table, cfg.include_rows)
    return f"{item.text} {cfg.separator} {table}"


def _score_candidate(
    item: UnlabeledItem,
    pseudo_logic: str,
    recovered_text: str,
    schema: FunctionSchema,
    config: SelfTrainConfig,
) -> Candidate:
    verdict = structure_verdict(pseudo_logic, schema, config.kappa)
    score = content_score(item.text, recovered_text, config.consistency_cfg())
    return Candidate(
        item=item,
        pseudo_logic=pseudo_logic,
        recovered_text=recovered_text,
        content_score=score,
        verdict=verdict,
    )


def round_trip(
    item: UnlabeledItem,
    t2l: TaggerBackend,
    l2t: TaggerBackend,
    config: SelfTrainConfig = SelfTrainConfig(),
    schema: FunctionSchema | None = None,
) -> Candidate:
    """Pseudo-label one item and score the reconstruction.

    A tag failure (empty output) simply produces an unqualified candidate
    with score 0; backend-level failures propagate.
    """
    schema = schema or default_schema()
    pseudo = t2l.tag([_t2l_input(item, config.input_cfg)])[0]
    recovered = l2t.tag([build_input_sequence(pseudo, item.table, config.input_cfg)])[0]
    return _score_candidate(item, pseudo, recovered, schema, config)


def _score_pool(
    pool: list[UnlabeledItem],
    t2l: TaggerBackend,
    l2t: TaggerBackend,
    schema: FunctionSchema,
    config: SelfTrainConfig,
) -> list[Candidate]:
    t2l_inputs = [_t2l_input(item, config.input_cfg) for item in pool]
    pseudo_logics = t2l.tag(t2l_inputs)
    l2t_inputs = [
        build_input_sequence(pseudo, item.table, config.input_cfg)
        for item, pseudo in zip(pool, pseudo_logics)
    ]
    recovered_texts = l2t.tag(l2t_inputs)

    def score(args):
        item, pseudo, recovered = args
        return _score_candidate(item, pseudo, recovered, schema, config)

    triples = list(zip(pool, pseudo_logics, recovered_texts))
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool_exec:
            return list(pool_exec.map(score, triples))
    return [score(t) for t in triples]


def select_top_k(candidates: list[Candidate], k: int) -> list[Candidate]:
    """The k qualified candidates with the highest content scores; ties
    break by ascending item id.  Returns all qualified when fewer than k
    qualify."""
    qualified = [c for c in candidates if c.qualified]
    qualified.sort(key=lambda c: (-c.content_score, c.item.id))
    return qualified[:k]


def _atomic_write(path: Path, payload: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)


def _state_payload(state: SelfTrainState) -> dict:
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "iteration": state.iteration,
        "done": state.done,
        "stop_reason": state.stop_reason,
        "train_ids": sorted(state.train_ids),
        "pool_ids": sorted(state.pool_ids),
        "last_selection": state.last_selection,
    }


def _digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_checkpoint(state: SelfTrainState, directory: str | Path) -> None:
    """Write the digest-protected state file (atomic replace)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = _state_payload(state)
    payload["digest"] = _digest(_state_payload(state))
    _atomic_write(directory / STATE_FILE, json.dumps(payload, sort_keys=True, indent=1) + "\n")


def load_checkpoint(directory: str | Path) -> SelfTrainState:
    """Read the state file back, verifying its content digest."""
    path = Path(directory) / STATE_FILE
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorruptCheckpoint(f"{path}: not valid JSON: {e}")
    stored_digest = payload.pop("digest", None)
    if stored_digest != _digest(payload):
        raise CorruptCheckpoint(f"{path}: content digest mismatch")
    if payload.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise CorruptCheckpoint(f"{path}: unsupported format version")
    return SelfTrainState(
        iteration=payload["iteration"],
        train_ids=set(payload["train_ids"]),
        pool_ids=set(payload["pool_ids"]),
        last_selection=payload["last_selection"],
        done=payload["done"],
        stop_reason=payload["stop_reason"],
    )


def _selection_record(iteration: int, c: Candidate) -> dict:
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "iteration": iteration,
        "id": c.item.id,
        "content_score": c.content_score,
        "pseudo_logic": c.pseudo_logic,
        "rule1": c.verdict.rule1_pass,
        "rule2": c.verdict.rule2_pass,
        "rule3_avg": c.verdict.rule3_avg,
        "rule3": c.verdict.rule3_pass,
        "overall": c.verdict.overall_pass,
    }


def _write_selection_log(records: list[dict], directory: Path) -> None:
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    _atomic_write(directory / SELECTION_LOG_FILE, lines)


def _read_selection_log(directory: Path) -> list[dict]:
    path = directory / SELECTION_LOG_FILE
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def _write_report(report: dict, directory: Path) -> None:
    _atomic_write(directory / REPORT_FILE, json.dumps(report, sort_keys=True, indent=1) + "\n")


def _depth_bucket(logic: str, thresholds: tuple[int, int] = DEFAULT_DEPTH_THRESHOLDS) -> str:
    try:
        depth = tree_depth(parse_logical_form(logic))
    except LogicParseError:
        return "hard"
    if depth <= thresholds[0]:
        return "easy"
    if depth <= thresholds[1]:
        return "middle"
    return "hard"


def _iteration_row(iteration: int, pool_size: int, candidates: list[Candidate], selected: list[Candidate]) -> dict:
    qualified = [c for c in candidates if c.qualified]
    scores = [c.content_score for c in qualified]
    buckets = {"easy": 0, "middle": 0, "hard": 0}
    for c in selected:
        buckets[_depth_bucket(c.pseudo_logic)] += 1
    return {
        "iteration": iteration,
        "pool_size": pool_size,
        "tag_failures": sum(1 for c in candidates if not c.pseudo_logic),
        "qualified": len(qualified),
        "selected": len(selected),
        "score_min": min(scores) if scores else 0.0,
        "score_mean": sum(scores) / len(scores) if scores else 0.0,
        "score_max": max(scores) if scores else 0.0,
        "selected_buckets": buckets,
    }


@dataclass
class SelfTrainResult:
    l2t: TaggerBackend
    state: SelfTrainState
    report: dict
    train_pairs: list[ParallelPair]
    pool_items: list[UnlabeledItem]


def _t2l_pairs(pairs: list[ParallelPair], cfg: InputConfig) -> list[tuple[str, str]]:
    return [
        (f"{p.text} {cfg.separator} {linearize_table(p.table, cfg.include_rows)}", p.logic)
        for p in pairs
    ]


def _l2t_pairs(pairs: list[ParallelPair], cfg: InputConfig) -> list[tuple[str, str]]:
    return [(build_input_sequence(p.logic, p.table, cfg), p.text) for p in pairs]


def run_self_training(
    train_pairs: list[ParallelPair],
    pool_items: list[UnlabeledItem],
    t2l: TaggerBackend,
    l2t: TaggerBackend,
    config: SelfTrainConfig = SelfTrainConfig(),
    checkpoint_dir: str | Path = "checkpoint",
    schema: FunctionSchema | None = None,
    resume: bool = False,
    iteration_hook=None,
) -> SelfTrainResult:
    """Run the full self-training loop; see the module docstring.

    With resume=True the loop continues from the checkpoint directory,
    which must have been produced from the same train/pool inputs; under
    deterministic backends the resumed run's files equal those of an
    uninterrupted run.  iteration_hook(iteration, candidates, selected)
    is called once per iteration, for inspection in tests.
    """
    if not train_pairs:
        raise InvalidConfig("train set must contain at least one pair")
    schema = schema or default_schema()
    directory = Path(checkpoint_dir)

    ids = [p.id for p in train_pairs] + [u.id for u in pool_items]
    if len(set(ids)) != len(ids):
        raise InvalidConfig("duplicate ids across train set and pool")
    universe = set(ids)
    gold_ids = {p.id for p in train_pairs}
    pool_by_id = {u.id: u for u in pool_items}

    # shuffled once up front; iterations keep this order for the survivors
    order = list(pool_items)
    random.Random(config.shuffle_seed).shuffle(order)

    max_iterations = config.max_iterations
    if max_iterations is None:
        max_iterations = max(1, math.ceil(len(pool_items) / config.k) + 2)

    current_train = list(train_pairs)
    selections: list[dict] = []
    iteration_rows: list[dict] = []

    if resume:
        state = load_checkpoint(directory)
        if state.train_ids | state.pool_ids != universe:
            raise InvalidConfig("checkpoint does not match the given train/pool inputs")
        selections = _read_selection_log(directory)
        for rec in selections:
            item = pool_by_id.get(rec["id"])
            if item is None or rec["id"] in gold_ids:
                raise CorruptCheckpoint(f"selection log references unknown id {rec['id']!r}")
            current_train.append(
                ParallelPair(
                    id=item.id,
                    logic=rec["pseudo_logic"],
                    table=item.table,
                    text=item.text,
                    provenance="pseudo",
                    score=rec["content_score"],
                )
            )
        report_path = directory / REPORT_FILE
        if report_path.exists():
            previous = json.loads(report_path.read_text(encoding="utf-8"))
            iteration_rows = [
                row for row in previous.get("iterations", []) if row["iteration"] <= state.iteration
            ]
    else:
        state = SelfTrainState(train_ids=set(gold_ids), pool_ids=set(pool_by_id))

    def survivors() -> list[UnlabeledItem]:
        return [u for u in order if u.id in state.pool_ids]

    def commit() -> None:
        save_checkpoint(state, directory)
        _write_selection_log(selections, directory)
        _write_report(build_report(), directory)

    def build_report() -> dict:
        return {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "config": config.echo(),
            "iterations": iteration_rows,
            "stop_reason": state.stop_reason,
            "final_train_size": len(state.train_ids),
            "final_pool_size": len(state.pool_ids),
        }

    if config.check_invariants:
        assert state.train_ids | state.pool_ids == universe
        assert not state.train_ids & state.pool_ids

    if not state.done and not state.pool_ids:
        state.done = True
        state.stop_reason = "pool_exhausted"
        commit()

    while not state.done and state.pool_ids and state.iteration < max_iterations:
        iteration = state.iteration + 1
        pool = survivors()

        if t2l.trainable:
            t2l.train(_t2l_pairs(current_train, config.input_cfg))
        if l2t.trainable:
            l2t.train(_l2t_pairs(current_train, config.input_cfg))

        candidates = _score_pool(pool, t2l, l2t, schema, config)
        selected = select_top_k(candidates, config.k)
        iteration_rows.append(_iteration_row(iteration, len(pool), candidates, selected))
        if iteration_hook is not None:
            iteration_hook(iteration, candidates, selected)

        state.iteration = iteration
        state.last_selection = [
            {"id": c.item.id, "content_score": c.content_score, "verdict": c.verdict.flags()}
            for c in selected
        ]

        if not selected:
            if config.early_stop_if_no_qualified:
                state.done = True
                state.stop_reason = "no_qualified_candidates"
            commit()
            if state.done:
                break
            continue

        for c in selected:
            current_train.append(
                ParallelPair(
                    id=c.item.id,
                    logic=c.pseudo_logic,
                    table=c.item.table,
                    text=c.item.text,
                    provenance="pseudo",
                    score=c.content_score,
                )
            )
            selections.append(_selection_record(iteration, c))
            state.train_ids.add(c.item.id)
            state.pool_ids.discard(c.item.id)

        if config.check_invariants:
            assert state.train_ids | state.pool_ids == universe
            assert not state.train_ids & state.pool_ids

        if not state.pool_ids:
            state.done = True
            state.stop_reason = "pool_exhausted"
        commit()

    if not state.done and state.iteration >= max_iterations and state.pool_ids:
        state.stop_reason = "max_iterations"
        commit()

    return SelfTrainResult(
        l2t=l2t,
        state=state,
        report=build_report(),
        train_pairs=current_train,
        pool_items=survivors(),
    )
