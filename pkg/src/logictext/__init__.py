"""Self-training toolkit for few-shot logic-conditioned text generation.

Parses and validates symbolic logical forms, scores pseudo-labeled data
for content and structure consistency, and runs an iterative
self-training loop over pluggable sequence-transducer backends.
"""

from .content_consistency import ConsistencyConfig, content_score, lcs_length, tokenize
from .corpus_io import (
    InputConfig,
    ParallelPair,
    TableContext,
    UnlabeledItem,
    bucket_by_depth,
    build_input_sequence,
    dataset_stats,
    linearize_table,
    load_dataset,
    load_pool,
    sample_few_shot,
)
from .eval_metrics import bleu1, bleu4, corpus_eval, rouge_l, rouge_n
from .logic_ast import (
    LogicNode,
    LogicParseError,
    LogicType,
    UnknownFunction,
    bfs_function_nodes,
    classify_logic_type,
    collect_leaf_tokens,
    func_node,
    leaf,
    linearize,
    node_counts,
    parse_logical_form,
    tree_depth,
)
from .self_training import (
    Candidate,
    SelfTrainConfig,
    SelfTrainState,
    load_checkpoint,
    round_trip,
    run_self_training,
    save_checkpoint,
    select_top_k,
)
from .structure_rules import (
    FunctionSchema,
    StructureVerdict,
    check_rule1,
    check_rule2,
    check_rule3,
    default_schema,
    load_schema,
    structure_verdict,
)
from .taggers import (
    ExternalBackend,
    IdentityBackend,
    ProtocolClient,
    ReplayBackend,
    TaggerBackend,
    TemplateBackend,
)

__version__ = "0.1.0"
