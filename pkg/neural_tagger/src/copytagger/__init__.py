"""Toy trainable sequence transducer with a logic-tree copy gate,
serving the orchestrator's external-backend wire protocol."""

from .copy_ops import (
    CopyGateParams,
    DecoderStep,
    ShapeMismatch,
    UnnormalizedInput,
    attention_context,
    copy_gate,
    copy_loss,
    mix_output_distribution,
)
from .leaf_tokens import tree_tokens
from .model import Seq2SeqCopyModel, TrainSummary

__version__ = "0.1.0"
