"""Delay-aware behavior analysis of single-pass instruction sequences.

The package parses instruction sequences, extracts their functional and
mechanistic (delay-annotated) behaviors as finite graphs, decides the
improvement preorder between behaviors, applies verified rewrites, emits
sequences for regular delay-free behaviors, and enumerates implementations
within bounds.
"""

from .extraction import extract_functional, extract_mechanistic
from .instructions import (
    Instruction,
    InstrSeq,
    JumpResolution,
    PgaSyntaxError,
    TERMINATE,
    basic,
    canonical_position,
    canonicalize,
    instruction_at,
    jump,
    jump_target,
    neg_test,
    parse_pga,
    pos_test,
    print_pga,
    reachable_positions,
)
from .ordering import (
    ComparisonVerdict,
    compare,
    functionally_equivalent,
    improves,
    is_implementation,
    is_pre_extraction,
    strictly_improves,
)
from .rewrites import (
    RewriteError,
    RewriteStep,
    RewriteVerificationError,
    SearchBounds,
    codegen,
    eliminate_jump_to_termination,
    expand_test_chain,
    has_adjacent_delays,
    improve_step,
    pareto_front,
    rewrite_negtest_jump,
    search_implementations,
    splice,
    unchain,
    unroll,
)
from .threads import (
    Node,
    ThreadGraph,
    ThreadSyntaxError,
    bisimilar,
    collapse_divergence,
    functional_abstraction,
    graph_to_dict,
    make_d,
    make_delay,
    make_post,
    make_prefix,
    make_s,
    minimize,
    parse_thread,
    print_thread,
    to_dot,
    to_json,
)

__all__ = [
    "ComparisonVerdict",
    "Instruction",
    "InstrSeq",
    "JumpResolution",
    "Node",
    "PgaSyntaxError",
    "RewriteError",
    "RewriteStep",
    "RewriteVerificationError",
    "SearchBounds",
    "TERMINATE",
    "ThreadGraph",
    "ThreadSyntaxError",
    "basic",
    "bisimilar",
    "canonical_position",
    "canonicalize",
    "codegen",
    "collapse_divergence",
    "compare",
    "eliminate_jump_to_termination",
    "expand_test_chain",
    "extract_functional",
    "extract_mechanistic",
    "functional_abstraction",
    "functionally_equivalent",
    "graph_to_dict",
    "has_adjacent_delays",
    "improve_step",
    "improves",
    "instruction_at",
    "is_implementation",
    "is_pre_extraction",
    "jump",
    "jump_target",
    "make_d",
    "make_delay",
    "make_post",
    "make_prefix",
    "make_s",
    "minimize",
    "neg_test",
    "pareto_front",
    "parse_pga",
    "parse_thread",
    "pos_test",
    "print_pga",
    "print_thread",
    "reachable_positions",
    "rewrite_negtest_jump",
    "search_implementations",
    "splice",
    "strictly_improves",
    "to_dot",
    "to_json",
    "unchain",
    "unroll",
]
