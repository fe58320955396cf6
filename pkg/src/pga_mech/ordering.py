"""Decision procedures for comparing behaviors.

Functional equivalence erases delays and checks bisimilarity.  The
improvement preorder additionally compares delay budgets: one behavior
improves another when, matching their branching structure pointwise, it
never spends more delays at any matched occurrence.  Divergent regions
absorb delays, so any tower of delays over deadlock is interchangeable
with deadlock.  The preorder is decided as a greatest fixpoint over the
product of the two divergence-collapsed graphs, writing each node as a
delay count plus a delay-free core.
"""

from __future__ import annotations

from enum import Enum

from .extraction import extract_mechanistic
from .instructions import InstrSeq
from .threads import (
    DELAY,
    POST,
    ThreadGraph,
    bisimilar,
    collapse_divergence,
    functional_abstraction,
)

__all__ = [
    "ComparisonVerdict",
    "compare",
    "functionally_equivalent",
    "improves",
    "is_implementation",
    "is_pre_extraction",
    "strictly_improves",
]


class ComparisonVerdict(Enum):
    EQUAL = "equal"
    STRICTLY_IMPROVES = "improves"
    STRICTLY_IMPROVED_BY = "improved-by"
    MUTUALLY_EQUIVALENT = "mutually-equivalent"
    INCOMPARABLE = "incomparable"
    FUNCTIONALLY_DIFFERENT = "functionally-different"


def functionally_equivalent(p: ThreadGraph, q: ThreadGraph) -> bool:
    """True iff the delay-erased behaviors are bisimilar."""
    return bisimilar(functional_abstraction(p), functional_abstraction(q))


def _delay_resolution(g: ThreadGraph) -> list[tuple[int, int]]:
    """Per node: (number of delays to the first non-delay node, its id).

    Requires a divergence-collapsed graph, where every delay chain is
    finite and ends in S or a post node.
    """
    out: list[tuple[int, int] | None] = [None] * len(g.nodes)

    def resolve(i: int) -> tuple[int, int]:
        trail = []
        while g.nodes[i].kind == DELAY and out[i] is None:
            trail.append(i)
            i = g.nodes[i].next
        d, core = out[i] if out[i] is not None else (0, i)
        for j in reversed(trail):
            d += 1
            out[j] = (d, core)
        return out[i] if out[i] is not None else (0, i)

    for i in range(len(g.nodes)):
        if out[i] is None:
            if g.nodes[i].kind == DELAY:
                resolve(i)
            else:
                out[i] = (0, i)
    return out  # type: ignore[return-value]


def improves(p: ThreadGraph, q: ThreadGraph) -> bool:
    """Decide whether ``p`` improves ``q`` (spends no more delays anywhere
    while exhibiting the same functional branching)."""
    pg = collapse_divergence(p)
    qg = collapse_divergence(q)
    pres = _delay_resolution(pg)
    qres = _delay_resolution(qg)
    p_cores = [i for i, node in enumerate(pg.nodes) if node.kind != DELAY]
    q_cores = [i for i, node in enumerate(qg.nodes) if node.kind != DELAY]

    rel: set[tuple[int, int]] = set()
    for a in p_cores:
        for b in q_cores:
            na, nb = pg.nodes[a], qg.nodes[b]
            if na.kind == nb.kind and (na.kind != POST or na.action == nb.action):
                rel.add((a, b))

    changed = True
    while changed:
        changed = False
        for pair in list(rel):
            a, b = pair
            na, nb = pg.nodes[a], qg.nodes[b]
            if na.kind != POST:
                continue
            dt_a, ct_a = pres[na.true]
            dt_b, ct_b = qres[nb.true]
            df_a, cf_a = pres[na.false]
            df_b, cf_b = qres[nb.false]
            ok = (dt_a <= dt_b and df_a <= df_b
                  and (ct_a, ct_b) in rel and (cf_a, cf_b) in rel)
            if not ok:
                rel.discard(pair)
                changed = True

    dr_p, cr_p = pres[pg.root]
    dr_q, cr_q = qres[qg.root]
    return dr_p <= dr_q and (cr_p, cr_q) in rel


def strictly_improves(p: ThreadGraph, q: ThreadGraph) -> bool:
    """Improvement together with delay-exact inequality."""
    return improves(p, q) and not bisimilar(p, q)


def compare(p: ThreadGraph, q: ThreadGraph) -> ComparisonVerdict:
    """Classify the relationship between two behaviors."""
    if not functionally_equivalent(p, q):
        return ComparisonVerdict.FUNCTIONALLY_DIFFERENT
    if bisimilar(p, q):
        return ComparisonVerdict.EQUAL
    forward = improves(p, q)
    backward = improves(q, p)
    if forward and backward:
        return ComparisonVerdict.MUTUALLY_EQUIVALENT
    if forward:
        return ComparisonVerdict.STRICTLY_IMPROVES
    if backward:
        return ComparisonVerdict.STRICTLY_IMPROVED_BY
    return ComparisonVerdict.INCOMPARABLE


def is_implementation(x: InstrSeq, p: ThreadGraph) -> bool:
    """True iff ``p`` improves the mechanistic behavior of ``x``."""
    return improves(p, extract_mechanistic(x))


def is_pre_extraction(x: InstrSeq, p: ThreadGraph) -> bool:
    """True iff the mechanistic behavior of ``x`` equals ``p`` exactly."""
    return bisimilar(p, extract_mechanistic(x))
