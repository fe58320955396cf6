"""Thread extraction: the behavior graph denoted by an instruction sequence.

Two variants share one engine.  Functional extraction treats jumps as
transparent control transfers; mechanistic extraction charges one delay
node per executed jump instruction, regardless of the counter value.
In both, a finite sequence behaves as if a divergence jump were appended,
``!`` terminates, a basic action continues at the next position on either
reply, tests branch to the next position or the one after, and ``#0``
deadlocks at no cost.  A cycle of jumps that never emits anything is
deadlock functionally and a delay loop mechanistically.
"""

from __future__ import annotations

from .instructions import (
    BASIC,
    JUMP,
    NEG_TEST,
    POS_TEST,
    TERMINATION,
    InstrSeq,
    canonical_position,
    instruction_at,
)
from .threads import D, DELAY, POST, S, Node, ThreadGraph

__all__ = ["extract_functional", "extract_mechanistic"]


def extract_functional(seq: InstrSeq) -> ThreadGraph:
    """Behavior with jump processing abstracted away."""
    return _extract(seq, with_delays=False)


def extract_mechanistic(seq: InstrSeq) -> ThreadGraph:
    """Behavior with one delay per executed jump instruction."""
    return _extract(seq, with_delays=True)


def _extract(seq: InstrSeq, with_delays: bool) -> ThreadGraph:
    nodes: list[list] = []  # [kind, action, succ_a, succ_b], filled in later
    memo: dict[int, int] = {}
    fill: list[tuple[int, int]] = []
    d_id = -1

    def alloc(kind: str, action: str | None = None) -> int:
        nodes.append([kind, action, None, None])
        return len(nodes) - 1

    def shared_d() -> int:
        nonlocal d_id
        if d_id < 0:
            d_id = alloc(D)
        return d_id

    def node_at(p: int) -> int:
        p = canonical_position(seq, p)
        if p in memo:
            return memo[p]
        ins = instruction_at(seq, p)
        if ins is None:
            return shared_d()
        if ins.kind == TERMINATION:
            nid = alloc(S)
            memo[p] = nid
            return nid
        if ins.kind in (BASIC, POS_TEST, NEG_TEST):
            nid = alloc(POST, ins.action)
            memo[p] = nid
            fill.append((p, nid))
            return nid
        # jump
        if ins.counter == 0:
            nid = shared_d()
            memo[p] = nid
            return nid
        if with_delays:
            nid = alloc(DELAY)
            memo[p] = nid
            fill.append((p, nid))
            return nid
        # transparent jump: chase the chain; a revisit means a jump-only
        # cycle, which is deadlock
        chain = [p]
        chain_set = {p}
        cur = p
        while True:
            cur_ins = instruction_at(seq, cur)
            t = canonical_position(seq, cur + cur_ins.counter)
            t_ins = instruction_at(seq, t)
            if t_ins is None:
                result = shared_d()
                break
            if t in memo:
                result = memo[t]
                break
            if t in chain_set:
                result = shared_d()
                break
            if t_ins.kind == JUMP:
                if t_ins.counter == 0:
                    result = shared_d()
                    break
                chain.append(t)
                chain_set.add(t)
                cur = t
                continue
            result = node_at(t)
            break
        for q in chain:
            memo[q] = result
        return result

    root = node_at(0)
    while fill:
        p, nid = fill.pop()
        ins = instruction_at(seq, p)
        if ins.kind == BASIC:
            succ = node_at(p + 1)
            nodes[nid][2] = succ
            nodes[nid][3] = succ
        elif ins.kind == POS_TEST:
            nodes[nid][2] = node_at(p + 1)
            nodes[nid][3] = node_at(p + 2)
        elif ins.kind == NEG_TEST:
            nodes[nid][2] = node_at(p + 2)
            nodes[nid][3] = node_at(p + 1)
        else:  # delay for a jump
            nodes[nid][2] = node_at(p + ins.counter)

    built = []
    for kind, action, a, b in nodes:
        if kind == POST:
            built.append(Node(POST, action=action, true=a, false=b))
        elif kind == DELAY:
            built.append(Node(DELAY, next=a))
        else:
            built.append(Node(kind))
    return ThreadGraph(built, root)
