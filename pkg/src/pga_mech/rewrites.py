"""Verified rewrites on instruction sequences, code generation and search.

Every behavior-changing rewrite returns evidence: the verdict of comparing
the mechanistic behavior after against the one before.  A rewrite that
would worsen or change the functional behavior raises instead of returning
— rules are verified, not trusted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .extraction import extract_mechanistic
from .instructions import (
    BASIC,
    JUMP,
    NEG_TEST,
    POS_TEST,
    TERMINATION,
    TERMINATE,
    InstrSeq,
    Instruction,
    basic,
    canonical_position,
    instruction_at,
    jump,
    neg_test,
    pos_test,
    reachable_positions,
)
from .ordering import (
    ComparisonVerdict,
    compare,
    improves,
    strictly_improves,
)
from .threads import (
    D,
    DELAY,
    POST,
    S,
    ThreadGraph,
    collapse_divergence,
    functional_abstraction,
)

__all__ = [
    "RewriteError",
    "RewriteStep",
    "RewriteVerificationError",
    "SearchBounds",
    "codegen",
    "eliminate_jump_to_termination",
    "expand_test_chain",
    "has_adjacent_delays",
    "improve_step",
    "pareto_front",
    "rewrite_negtest_jump",
    "search_implementations",
    "splice",
    "unchain",
    "unroll",
]


class RewriteError(ValueError):
    """A rewrite precondition does not hold."""


class RewriteVerificationError(RuntimeError):
    """A rewrite produced a sequence that fails its post-hoc comparison."""


_ALLOWED_EVIDENCE = frozenset({
    ComparisonVerdict.EQUAL,
    ComparisonVerdict.STRICTLY_IMPROVES,
    ComparisonVerdict.MUTUALLY_EQUIVALENT,
})


@dataclass(frozen=True)
class RewriteStep:
    """One named, position-addressed transformation with its evidence."""

    rule: str
    site: int
    before: InstrSeq
    after: InstrSeq
    evidence: ComparisonVerdict

    def __post_init__(self) -> None:
        if self.evidence not in _ALLOWED_EVIDENCE:
            raise RewriteVerificationError(
                f"rewrite {self.rule!r} at {self.site} yielded verdict "
                f"{self.evidence.value!r}")


def _verified_step(rule: str, site: int, before: InstrSeq, after: InstrSeq) -> RewriteStep:
    verdict = compare(extract_mechanistic(after), extract_mechanistic(before))
    return RewriteStep(rule, site, before, after, verdict)


def _replace_at(seq: InstrSeq, p: int, ins: Instruction) -> InstrSeq:
    p = canonical_position(seq, p)
    n = seq.prefix_len
    if p < n:
        return InstrSeq(seq.prefix[:p] + (ins,) + seq.prefix[p + 1:], seq.cycle)
    if seq.cycle is None:
        raise ValueError("position past the end of a finite sequence")
    s = p - n
    return InstrSeq(seq.prefix, seq.cycle[:s] + (ins,) + seq.cycle[s + 1:])


# --- jump unchaining ---------------------------------------------------------

def _first_chained_jump(seq: InstrSeq) -> int | None:
    for p in sorted(reachable_positions(seq)):
        ins = instruction_at(seq, p)
        if ins.kind != JUMP or ins.counter == 0:
            continue
        t = canonical_position(seq, p + ins.counter)
        t_ins = instruction_at(seq, t)
        if t_ins is not None and t_ins.kind == JUMP and t != p:
            return p
    return None


def _resolve_chain(seq: InstrSeq, p: int) -> InstrSeq:
    """Rewrite the chained jump at ``p`` to land directly.  A chain ending
    in divergence becomes #0 from the prefix and a full-cycle self-jump
    from inside the cycle (that keeps the delay loop a delay loop)."""
    seen = {p}
    cur = p
    total = 0
    while True:
        ins = instruction_at(seq, cur)
        k = ins.counter
        if k == 0:
            replacement = jump(0)
            break
        total += k
        nxt = canonical_position(seq, cur + k)
        nxt_ins = instruction_at(seq, nxt)
        if nxt_ins is None or nxt_ins.kind != JUMP:
            replacement = jump(total)
            break
        if nxt in seen:
            if p >= seq.prefix_len:
                replacement = jump(seq.cycle_len)
            else:
                replacement = jump(0)
            break
        seen.add(nxt)
        cur = nxt
    return _replace_at(seq, p, replacement)


def unchain(seq: InstrSeq) -> tuple[InstrSeq, list[RewriteStep]]:
    """Remove chained jumps: afterwards no reachable jump lands on a jump at
    another position.  Each step carries its verified evidence."""
    steps: list[RewriteStep] = []
    while True:
        p = _first_chained_jump(seq)
        if p is None:
            return seq, steps
        after = _resolve_chain(seq, p)
        steps.append(_verified_step("unchain", p, seq, after))
        seq = after


def eliminate_jump_to_termination(seq: InstrSeq) -> tuple[InstrSeq, list[RewriteStep]]:
    """Replace every reachable jump that lands on ``!`` by ``!`` itself."""
    steps: list[RewriteStep] = []
    while True:
        site = None
        for p in sorted(reachable_positions(seq)):
            ins = instruction_at(seq, p)
            if ins.kind != JUMP or ins.counter == 0:
                continue
            t_ins = instruction_at(seq, p + ins.counter)
            if t_ins is not None and t_ins.kind == TERMINATION:
                site = p
                break
        if site is None:
            return seq, steps
        after = _replace_at(seq, site, TERMINATE)
        steps.append(_verified_step("eliminate-jump-to-termination", site, seq, after))
        seq = after


def has_adjacent_delays(g: ThreadGraph) -> bool:
    """True iff, after divergence collapse, some reachable delay node leads
    directly into another delay node (a two-delay residual)."""
    g = collapse_divergence(g)
    return any(node.kind == DELAY and g.nodes[node.next].kind == DELAY
               for node in g.nodes)


# --- local shape rewrites ----------------------------------------------------

def _region_span(seq: InstrSeq, p: int, length: int) -> None:
    """Reject spans that leave the prefix or wrap around the cycle."""
    n, m = seq.prefix_len, seq.cycle_len
    if p < n:
        if p + length > n:
            raise RewriteError("span crosses prefix/cycle boundary")
    else:
        if seq.cycle is None:
            raise RewriteError("span starts past the end of a finite sequence")
        if (p - n) + length > m:
            raise RewriteError("span crosses prefix/cycle boundary")


def rewrite_negtest_jump(seq: InstrSeq, p: int) -> InstrSeq:
    """Turn ``-b;!;#k`` at ``p`` into ``+b;#(k+1);!``.

    Requires that no reachable control transfer lands inside the span
    (positions p+1 and p+2); the same runs then execute the same jumps, so
    the mechanistic behavior is unchanged, which is verified.
    """
    p = canonical_position(seq, p)
    _region_span(seq, p, 3)
    i0 = instruction_at(seq, p)
    i1 = instruction_at(seq, p + 1)
    i2 = instruction_at(seq, p + 2)
    if (i0 is None or i0.kind != NEG_TEST
            or i1 is None or i1.kind != TERMINATION
            or i2 is None or i2.kind != JUMP or i2.counter < 1):
        raise RewriteError("site does not match the negative-test/termination/jump shape")
    interior = {p + 1, p + 2}
    for q in reachable_positions(seq):
        if q == p:
            continue
        ins = instruction_at(seq, q)
        if ins.kind == JUMP and ins.counter >= 1:
            if canonical_position(seq, q + ins.counter) in interior:
                raise RewriteError("a jump targets the rewritten span")
        elif ins.kind in (POS_TEST, NEG_TEST):
            if canonical_position(seq, q + 2) in interior:
                raise RewriteError("a test skips into the rewritten span")
    after = _replace_at(seq, p, pos_test(i0.action))
    after = _replace_at(after, p + 1, jump(i2.counter + 1))
    after = _replace_at(after, p + 2, TERMINATE)
    verdict = compare(extract_mechanistic(after), extract_mechanistic(seq))
    if verdict is not ComparisonVerdict.EQUAL:
        raise RewriteVerificationError(
            f"negative-test rewrite at {p} changed behavior: {verdict.value}")
    return after


def unroll(seq: InstrSeq) -> InstrSeq:
    """Double the repeating part; the unfolding is unchanged."""
    if seq.cycle is None:
        raise RewriteError("finite sequence has no repetition")
    return InstrSeq(seq.prefix, seq.cycle + seq.cycle)


def splice(seq: InstrSeq, at: int, remove_count: int,
           replacement: tuple[Instruction, ...] | list[Instruction]) -> InstrSeq:
    """Replace ``remove_count`` instructions starting at ``at`` and
    recompute every other jump counter so its target is preserved under the
    position shift.  Jumps from outside into the removed span are errors."""
    at = canonical_position(seq, at)
    replacement = tuple(replacement)
    if remove_count < 0:
        raise RewriteError("negative removal count")
    _region_span(seq, at, remove_count)
    n, m = seq.prefix_len, seq.cycle_len
    in_prefix = at < n
    delta = len(replacement) - remove_count
    span_start, span_end = at, at + remove_count

    if in_prefix:
        if n + delta == 0 and seq.cycle is None:
            raise RewriteError("splice would empty the sequence")
    else:
        if m + delta == 0:
            raise RewriteError("splice would empty the repeating part")
    new_m = m + delta if not in_prefix else m

    def map_pos(x: int) -> int:
        return x if x < span_start else x + delta

    def remap(pos: int, ins: Instruction) -> Instruction:
        if ins.kind != JUMP or ins.counter == 0:
            return ins
        target = pos + ins.counter
        if target < n or m == 0:
            canon_t = target
            copies = 0
        else:
            copies = (target - n) // m
            canon_t = n + (target - n) % m
        if span_start <= canon_t < span_end:
            raise RewriteError("jump into spliced region")
        t_new = map_pos(canon_t) + copies * new_m
        k_new = t_new - map_pos(pos)
        if k_new < 1:
            raise RewriteError("splice would reverse a jump")
        return jump(k_new)

    new_prefix: list[Instruction] = []
    for i, ins in enumerate(seq.prefix):
        if i == span_start:
            new_prefix.extend(replacement)
        if span_start <= i < span_end:
            continue
        new_prefix.append(remap(i, ins))
    new_cycle: list[Instruction] | None = None
    if seq.cycle is not None:
        new_cycle = []
        for s, ins in enumerate(seq.cycle):
            i = n + s
            if i == span_start:
                new_cycle.extend(replacement)
            if span_start <= i < span_end:
                continue
            new_cycle.append(remap(i, ins))
    return InstrSeq(tuple(new_prefix), tuple(new_cycle) if new_cycle is not None else None)


def expand_test_chain(seq: InstrSeq, p: int, r: int, new_target: int) -> InstrSeq:
    """Replace ``+b;#k;!`` at ``p`` by ``r`` copies of ``-b;!`` followed by
    ``+b;#k';!`` whose jump lands on ``new_target`` (a test on the same
    action).  Passing ``new_target == p`` retargets the next cycle copy of
    the replaced site itself.  Flyover jumps are recomputed by ``splice``.
    """
    p = canonical_position(seq, p)
    if r < 1:
        raise RewriteError("expansion count must be at least 1")
    _region_span(seq, p, 3)
    i0 = instruction_at(seq, p)
    i1 = instruction_at(seq, p + 1)
    i2 = instruction_at(seq, p + 2)
    if (i0 is None or i0.kind != POS_TEST
            or i1 is None or i1.kind != JUMP or i1.counter < 1
            or i2 is None or i2.kind != TERMINATION):
        raise RewriteError("site does not match the test/jump/termination shape")
    action = i0.action
    t = canonical_position(seq, new_target)
    if t != p:
        t_ins = instruction_at(seq, t)
        if (t_ins is None or t_ins.kind not in (POS_TEST, NEG_TEST)
                or t_ins.action != action):
            raise RewriteError("newTarget does not hold a matching test")
    n, m = seq.prefix_len, seq.cycle_len
    delta = 2 * r
    in_prefix = p < n
    new_n = n + delta if in_prefix else n
    new_m = m if in_prefix else m + delta
    jump_pos_new = p + 2 * r + 1
    if t == p:
        if in_prefix or seq.cycle is None:
            raise RewriteError("newTarget must lie ahead of the expanded site")
        target_new = p + new_m
    else:
        t_new = t if t < p else t + delta
        if t >= n and m:
            slot = t_new - new_n
            candidate = new_n + slot
            while candidate <= jump_pos_new:
                candidate += new_m
            target_new = candidate
        else:
            target_new = t_new
            if target_new <= jump_pos_new:
                raise RewriteError("newTarget must lie ahead of the expanded site")
    k_prime = target_new - jump_pos_new
    replacement = (neg_test(action), TERMINATE) * r + (pos_test(action), jump(k_prime), TERMINATE)
    return splice(seq, p, 3, replacement)


# --- improvement search ------------------------------------------------------

def _expansion_sites(seq: InstrSeq) -> list[int]:
    sites = []
    for p in sorted(reachable_positions(seq)):
        i0 = instruction_at(seq, p)
        if i0.kind != POS_TEST:
            continue
        n, m = seq.prefix_len, seq.cycle_len
        if p < n:
            if p + 3 > n:
                continue
        elif (p - n) + 3 > m:
            continue
        i1 = instruction_at(seq, p + 1)
        i2 = instruction_at(seq, p + 2)
        if (i1 is not None and i1.kind == JUMP and i1.counter >= 1
                and i2 is not None and i2.kind == TERMINATION):
            sites.append(p)
    return sites


def _test_positions(seq: InstrSeq, action: str) -> list[int]:
    return sorted(p for p in reachable_positions(seq)
                  if instruction_at(seq, p).kind in (POS_TEST, NEG_TEST)
                  and instruction_at(seq, p).action == action)


def improve_step(seq: InstrSeq) -> tuple[InstrSeq, RewriteStep] | None:
    """Search the rewrite catalog for the first strict improvement of the
    mechanistic behavior; None when the catalog finds nothing."""
    before = extract_mechanistic(seq)

    def strict(rule: str, site: int, candidate: InstrSeq) -> tuple[InstrSeq, RewriteStep] | None:
        if candidate == seq:
            return None
        verdict = compare(extract_mechanistic(candidate), before)
        if verdict is ComparisonVerdict.STRICTLY_IMPROVES:
            return candidate, RewriteStep(rule, site, seq, candidate, verdict)
        return None

    unchained, usteps = unchain(seq)
    if usteps:
        found = strict("unchain", usteps[0].site, unchained)
        if found:
            return found
    eliminated, esteps = eliminate_jump_to_termination(seq)
    if esteps:
        found = strict("eliminate-jump-to-termination", esteps[0].site, eliminated)
        if found:
            return found
    for p in sorted(reachable_positions(seq)):
        ins = instruction_at(seq, p)
        if ins.kind != NEG_TEST:
            continue
        try:
            candidate = rewrite_negtest_jump(seq, p)
        except RewriteError:
            continue
        candidate, _ = unchain(candidate)
        found = strict("negtest-jump+unchain", p, candidate)
        if found:
            return found
    bases = [seq]
    if seq.cycle is not None:
        bases.append(unroll(seq))
    for base in bases:
        for p in _expansion_sites(base):
            action = instruction_at(base, p).action
            for t in _test_positions(base, action):
                for r in (1, 2, 3, 4):
                    try:
                        candidate = expand_test_chain(base, p, r, t)
                    except RewriteError:
                        continue
                    found = strict("expand-test-chain", p, candidate)
                    if found:
                        return found
    return None


# --- code generation ---------------------------------------------------------

def _has_cycle(g: ThreadGraph) -> bool:
    color = [0] * len(g.nodes)  # 0 unseen, 1 on stack, 2 done
    stack: list[tuple[int, int]] = [(g.root, 0)]
    color[g.root] = 1
    while stack:
        node, edge = stack[-1]
        succs = tuple(dict.fromkeys(g.nodes[node].successors()))
        if edge >= len(succs):
            color[node] = 2
            stack.pop()
            continue
        stack[-1] = (node, edge + 1)
        s = succs[edge]
        if color[s] == 1:
            return True
        if color[s] == 0:
            color[s] = 1
            stack.append((s, 0))
    return False


def _topological(g: ThreadGraph) -> list[int]:
    # successors walked last-to-first so the reversed postorder lays the
    # true branch out before the false branch
    order: list[int] = []
    state = [0] * len(g.nodes)
    stack: list[tuple[int, int]] = [(g.root, 0)]
    state[g.root] = 1
    while stack:
        node, edge = stack[-1]
        succs = tuple(dict.fromkeys(reversed(g.nodes[node].successors())))
        if edge >= len(succs):
            order.append(node)
            stack.pop()
            continue
        stack[-1] = (node, edge + 1)
        s = succs[edge]
        if state[s] == 0:
            state[s] = 1
            stack.append((s, 0))
    order.reverse()
    return order


def codegen(p: ThreadGraph) -> InstrSeq:
    """Emit a fixed-width three-instruction block per node: ``!;!;!`` for S,
    ``#0;#0;#0`` for D, and ``+a;#jt;#jf`` for a branch, with jump counters
    wrapping through the repetition when the graph is cyclic."""
    if any(node.kind == DELAY for node in p.nodes):
        raise RewriteError("thread contains delays")
    cyclic = _has_cycle(p)
    order = list(range(len(p.nodes))) if cyclic else _topological(p)
    block = {node: i for i, node in enumerate(order)}
    total = 3 * len(order)
    out: list[Instruction] = []
    for node_id in order:
        node = p.nodes[node_id]
        base = 3 * block[node_id]
        if node.kind == S:
            out.extend((TERMINATE, TERMINATE, TERMINATE))
        elif node.kind == D:
            out.extend((jump(0), jump(0), jump(0)))
        else:
            jt = 3 * block[node.true] - (base + 1)
            jf = 3 * block[node.false] - (base + 2)
            if jt <= 0:
                jt += total
            if jf <= 0:
                jf += total
            out.extend((pos_test(node.action), jump(jt), jump(jf)))
    if cyclic:
        return InstrSeq((), tuple(out))
    return InstrSeq(tuple(out))


# --- bounded enumeration -----------------------------------------------------

@dataclass(frozen=True)
class SearchBounds:
    """Desk-scale enumeration limits for implementation search."""

    max_prefix: int
    max_cycle: int
    alphabet: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if self.max_prefix < 0 or self.max_cycle < 0:
            raise ValueError("bounds must be nonnegative")
        if self.max_prefix + self.max_cycle < 1:
            raise ValueError("bounds admit no sequence")
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")


def _slot_options(total: int, alphabet: tuple[str, ...]) -> list[Instruction]:
    # jump counters above the total length only duplicate smaller ones
    # (falling off the end / wrapping the cycle), so the universe is
    # complete with counters up to the candidate's length
    out: list[Instruction] = [basic(a) for a in alphabet]
    out.extend(pos_test(a) for a in alphabet)
    out.extend(neg_test(a) for a in alphabet)
    out.append(TERMINATE)
    out.extend(jump(k) for k in range(total + 1))
    return out


def _fa_consistent(slots: list, n: int, m: int, target: ThreadGraph) -> bool:
    """Conservative check that the (possibly partial) sequence can still
    denote the delay-erased ``target`` behavior.  Unassigned slots (the
    ``Ellipsis`` marker) pass; a definite mismatch on assigned slots fails."""

    def slot_of(pos: int) -> int | None:
        if pos < n:
            return pos
        if m == 0:
            return None  # off the end: deadlock
        return n + (pos - n) % m

    seen: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = [(0, target.root)]
    while stack:
        pos, tnode = stack.pop()
        # resolve jumps transparently; None outcome means deadlock
        chase: set[int] = set()
        outcome = None
        while True:
            s = slot_of(pos)
            if s is None:
                outcome = None
                break
            ins = slots[s]
            if ins is Ellipsis:
                outcome = Ellipsis  # unassigned: no verdict on this branch
                break
            if ins.kind != JUMP:
                outcome = ins
                pos = s
                break
            if ins.counter == 0 or s in chase:
                outcome = None
                break
            chase.add(s)
            pos = s + ins.counter
        if outcome is Ellipsis:
            continue
        node = target.nodes[tnode]
        if outcome is None:
            if node.kind != D:
                return False
            continue
        if (pos, tnode) in seen:
            continue
        seen.add((pos, tnode))
        if outcome.kind == TERMINATION:
            if node.kind != S:
                return False
            continue
        # an action instruction
        if node.kind != POST or node.action != outcome.action:
            return False
        if outcome.kind == BASIC:
            stack.append((pos + 1, node.true))
            stack.append((pos + 1, node.false))
        elif outcome.kind == POS_TEST:
            stack.append((pos + 1, node.true))
            stack.append((pos + 2, node.false))
        else:
            stack.append((pos + 2, node.true))
            stack.append((pos + 1, node.false))
    return True


def search_implementations(p: ThreadGraph, bounds: SearchBounds) -> list[InstrSeq]:
    """Enumerate every sequence within the bounds (prefix length, cycle
    length, alphabet, jump counters up to the candidate length) and return
    those whose mechanistic behavior ``p`` improves, in deterministic
    length-lexicographic order."""
    fa_target = functional_abstraction(p)
    alphabet = tuple(sorted(set(bounds.alphabet)))
    found: list[InstrSeq] = []
    for total in range(1, bounds.max_prefix + bounds.max_cycle + 1):
        for m in range(0, min(total, bounds.max_cycle) + 1):
            n = total - m
            if n > bounds.max_prefix:
                continue
            options = _slot_options(total, alphabet)
            slots: list = [Ellipsis] * total

            def assign(i: int) -> None:
                if i == total:
                    seq = InstrSeq(tuple(slots[:n]), tuple(slots[n:]) if m else None)
                    if improves(p, extract_mechanistic(seq)):
                        found.append(seq)
                    return
                for ins in options:
                    slots[i] = ins
                    if _fa_consistent(slots, n, m, fa_target):
                        assign(i + 1)
                slots[i] = Ellipsis

            assign(0)
    return found


def pareto_front(seqs: list[InstrSeq]) -> list[InstrSeq]:
    """Members not strictly improved by any other member."""
    graphs = [extract_mechanistic(s) for s in seqs]
    keep = []
    for i, s in enumerate(seqs):
        if not any(strictly_improves(graphs[j], graphs[i])
                   for j in range(len(seqs)) if j != i):
            keep.append(s)
    return keep
