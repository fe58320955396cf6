"""Shared test machinery: random generators, a reference interpreter for
co-simulation, and the brute-force rule-closure oracle for the improvement
preorder on finite thread terms."""

from __future__ import annotations

import random

from pga_mech import (
    InstrSeq,
    ThreadGraph,
    basic,
    jump,
    make_d,
    make_delay,
    make_post,
    make_s,
    neg_test,
    parse_pga,
    pos_test,
    TERMINATE,
)
from pga_mech.instructions import (
    BASIC,
    NEG_TEST,
    POS_TEST,
    TERMINATION,
    instruction_at,
)
from pga_mech.threads import D, DELAY, POST, S, Node

ACTIONS = ("a", "b", "c")

# the running example and its improvement chain; the chain members are the
# outputs of the expansion rewrite, each certified strictly improving
X_CHAIN_START = "(+a;#4;+b;#4;!)^w"
Y_WITNESS = "(+a;#6;-b;!;+b;#4;!)^w"
Z_WITNESS = "(+a;#10;-b;!;-b;!;-b;!;+b;#4;!)^w"


def random_seq(rng: random.Random, max_prefix: int = 8, max_cycle: int = 6,
               actions: tuple[str, ...] = ACTIONS) -> InstrSeq:
    while True:
        n = rng.randint(0, max_prefix)
        m = rng.randint(0, max_cycle)
        if n + m:
            break
    total = n + m

    def instr():
        roll = rng.random()
        if roll < 0.25:
            return basic(rng.choice(actions))
        if roll < 0.45:
            return pos_test(rng.choice(actions))
        if roll < 0.65:
            return neg_test(rng.choice(actions))
        if roll < 0.75:
            return TERMINATE
        return jump(rng.randint(0, total + 2))

    prefix = tuple(instr() for _ in range(n))
    cycle = tuple(instr() for _ in range(m)) if m else None
    return InstrSeq(prefix, cycle)


def random_graph(rng: random.Random, max_nodes: int = 6,
                 actions: tuple[str, ...] = ("a", "b"),
                 allow_delay: bool = True) -> ThreadGraph:
    count = rng.randint(1, max_nodes)
    nodes = []
    for _ in range(count):
        roll = rng.random()
        if roll < 0.2:
            nodes.append(Node(S))
        elif roll < 0.35:
            nodes.append(Node(D))
        elif allow_delay and roll < 0.5:
            nodes.append(Node(DELAY, next=rng.randrange(count)))
        else:
            nodes.append(Node(POST, action=rng.choice(actions),
                              true=rng.randrange(count), false=rng.randrange(count)))
    return ThreadGraph(nodes, 0)


# --- reference interpreter ---------------------------------------------------

def run_sequence(seq: InstrSeq, replies: list[bool], budget: int):
    """Execute a sequence; each executed jump is one 'delay' event, each
    action one ('act', name) event.  Returns (events, outcome)."""
    events = []
    pos = 0
    reply_idx = 0
    while len(events) < budget:
        ins = instruction_at(seq, pos)
        if ins is None:
            return events, "D"
        if ins.kind == TERMINATION:
            return events, "S"
        if ins.kind == BASIC:
            events.append(("act", ins.action))
            reply_idx += 1
            pos += 1
        elif ins.kind == POS_TEST:
            events.append(("act", ins.action))
            r = replies[reply_idx]
            reply_idx += 1
            pos += 1 if r else 2
        elif ins.kind == NEG_TEST:
            events.append(("act", ins.action))
            r = replies[reply_idx]
            reply_idx += 1
            pos += 2 if r else 1
        else:
            if ins.counter == 0:
                return events, "D"
            events.append("delay")
            pos += ins.counter
    return events, "ongoing"


def run_graph(g: ThreadGraph, replies: list[bool], budget: int):
    """Walk a behavior graph under the same reply stream and event budget."""
    events = []
    node = g.root
    reply_idx = 0
    while len(events) < budget:
        nd = g.nodes[node]
        if nd.kind == S:
            return events, "S"
        if nd.kind == D:
            return events, "D"
        if nd.kind == DELAY:
            events.append("delay")
            node = nd.next
        else:
            events.append(("act", nd.action))
            r = replies[reply_idx]
            reply_idx += 1
            node = nd.true if r else nd.false
    return events, "ongoing"


# --- finite thread terms and the rule-closure oracle -------------------------

S_T = ("S",)
D_T = ("D",)


def sig(t):
    return ("sig", t)


def postt(action, left, right):
    return ("post", action, left, right)


def sig_n(t, n):
    for _ in range(n):
        t = sig(t)
    return t


def term_to_graph(t) -> ThreadGraph:
    if t == S_T:
        return make_s()
    if t == D_T:
        return make_d()
    if t[0] == "sig":
        return make_delay(term_to_graph(t[1]))
    return make_post(t[1], term_to_graph(t[2]), term_to_graph(t[3]))


def subterms(t):
    yield t
    if t[0] == "sig":
        yield from subterms(t[1])
    elif t[0] == "post":
        yield from subterms(t[2])
        yield from subterms(t[3])


def term_universe():
    """All terms of constructor depth <= 4 over actions {a, b} with delay
    runs <= 2 and one branching layer; subterm-closed by construction."""
    atoms = [sig_n(c, i) for c in (S_T, D_T) for i in range(3)]
    terms = list(atoms)
    for x in "ab":
        for i in range(3):
            for j in range(3 - i):
                for k in range(3 - i):
                    for u in (S_T, D_T):
                        for v in (S_T, D_T):
                            terms.append(sig_n(postt(x, sig_n(u, j), sig_n(v, k)), i))
    return terms


def oracle_closure(terms):
    """Least fixpoint of the improvement rules over a finite term set:
    reflexivity, adding one delay on the right, delay-over-deadlock
    absorption, congruence under branching and under the delay operator,
    and transitivity.  Returns (rows, index) with rows[i] bit j set iff
    terms[i] improves terms[j]."""
    idx = {t: i for i, t in enumerate(terms)}
    n = len(terms)
    rows = [0] * n

    def add(i, j):
        rows[i] |= (1 << j)

    for i in range(n):
        add(i, i)
    for t, i in idx.items():
        if t[0] == "sig" and t[1] in idx:
            add(idx[t[1]], i)
    if sig(D_T) in idx:
        add(idx[sig(D_T)], idx[D_T])
    sigs = [(i, idx[t[1]]) for t, i in idx.items() if t[0] == "sig" and t[1] in idx]
    posts = [(i, t) for t, i in idx.items() if t[0] == "post"]
    while True:
        before = list(rows)
        for i1, u1 in sigs:
            for i2, u2 in sigs:
                if rows[u1] >> u2 & 1:
                    add(i1, i2)
        for i1, t1 in posts:
            for i2, t2 in posts:
                if t1[1] != t2[1]:
                    continue
                if (rows[idx[t1[2]]] >> idx[t2[2]] & 1) and (rows[idx[t1[3]]] >> idx[t2[3]] & 1):
                    add(i1, i2)
        for k in range(n):
            bit = 1 << k
            rk = rows[k]
            for i in range(n):
                if rows[i] & bit:
                    rows[i] |= rk
        if rows == before:
            return rows, idx


def strip_delays(t):
    n = 0
    while t[0] == "sig":
        n += 1
        t = t[1]
    return n, t


def closure_set_for_pair(s, t):
    """A term set over which the rule closure is complete for deciding
    ``s`` against ``t``: all subterms plus every delay tower (up to the
    tallest run seen plus one) over each stripped subterm."""
    base = set(subterms(s)) | set(subterms(t))
    height = 1
    for u in base:
        d, _ = strip_delays(u)
        height = max(height, d)
    out = set(base)
    for u in base:
        _, core = strip_delays(u)
        for c in range(height + 1):
            out.add(sig_n(core, c))
    return sorted(out, key=repr)


def random_term(rng: random.Random, depth: int = 4, max_run: int = 2):
    if depth <= 0:
        return rng.choice((S_T, D_T))
    roll = rng.random()
    if roll < 0.3:
        return rng.choice((S_T, D_T))
    if roll < 0.6:
        run = rng.randint(1, min(max_run, depth))
        inner = random_term_no_sig(rng, depth - run)
        return sig_n(inner, run)
    return postt(rng.choice("ab"), random_term(rng, depth - 1, max_run),
                 random_term(rng, depth - 1, max_run))


def random_term_no_sig(rng: random.Random, depth: int):
    if depth <= 0:
        return rng.choice((S_T, D_T))
    if rng.random() < 0.4:
        return rng.choice((S_T, D_T))
    return postt(rng.choice("ab"), random_term(rng, depth - 1),
                 random_term(rng, depth - 1))


def chain_witnesses():
    return (parse_pga(X_CHAIN_START), parse_pga(Y_WITNESS), parse_pga(Z_WITNESS))
