"""Behavior graphs: finite rooted graphs of termination, deadlock, delay
and branch-on-action nodes.

A graph denotes a (possibly infinite-unfolding) regular behavior.  Node
kinds: ``S`` successful termination, ``D`` deadlock, ``delay`` one unit of
unobservable processing before its successor, ``post`` perform an action
and branch on the Boolean reply.  Graphs are immutable; the constructor
garbage-collects unreachable nodes and renumbers breadth-first from the
root, so structurally equal graphs compare equal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

__all__ = [
    "S",
    "D",
    "DELAY",
    "POST",
    "Node",
    "ThreadGraph",
    "ThreadSyntaxError",
    "bisimilar",
    "collapse_divergence",
    "functional_abstraction",
    "graph_to_dict",
    "make_d",
    "make_delay",
    "make_post",
    "make_prefix",
    "make_s",
    "minimize",
    "parse_thread",
    "print_thread",
    "to_dot",
    "to_json",
]

S = "S"
D = "D"
DELAY = "delay"
POST = "post"

_RESERVED_NAMES = {"S", "D", "sigma"}


@dataclass(frozen=True)
class Node:
    """One graph node.  ``next`` is the delay successor; ``true``/``false``
    are the branch successors of a post node."""

    kind: str
    action: str | None = None
    next: int | None = None
    true: int | None = None
    false: int | None = None

    def successors(self) -> tuple[int, ...]:
        if self.kind == DELAY:
            return (self.next,)
        if self.kind == POST:
            return (self.true, self.false)
        return ()


class ThreadGraph:
    """Finite rooted behavior graph, normalized at construction."""

    __slots__ = ("nodes", "root")

    def __init__(self, nodes, root: int):
        nodes = list(nodes)
        if not 0 <= root < len(nodes):
            raise ValueError("root is not a node")
        for node in nodes:
            for s in node.successors():
                if s is None or not 0 <= s < len(nodes):
                    raise ValueError("edge target is not a node")
        order = [root]
        index = {root: 0}
        qi = 0
        while qi < len(order):
            for s in nodes[order[qi]].successors():
                if s not in index:
                    index[s] = len(order)
                    order.append(s)
            qi += 1
        rebuilt = []
        for old in order:
            node = nodes[old]
            if node.kind == DELAY:
                rebuilt.append(Node(DELAY, next=index[node.next]))
            elif node.kind == POST:
                rebuilt.append(Node(POST, action=node.action,
                                    true=index[node.true], false=index[node.false]))
            else:
                rebuilt.append(Node(node.kind))
        self.nodes: tuple[Node, ...] = tuple(rebuilt)
        self.root: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        return isinstance(other, ThreadGraph) and self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash(self.nodes)

    def __repr__(self) -> str:
        return f"ThreadGraph({len(self.nodes)} nodes)"

    def __str__(self) -> str:
        return print_thread(self)


# --- small constructors ----------------------------------------------------

def make_s() -> ThreadGraph:
    return ThreadGraph([Node(S)], 0)


def make_d() -> ThreadGraph:
    return ThreadGraph([Node(D)], 0)


def make_delay(inner: ThreadGraph, count: int = 1) -> ThreadGraph:
    """Prepend ``count`` delay nodes to the root of ``inner``."""
    if count < 0:
        raise ValueError("delay count must be nonnegative")
    shift = count
    nodes = [Node(DELAY, next=i + 1) for i in range(count)]
    for node in inner.nodes:
        if node.kind == DELAY:
            nodes.append(Node(DELAY, next=node.next + shift))
        elif node.kind == POST:
            nodes.append(Node(POST, action=node.action,
                              true=node.true + shift, false=node.false + shift))
        else:
            nodes.append(node)
    return ThreadGraph(nodes, 0 if count else inner.root)


def make_post(action: str, on_true: ThreadGraph, on_false: ThreadGraph) -> ThreadGraph:
    """Branch on ``action``: continue as ``on_true``/``on_false``."""
    t_shift = 1
    f_shift = 1 + len(on_true.nodes)
    nodes = [Node(POST, action=action, true=on_true.root + t_shift,
                  false=on_false.root + f_shift)]
    for g, shift in ((on_true, t_shift), (on_false, f_shift)):
        for node in g.nodes:
            if node.kind == DELAY:
                nodes.append(Node(DELAY, next=node.next + shift))
            elif node.kind == POST:
                nodes.append(Node(POST, action=node.action,
                                  true=node.true + shift, false=node.false + shift))
            else:
                nodes.append(node)
    return ThreadGraph(nodes, 0)


def make_prefix(action: str, inner: ThreadGraph) -> ThreadGraph:
    """Action prefixing: perform ``action``, then continue as ``inner``
    regardless of the reply (both branches share one node)."""
    shift = 1
    nodes = [Node(POST, action=action, true=inner.root + shift, false=inner.root + shift)]
    for node in inner.nodes:
        if node.kind == DELAY:
            nodes.append(Node(DELAY, next=node.next + shift))
        elif node.kind == POST:
            nodes.append(Node(POST, action=node.action,
                              true=node.true + shift, false=node.false + shift))
        else:
            nodes.append(node)
    return ThreadGraph(nodes, 0)


# --- bisimulation and minimization -----------------------------------------

def _refine(nodes: list[Node]) -> list[int]:
    """Partition refinement; returns a block id per node.  Two nodes share a
    block iff they are bisimilar (delay steps matched one-for-one)."""
    keys = {}
    blocks = []
    for node in nodes:
        key = (node.kind, node.action)
        if key not in keys:
            keys[key] = len(keys)
        blocks.append(keys[key])
    while True:
        sigs = {}
        new_blocks = []
        for i, node in enumerate(nodes):
            sig = (blocks[i], tuple(blocks[s] for s in node.successors()))
            if sig not in sigs:
                sigs[sig] = len(sigs)
            new_blocks.append(sigs[sig])
        if new_blocks == blocks:
            return blocks
        blocks = new_blocks


def bisimilar(g1: ThreadGraph, g2: ThreadGraph) -> bool:
    """Delay-exact bisimulation: related nodes have identical kind (and
    action), related delay nodes have related successors, related post nodes
    have pairwise related branch successors.  A delay is never absorbed."""
    offset = len(g1.nodes)
    union: list[Node] = list(g1.nodes)
    for node in g2.nodes:
        if node.kind == DELAY:
            union.append(Node(DELAY, next=node.next + offset))
        elif node.kind == POST:
            union.append(Node(POST, action=node.action,
                              true=node.true + offset, false=node.false + offset))
        else:
            union.append(node)
    blocks = _refine(union)
    return blocks[g1.root] == blocks[g2.root + offset]


def minimize(g: ThreadGraph) -> ThreadGraph:
    """Smallest graph bisimilar to ``g`` (quotient by bisimilarity)."""
    blocks = _refine(list(g.nodes))
    rep: dict[int, int] = {}
    for i in range(len(g.nodes)):
        rep.setdefault(blocks[i], i)
    block_ids = sorted(rep)
    new_index = {b: i for i, b in enumerate(block_ids)}
    nodes = []
    for b in block_ids:
        node = g.nodes[rep[b]]
        if node.kind == DELAY:
            nodes.append(Node(DELAY, next=new_index[blocks[node.next]]))
        elif node.kind == POST:
            nodes.append(Node(POST, action=node.action,
                              true=new_index[blocks[node.true]],
                              false=new_index[blocks[node.false]]))
        else:
            nodes.append(node)
    return ThreadGraph(nodes, new_index[blocks[g.root]])


# --- divergence collapse and delay erasure ----------------------------------

def collapse_divergence(g: ThreadGraph) -> ThreadGraph:
    """Replace every node from which no S and no post node is reachable by a
    single shared D node.  Pure-delay loops and delay chains into D all
    become D; the functional behavior is unchanged."""
    n = len(g.nodes)
    live = [False] * n
    stack = []
    delay_parents: dict[int, list[int]] = {}
    for i, node in enumerate(g.nodes):
        if node.kind in (S, POST):
            live[i] = True
            stack.append(i)
        elif node.kind == DELAY:
            delay_parents.setdefault(node.next, []).append(i)
    while stack:
        i = stack.pop()
        for parent in delay_parents.get(i, ()):
            if not live[parent]:
                live[parent] = True
                stack.append(parent)
    if not live[g.root]:
        return make_d()
    nodes = list(g.nodes)
    d_shared = None
    for i in range(n):
        node = nodes[i]
        if not live[i]:
            continue
        if node.kind == POST:
            t, f = node.true, node.false
            if not live[t] or not live[f]:
                if d_shared is None:
                    d_shared = len(nodes)
                    nodes.append(Node(D))
                t = t if live[t] else d_shared
                f = f if live[f] else d_shared
                nodes[i] = Node(POST, action=node.action, true=t, false=f)
    return ThreadGraph(nodes, g.root)


def functional_abstraction(g: ThreadGraph) -> ThreadGraph:
    """Erase all delays: collapse divergence, then route every edge into a
    delay node to that node's first non-delay descendant."""
    g = collapse_divergence(g)
    resolve: dict[int, int] = {}

    def target(i: int) -> int:
        trail = []
        while g.nodes[i].kind == DELAY and i not in resolve:
            trail.append(i)
            i = g.nodes[i].next
        final = resolve.get(i, i)
        for t in trail:
            resolve[t] = final
        return final

    nodes = []
    index = {}
    for i, node in enumerate(g.nodes):
        if node.kind != DELAY:
            index[i] = len(nodes)
            nodes.append(node)
    rebuilt = []
    for node in nodes:
        if node.kind == POST:
            rebuilt.append(Node(POST, action=node.action,
                                true=index[target(node.true)],
                                false=index[target(node.false)]))
        else:
            rebuilt.append(node)
    return ThreadGraph(rebuilt, index[target(g.root)])


# --- text format ------------------------------------------------------------

class ThreadSyntaxError(ValueError):
    """Malformed thread-equation text."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


_EQ_RE = re.compile(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*=\s*(.*?)\s*\Z")
_SIGMA_RE = re.compile(r"sigma\s*\(\s*([A-Za-z][A-Za-z0-9_]*)\s*\)\Z")
_POST_RE = re.compile(
    r"([a-z][A-Za-z0-9_.]*)\s*\?\s*([A-Za-z][A-Za-z0-9_]*)\s*:\s*([A-Za-z][A-Za-z0-9_]*)\Z")
_PREFIX_RE = re.compile(r"([a-z][A-Za-z0-9_.]*)\s*\.\s*([A-Za-z][A-Za-z0-9_]*)\Z")


def parse_thread(text: str) -> ThreadGraph:
    """Parse thread equations, one per line (``;`` also separates equations,
    ``#`` starts a comment).  The first equation's left-hand side is the
    root.  Forms: ``S``, ``D``, ``sigma(N)``, ``a ? N1 : N2`` and the
    action-prefix sugar ``a . N``."""
    defs: dict[str, tuple] = {}
    order: list[str] = []
    for lineno, raw_line in enumerate(text.split("\n"), 1):
        for segment in raw_line.split(";"):
            hash_idx = segment.find("#")
            if hash_idx >= 0:
                segment = segment[:hash_idx]
            if not segment.strip():
                continue
            m = _EQ_RE.match(segment)
            if not m:
                raise ThreadSyntaxError(f"expected 'NAME = ...', got {segment.strip()!r}", lineno)
            name, rhs = m.group(1), m.group(2)
            if name in _RESERVED_NAMES:
                raise ThreadSyntaxError(f"{name!r} is reserved", lineno)
            if name in defs:
                raise ThreadSyntaxError(f"duplicate definition of {name!r}", lineno)
            if rhs == "S":
                defs[name] = (S,)
            elif rhs == "D":
                defs[name] = (D,)
            elif (m2 := _SIGMA_RE.match(rhs)):
                defs[name] = (DELAY, m2.group(1))
            elif (m2 := _POST_RE.match(rhs)):
                defs[name] = (POST, m2.group(1), m2.group(2), m2.group(3))
            elif (m2 := _PREFIX_RE.match(rhs)):
                defs[name] = (POST, m2.group(1), m2.group(2), m2.group(2))
            else:
                raise ThreadSyntaxError(f"cannot parse right-hand side {rhs!r}", lineno)
            order.append(name)
    if not order:
        raise ThreadSyntaxError("no equations")
    index = {name: i for i, name in enumerate(order)}

    def ref(name: str) -> int:
        if name not in index:
            raise ThreadSyntaxError(f"undefined name {name!r}")
        return index[name]

    nodes = []
    for name in order:
        d = defs[name]
        if d[0] == S:
            nodes.append(Node(S))
        elif d[0] == D:
            nodes.append(Node(D))
        elif d[0] == DELAY:
            nodes.append(Node(DELAY, next=ref(d[1])))
        else:
            nodes.append(Node(POST, action=d[1], true=ref(d[2]), false=ref(d[3])))
    return ThreadGraph(nodes, 0)


def print_thread(g: ThreadGraph) -> str:
    """Render equations, one per node in graph order; round-trips with
    ``parse_thread`` up to node naming."""
    lines = []
    for i, node in enumerate(g.nodes):
        if node.kind == S:
            lines.append(f"T{i} = S")
        elif node.kind == D:
            lines.append(f"T{i} = D")
        elif node.kind == DELAY:
            lines.append(f"T{i} = sigma(T{node.next})")
        else:
            lines.append(f"T{i} = {node.action} ? T{node.true} : T{node.false}")
    return "\n".join(lines)


# --- exports ----------------------------------------------------------------

def to_dot(g: ThreadGraph) -> str:
    """DOT digraph: solid edge = true branch, dashed edge = false branch."""
    lines = ["digraph thread {"]
    for i, node in enumerate(g.nodes):
        if node.kind in (S, D):
            lines.append(f'  n{i} [label="{node.kind}", shape=box];')
        elif node.kind == DELAY:
            lines.append(f'  n{i} [label="σ"];')
        else:
            lines.append(f'  n{i} [label="{node.action}"];')
    for i, node in enumerate(g.nodes):
        if node.kind == DELAY:
            lines.append(f"  n{i} -> n{node.next};")
        elif node.kind == POST:
            lines.append(f"  n{i} -> n{node.true} [style=solid];")
            lines.append(f"  n{i} -> n{node.false} [style=dashed];")
    lines.append("}")
    return "\n".join(lines)


def graph_to_dict(g: ThreadGraph) -> dict:
    nodes = []
    for i, node in enumerate(g.nodes):
        entry: dict = {"id": i, "kind": node.kind}
        if node.kind == POST:
            entry["action"] = node.action
            entry["true"] = node.true
            entry["false"] = node.false
        elif node.kind == DELAY:
            entry["next"] = node.next
        nodes.append(entry)
    return {"root": g.root, "nodes": nodes}


def to_json(g: ThreadGraph) -> str:
    return json.dumps(graph_to_dict(g))
