"""Command-line interface.

Exit codes: 0 success / relation holds, 1 relation does not hold,
2 usage or parse error, 3 internal verification failure of a rewrite.
"""

from __future__ import annotations

import sys

import click

from .extraction import extract_functional, extract_mechanistic
from .instructions import InstrSeq, PgaSyntaxError, parse_pga, print_pga
from .ordering import (
    ComparisonVerdict,
    compare,
    is_implementation,
    is_pre_extraction,
)
from .rewrites import (
    RewriteError,
    RewriteVerificationError,
    SearchBounds,
    codegen,
    eliminate_jump_to_termination,
    improve_step,
    pareto_front,
    search_implementations,
    unchain,
    unroll,
)
from .threads import (
    DELAY,
    ThreadGraph,
    ThreadSyntaxError,
    bisimilar,
    functional_abstraction,
    minimize as minimize_graph,
    parse_thread,
    print_thread,
    to_dot,
    to_json,
)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_pga(text: str) -> InstrSeq:
    try:
        return parse_pga(text)
    except PgaSyntaxError as exc:
        _fail(2, str(exc))


def _load_thread_text(text: str) -> ThreadGraph:
    try:
        return parse_thread(text)
    except ThreadSyntaxError as exc:
        _fail(2, str(exc))


def _load_thread_file(path: str) -> ThreadGraph:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        _fail(2, str(exc))
    return _load_thread_text(text)


def _render(graph: ThreadGraph, fmt: str) -> str:
    if fmt == "dot":
        return to_dot(graph)
    if fmt == "json":
        return to_json(graph)
    return print_thread(graph)


@click.group()
def main() -> None:
    """Analyze, compare and rewrite single-pass instruction sequences."""


@main.command("extract")
@click.option("--functional", "mode", flag_value="functional")
@click.option("--mechanistic", "mode", flag_value="mechanistic")
@click.option("--pga", "pga_text", default=None, help="Instruction sequence text.")
@click.option("--file", "path", default=None, type=click.Path(), help="Read the sequence from a file.")
@click.option("--format", "fmt", type=click.Choice(["eqn", "dot", "json"]), default="eqn")
@click.option("--minimize", "do_minimize", is_flag=True)
def cmd_extract(mode, pga_text, path, fmt, do_minimize) -> None:
    """Print the behavior extracted from an instruction sequence."""
    if mode is None:
        _fail(2, "one of --functional/--mechanistic is required")
    if (pga_text is None) == (path is None):
        _fail(2, "exactly one of --pga/--file is required")
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                pga_text = handle.read()
        except OSError as exc:
            _fail(2, str(exc))
    seq = _load_pga(pga_text)
    graph = extract_functional(seq) if mode == "functional" else extract_mechanistic(seq)
    if do_minimize:
        graph = minimize_graph(graph)
    click.echo(_render(graph, fmt))


_LEFT_HOLDS = {
    ComparisonVerdict.EQUAL,
    ComparisonVerdict.STRICTLY_IMPROVES,
    ComparisonVerdict.MUTUALLY_EQUIVALENT,
}


@main.command("compare")
@click.option("--pga", "pga_texts", multiple=True)
@click.option("--thread", "thread_texts", multiple=True)
@click.option("--functional", "functional", is_flag=True,
              help="Compare delay-erased behaviors instead of mechanistic ones.")
def cmd_compare(pga_texts, thread_texts, functional) -> None:
    """Compare two behaviors; sequence inputs are extracted first.

    With one --pga and one --thread, the sequence is the left side.
    """
    if len(pga_texts) + len(thread_texts) != 2:
        _fail(2, "exactly two inputs are required (--pga/--thread)")
    graphs = [extract_mechanistic(_load_pga(text)) for text in pga_texts]
    graphs.extend(_load_thread_text(text) for text in thread_texts)
    if functional:
        graphs = [functional_abstraction(g) for g in graphs]
    verdict = compare(graphs[0], graphs[1])
    click.echo(verdict.value)
    sys.exit(0 if verdict in _LEFT_HOLDS else 1)


@main.command("check")
@click.argument("relation", type=click.Choice(["implements", "pre-extracts"]))
@click.option("--pga", "pga_text", required=True)
@click.option("--thread-file", "thread_path", required=True, type=click.Path())
def cmd_check(relation, pga_text, thread_path) -> None:
    """Check whether a sequence implements / pre-extracts a thread."""
    seq = _load_pga(pga_text)
    graph = _load_thread_file(thread_path)
    held = (is_implementation(seq, graph) if relation == "implements"
            else is_pre_extraction(seq, graph))
    click.echo("yes" if held else "no")
    sys.exit(0 if held else 1)


@main.command("rewrite")
@click.argument("operation", type=click.Choice(["unchain", "no-jump-to-term", "unroll", "improve"]))
@click.option("--pga", "pga_text", required=True)
@click.option("--steps", "steps", default=1, type=int, show_default=True,
              help="Improvement iterations (improve only).")
@click.option("--trace", "trace", is_flag=True)
def cmd_rewrite(operation, pga_text, steps, trace) -> None:
    """Apply a rewrite and print the result."""
    seq = _load_pga(pga_text)
    applied = []
    try:
        if operation == "unchain":
            seq, applied = unchain(seq)
        elif operation == "no-jump-to-term":
            seq, applied = eliminate_jump_to_termination(seq)
        elif operation == "unroll":
            try:
                seq = unroll(seq)
            except RewriteError as exc:
                _fail(2, str(exc))
        else:
            for _ in range(max(steps, 0)):
                step = improve_step(seq)
                if step is None:
                    break
                seq, record = step
                applied.append(record)
    except RewriteVerificationError as exc:
        _fail(3, str(exc))
    click.echo(print_pga(seq))
    if operation == "improve" and not applied:
        click.echo("no improvement found")
    if trace:
        for record in applied:
            click.echo(f"{record.rule} @{record.site}: {record.evidence.value}")
    sys.exit(0)


@main.command("codegen")
@click.option("--thread-file", "thread_path", required=True, type=click.Path())
@click.option("--fa", "apply_fa", is_flag=True,
              help="Erase delays from the input thread first.")
def cmd_codegen(thread_path, apply_fa) -> None:
    """Emit a sequence whose functional behavior is the given thread."""
    graph = _load_thread_file(thread_path)
    if any(node.kind == DELAY for node in graph.nodes):
        if not apply_fa:
            _fail(2, "thread contains delays; apply functional abstraction first (--fa)")
        graph = functional_abstraction(graph)
    graph = minimize_graph(graph)
    try:
        seq = codegen(graph)
    except RewriteError as exc:
        _fail(2, str(exc))
    if not (bisimilar(extract_functional(seq), graph) and is_implementation(seq, graph)):
        _fail(3, "generated sequence failed its self-check")
    click.echo(print_pga(seq))
    sys.exit(0)


@main.command("search")
@click.option("--thread-file", "thread_path", required=True, type=click.Path())
@click.option("--max-prefix", "max_prefix", required=True, type=int)
@click.option("--max-cycle", "max_cycle", required=True, type=int)
@click.option("--alphabet", "alphabet", required=True,
              help="Comma-separated action names.")
@click.option("--pareto", "pareto", is_flag=True,
              help="Keep only sequences no other found sequence strictly improves.")
def cmd_search(thread_path, max_prefix, max_cycle, alphabet, pareto) -> None:
    """List every implementation of a thread within the bounds."""
    graph = _load_thread_file(thread_path)
    names = tuple(part.strip() for part in alphabet.split(",") if part.strip())
    try:
        bounds = SearchBounds(max_prefix, max_cycle, names)
    except ValueError as exc:
        _fail(2, str(exc))
    results = search_implementations(graph, bounds)
    if pareto:
        results = pareto_front(results)
    for seq in results:
        click.echo(print_pga(seq))
    sys.exit(0)


if __name__ == "__main__":
    main()
