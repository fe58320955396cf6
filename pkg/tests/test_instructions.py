import random

import pytest
from hypothesis import given, settings, strategies as st

from pga_mech import (
    InstrSeq,
    JumpResolution,
    PgaSyntaxError,
    TERMINATE,
    basic,
    bisimilar,
    canonical_position,
    canonicalize,
    extract_mechanistic,
    instruction_at,
    jump,
    jump_target,
    neg_test,
    parse_pga,
    pos_test,
    print_pga,
    reachable_positions,
)

from helpers import random_seq


def test_parse_finite():
    s = parse_pga("+a;#3;c;!;b;!")
    assert s.prefix == (pos_test("a"), jump(3), basic("c"), TERMINATE, basic("b"), TERMINATE)
    assert s.cycle is None


def test_parse_cycle():
    s = parse_pga("(+a;#4;+b;#4;!)^w")
    assert s.prefix == ()
    assert s.cycle == (pos_test("a"), jump(4), pos_test("b"), jump(4), TERMINATE)


def test_parse_single_termination():
    s = parse_pga("!")
    assert s.prefix == (TERMINATE,)
    assert s.cycle is None


def test_parse_omega_synonym():
    assert parse_pga("(#1;a)^ω") == parse_pga("(#1;a)^w")


def test_parse_whitespace_insensitive():
    assert parse_pga(" + a ; #3 ;\n c ; ! ; b ; ! ".replace(" + a", "+a")) == parse_pga("+a;#3;c;!;b;!")


def test_parse_errors():
    with pytest.raises(PgaSyntaxError):
        parse_pga("")
    with pytest.raises(PgaSyntaxError):
        parse_pga("   ")
    with pytest.raises(PgaSyntaxError):
        parse_pga("a;;b")
    with pytest.raises(PgaSyntaxError):
        parse_pga("(a)^w;b")
    with pytest.raises(PgaSyntaxError):
        parse_pga("(a)^w;(b)^w")
    with pytest.raises(PgaSyntaxError):
        parse_pga("(a;b")
    with pytest.raises(PgaSyntaxError):
        parse_pga("a;#")
    with pytest.raises(PgaSyntaxError):
        parse_pga("A")


def test_parse_error_location():
    try:
        parse_pga("a;;b")
    except PgaSyntaxError as exc:
        assert exc.line == 1 and exc.column == 3
    else:
        pytest.fail("expected a syntax error")


def test_empty_sequence_is_not_a_value():
    with pytest.raises(ValueError):
        InstrSeq(())
    with pytest.raises(ValueError):
        InstrSeq((), ())


def test_print_examples():
    assert print_pga(InstrSeq((basic("a"), TERMINATE))) == "a;!"
    assert print_pga(InstrSeq((), (jump(1), basic("a")))) == "(#1;a)^w"
    seq = InstrSeq((neg_test("a"), jump(3)),
                   (pos_test("a"), jump(3), basic("b"), TERMINATE))
    assert print_pga(seq) == "-a;#3;(+a;#3;b;!)^w"


_instr = st.one_of(
    st.sampled_from("abc").map(basic),
    st.sampled_from("abc").map(pos_test),
    st.sampled_from("abc").map(neg_test),
    st.just(TERMINATE),
    st.integers(min_value=0, max_value=9).map(jump),
)
_seqs = st.tuples(
    st.lists(_instr, max_size=6).map(tuple),
    st.one_of(st.none(), st.lists(_instr, min_size=1, max_size=5).map(tuple)),
).filter(lambda t: t[0] or t[1]).map(lambda t: InstrSeq(*t))


@given(_seqs)
@settings(max_examples=200)
def test_roundtrip(seq):
    assert parse_pga(print_pga(seq)) == seq


def test_instruction_at():
    assert instruction_at(InstrSeq((basic("a"), TERMINATE)), 1) == TERMINATE
    assert instruction_at(InstrSeq((), (jump(1), basic("a"))), 7) == basic("a")
    assert instruction_at(InstrSeq((basic("a"),)), 3) is None


def test_canonical_position_wraps():
    seq = InstrSeq((basic("a"),), (basic("b"), basic("c")))
    assert canonical_position(seq, 0) == 0
    assert canonical_position(seq, 1) == 1
    assert canonical_position(seq, 3) == 1
    assert canonical_position(seq, 4) == 2


def test_jump_target():
    seq = parse_pga("#2;a;#1;b;!")
    assert jump_target(seq, 0) == 2
    assert jump_target(parse_pga("#0;a"), 0) is JumpResolution.IMMEDIATE_DIVERGENCE
    assert jump_target(parse_pga("a;#5;b"), 1) is JumpResolution.FALLS_OFF_END
    with pytest.raises(ValueError):
        jump_target(seq, 1)


def test_reachable_positions():
    assert reachable_positions(parse_pga("#3;a;#1;b;!")) == {0, 3, 4}
    assert reachable_positions(parse_pga("a;!")) == {0, 1}
    assert reachable_positions(parse_pga("(+a;#4;+b;#4;!)^w")) == {0, 1, 2, 3, 4}


def test_canonicalize_examples():
    assert canonicalize(parse_pga("(a;a)^w")) == parse_pga("(a)^w")
    assert canonicalize(parse_pga("(#7;a)^w")) == parse_pga("(#1;a)^w")
    # a full-cycle self-jump keeps its delay loop; the counter stays m
    assert canonicalize(parse_pga("(#2;a)^w")) == parse_pga("(#2;a)^w")


def test_canonicalize_iterates_to_fixpoint():
    assert canonicalize(parse_pga("(#7;a;#7;a)^w")) == parse_pga("(#1;a)^w")


def test_canonicalize_leaves_prefix_alone():
    seq = parse_pga("#9;a;(b;b)^w")
    out = canonicalize(seq)
    assert out.prefix == seq.prefix
    assert out.cycle == (basic("b"),)


def test_canonicalize_properties_random():
    rng = random.Random(4242)
    for _ in range(300):
        s = random_seq(rng)
        c = canonicalize(s)
        assert canonicalize(c) == c
        assert bisimilar(extract_mechanistic(c), extract_mechanistic(s))
        # minimized counters stay within one cycle round and a nonzero
        # counter never collapses to 0
        for orig, ins in zip(s.cycle or (), c.cycle or ()):
            if ins.kind == "jump":
                assert ins.counter <= c.cycle_len
                if orig.kind == "jump" and orig.counter > 0:
                    assert ins.counter > 0
