import itertools
import pickle

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from majsynth.expr import (
    ONE,
    ZERO,
    Cost,
    ExprSyntaxError,
    apply_flips,
    cost_of,
    evaluate,
    gate_list,
    maj,
    normalize_inverters,
    parse_expr,
    shift_vars,
    truth_table_of,
    tt_bits,
    var,
)
from majsynth.truth_table import InputDomainError

N = 4

# Plain nested tuples, evaluated without touching the library.
leaves = st.one_of(
    st.tuples(st.just("c"), st.booleans()),
    st.tuples(st.just("v"), st.integers(0, N - 1), st.booleans()),
)
trees = st.recursive(
    leaves,
    lambda kids: st.tuples(st.just("m"), kids, kids, kids, st.booleans()),
    max_leaves=12,
)


def ref_eval(t, x):
    if t[0] == "c":
        return int(t[1])
    if t[0] == "v":
        return x[t[1]] ^ t[2]
    s = ref_eval(t[1], x) + ref_eval(t[2], x) + ref_eval(t[3], x)
    return int(s >= 2) ^ t[4]


def build(t):
    if t[0] == "c":
        return ONE if t[1] else ZERO
    if t[0] == "v":
        return var(t[1], t[2])
    return maj(build(t[1]), build(t[2]), build(t[3])) ^ t[4]


def assignments(n=N):
    return list(itertools.product((0, 1), repeat=n))


def table(e, n=N):
    return tt_bits(e, n)


@given(trees)
def test_construction_preserves_semantics(t):
    e = build(t)
    for x in assignments():
        assert evaluate(e, x) == ref_eval(t, x)


@given(trees)
def test_bit_parallel_matches_pointwise(t):
    e = build(t)
    bits = table(e)
    for i, x in enumerate(assignments()):
        assert (bits >> i) & 1 == evaluate(e, x)


exprs = trees.map(build)


@given(exprs, exprs, exprs)
def test_commutativity(x, y, z):
    ref = table(maj(x, y, z))
    for p in itertools.permutations((x, y, z)):
        assert table(maj(*p)) == ref
        assert maj(*p) == maj(x, y, z)


@given(exprs, exprs, exprs, exprs)
def test_associativity(x, y, z, u):
    assert table(maj(x, u, maj(y, u, z))) == table(maj(z, u, maj(y, u, x)))


@given(exprs, exprs, exprs, exprs, exprs)
@settings(max_examples=50)
def test_distributivity(x, y, z, u, v):
    assert table(maj(x, y, maj(u, v, z))) == table(maj(maj(x, y, u), maj(x, y, v), z))


@given(exprs, exprs, exprs)
def test_inverter_propagation(x, y, z):
    assert table(~maj(x, y, z)) == table(maj(~x, ~y, ~z))


@given(exprs, exprs)
def test_majority_rules_collapse(x, z):
    assert maj(x, x, z) == x
    assert maj(x, ~x, z) == z
    assert table(maj(x, x, z)) == table(x)


def test_printing_sorts_children():
    e = maj(ZERO, var(1), var(0))
    assert str(e) == "M(A,B,0)"
    assert str(maj(var(1), ONE, var(0))) == "M(A,B,1)"
    assert str(~maj(var(0), var(1), var(2))) == "!M(A,B,C)"


def test_cost_examples():
    assert cost_of(ZERO) == Cost(0, 0, 0, 0)
    assert cost_of(var(2, True)) == Cost(0, 0, 1, 0)
    assert cost_of(parse_expr("M(A,B,C)")) == Cost(1, 1, 0, 3)
    assert cost_of(parse_expr("!M(A,B,1)")) == Cost(1, 1, 1, 2)
    e = parse_expr("M(A,M(A,!B,0),!M(A,B,C))")
    assert cost_of(e) == Cost(2, 3, 2, 8)
    assert str(truth_table_of(e, 3)) == "00001100"


def test_shared_gates_counted_once():
    g = parse_expr("M(A,B,C)")
    e = maj(g, maj(g, var(3), ZERO), maj(~g, var(3), ONE))
    assert cost_of(e).gates == 4
    assert len(gate_list(e)) == 4
    # both polarities of g feed gates, but it is one inverter
    assert cost_of(e).inverters == 1


def test_cost_order_is_lexicographic():
    assert Cost(2, 9, 9, 9) < Cost(3, 0, 0, 0)
    assert Cost(2, 2, 3, 0) < Cost(2, 3, 0, 0)


def test_normalize_examples():
    e = parse_expr("M(!M(A,!B,C),!D,0)")
    assert cost_of(e) == Cost(2, 2, 3, 5)
    out = normalize_inverters(e)
    assert str(out) == "!M(D,M(A,!B,C),1)"
    assert cost_of(out) == Cost(2, 2, 2, 5)
    assert str(normalize_inverters(parse_expr("M(!A,B,!C)"))) == "!M(A,!B,C)"


@given(trees)
def test_normalize_keeps_function_and_never_costs_more(t):
    e = build(t)
    out = normalize_inverters(e)
    assert table(out) == table(e)
    assert cost_of(out) <= cost_of(e)
    assert normalize_inverters(out) == out or cost_of(normalize_inverters(out)) == cost_of(out)


@given(trees, st.data())
def test_apply_flips_preserves_function(t, data):
    e = build(t)
    gates = gate_list(e)
    chosen = data.draw(st.sets(st.sampled_from(gates))) if gates else set()
    assert table(apply_flips(e, chosen)) == table(e)


@given(trees)
def test_parse_print_round_trip(t):
    e = build(t)
    assert parse_expr(str(e)) == e
    assert pickle.loads(pickle.dumps(e)) == e


def test_parse_whitespace_and_sharing():
    e = parse_expr(" M( D , !M(A,B,C), M(M(A,B,C),D,0) ) ")
    assert cost_of(e).gates == 3
    assert parse_expr(" M( A , !M(A,B,C), M(A,B,C) ) ") == var(0)


@pytest.mark.parametrize(
    "text",
    ["", "M(A,B)", "M(A,B,C", "X", "M(A,B,C))", "!", "M(A,,B)", "m(A,B,C)"],
)
def test_parse_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text)


def test_parse_respects_n():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("M(A,B,D)", 3)
    assert info.value.pos == 6


def test_evaluation_domain_checks():
    e = parse_expr("M(A,B,D)")
    with pytest.raises(InputDomainError):
        evaluate(e, (1, 0, 1))
    with pytest.raises(InputDomainError):
        tt_bits(e, 3)
    with pytest.raises(InputDomainError):
        var(5)


@given(trees)
def test_shift_vars(t):
    e = build(t)
    shifted = shift_vars(e, 1)
    for x in assignments():
        assert evaluate(shifted, (0,) + x) == evaluate(e, x)


def test_normalize_can_be_restricted():
    inner = parse_expr("M(!A,!B,!C)")
    e = maj(inner, var(3), ZERO)
    assert normalize_inverters(e, flippable=set()) == e
    free = normalize_inverters(e, flippable={inner.node})
    assert str(free) == "M(D,!M(A,B,C),0)"
    assert table(free) == table(e)


def test_evaluate_examples():
    assert evaluate(parse_expr("M(A,B,C)"), (0, 1, 1)) == 1
    assert str(truth_table_of(parse_expr("M(0,B,C)"), 3)) == "00010001"
    assert str(truth_table_of(parse_expr("M(1,B,C)"), 3)) == "01110111"
    assert str(truth_table_of(parse_expr("M(A,B,C)"), 3)) == "00010111"
    assert str(truth_table_of(parse_expr("!A"), 3)) == "11110000"
    assert str(truth_table_of(ZERO, 4)) == "0" * 16


def test_printing_keeps_table_entry_form():
    assert str(parse_expr("!M(A,B,!C)")) == "!M(A,B,!C)"
    text = "M(A,M(A,!B,0),!M(A,B,C))"
    assert str(parse_expr(text)) == text


def test_repeated_subexpression_counted_once():
    # a tree of 4 gates where M(A,B,C) is written twice
    e = parse_expr("M(M(A,B,C),M(M(A,B,C),D,0),E)")
    assert cost_of(e).gates == 3
