import pytest

from majsynth.expr import Cost, cost_of, maj, parse_expr, tt_bits, var
from majsynth.oracle import OracleBoundError, SearchBound, exact_optimum, verify_optimal, within_bound
from majsynth.synth import synthesize
from majsynth.truth_table import InputDomainError, TruthTable


def test_majority_is_its_own_optimum():
    expr, cost = exact_optimum(TruthTable.from_string("00010111"), SearchBound(3))
    assert str(expr) == "M(A,B,C)"
    assert cost == Cost(1, 1, 0, 3)


def test_witnesses_are_consistent():
    bound = SearchBound(3)
    for f in within_bound(bound):
        expr, cost = exact_optimum(f, bound)
        assert tt_bits(expr, 3) == f.bits
        assert cost_of(expr) == cost


def test_depth_two_reaches_every_three_input_function():
    assert len(within_bound(SearchBound(3))) == 256
    assert len(within_bound(SearchBound(3, max_depth=1))) == 40


def test_n4_depth_two_envelope():
    assert len(within_bound(SearchBound(4, max_depth=2))) == 10350


def test_gate_bound_limits_search():
    f = TruthTable.from_string("0110")  # xor needs three gates
    assert exact_optimum(f, SearchBound(2, max_gates=2)) is None
    assert exact_optimum(f, SearchBound(2)) is not None


@pytest.mark.parametrize("n, depth", [(5, 2), (4, 3)])
def test_envelope_errors(n, depth):
    with pytest.raises(OracleBoundError):
        SearchBound(n, max_depth=depth)


def test_bound_size_mismatch():
    with pytest.raises(InputDomainError):
        exact_optimum(TruthTable(2, 1), SearchBound(3))


def test_verify_optimal_reports():
    bound = SearchBound(3)
    good = [synthesize(TruthTable(3, b)) for b in (0b00010111, 0b01101001)]
    report = verify_optimal(good, bound)
    assert report.ok and report.checked == 2
    assert report.summary() == "0 mismatches / 2"

    e = good[0].expr
    bigger = maj(e, maj(e, var(0), parse_expr("0")), maj(e, var(0), parse_expr("1")))
    assert tt_bits(bigger, 3) == tt_bits(e, 3)
    report = verify_optimal([(bigger, cost_of(bigger))], bound)
    assert not report.ok
    assert report.mismatches[0].optimum == good[0].cost


def test_verify_counts_skipped():
    xor3 = synthesize(TruthTable.from_string("01101001"))
    report = verify_optimal([xor3], SearchBound(3, max_depth=1))
    assert report.skipped == 1 and report.checked == 0
    assert "outside bound" in report.summary()
