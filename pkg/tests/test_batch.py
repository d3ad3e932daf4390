import json

import pytest

from majsynth.batch import all_functions, run_batch, sample_functions, summarize
from majsynth.truth_table import InputDomainError, TruthTable


def test_sampling_is_seeded_and_distinct():
    a = sample_functions(5, 50, 42)
    assert a == sample_functions(5, 50, 42)
    assert a != sample_functions(5, 50, 43)
    assert len({f.bits for f in a}) == 50
    assert a == sorted(a)
    assert len(sample_functions(2, 16, 0)) == 16
    with pytest.raises(ValueError):
        sample_functions(2, 17, 0)


def test_all_functions_limits():
    assert len(all_functions(2)) == 16
    with pytest.raises(ValueError):
        all_functions(5)
    with pytest.raises(InputDomainError):
        all_functions(0)


def test_summary_groups():
    records = run_batch(all_functions(2))
    s = summarize(2, records)
    assert s.total == s.verified == 16
    assert s.depth_histogram() == {"<=1": 14, "2": 2}
    assert sum(sum(c.values()) for c in s.by_minterms.values()) == 16
    assert s.by_minterms[2][2] == 2  # xor and xnor
    row = json.loads(s.as_json())
    assert row["type"] == "summary" and row["by_minterms"]["0"] == {"0": 1}


def test_records_sorted_and_json():
    fs = [TruthTable(3, b) for b in (200, 3, 77)]
    records = run_batch(fs)
    assert [r.tt.bits for r in records] == [3, 77, 200]
    row = json.loads(records[0].as_json())
    assert row["tt"] == "c0" and row["verified"] is True


def test_mixed_sizes_rejected():
    with pytest.raises(ValueError):
        run_batch([TruthTable(2, 1), TruthTable(3, 1)])
