"""Batch synthesis over many truth tables, with JSON-lines reports."""

from __future__ import annotations

import json
import multiprocessing
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .expr import Cost, parse_expr, tt_bits
from .synth import Synthesizer
from .truth_table import TruthTable, check_n


@dataclass(frozen=True)
class Record:
    tt: TruthTable
    expr: str
    cost: Cost
    method: str
    detail: str
    verified: bool

    def as_json(self) -> str:
        tt = self.tt.to_hex() if self.tt.n >= 2 else str(self.tt)
        row = {
            "tt": tt,
            "depth": self.cost.depth,
            "gates": self.cost.gates,
            "inverters": self.cost.inverters,
            "gate_inputs": self.cost.gate_inputs,
            "method": self.method,
            "detail": self.detail,
            "expr": self.expr,
            "verified": self.verified,
        }
        return json.dumps(row, separators=(",", ":"))


@dataclass
class Summary:
    n: int
    total: int = 0
    verified: int = 0
    depths: Counter = field(default_factory=Counter)
    methods: Counter = field(default_factory=Counter)
    by_minterms: dict[int, Counter] = field(default_factory=dict)

    def add(self, rec: Record) -> None:
        self.total += 1
        self.verified += rec.verified
        self.depths[rec.cost.depth] += 1
        key = rec.method + (f"[{rec.detail}]" if rec.detail else "")
        self.methods[key] += 1
        self.by_minterms.setdefault(rec.tt.count(), Counter())[rec.cost.depth] += 1

    def depth_histogram(self) -> dict[str, int]:
        """Depths 0 and 1 are merged, as in the usual presentation."""
        out = {"<=1": self.depths.get(0, 0) + self.depths.get(1, 0)}
        for d in sorted(k for k in self.depths if k > 1):
            out[str(d)] = self.depths[d]
        return out

    def as_json(self) -> str:
        row = {
            "type": "summary",
            "n": self.n,
            "total": self.total,
            "verified": self.verified,
            "depth_histogram": self.depth_histogram(),
            "methods": dict(sorted(self.methods.items())),
            "by_minterms": {
                str(k): dict(sorted((str(d), c) for d, c in v.items()))
                for k, v in sorted(self.by_minterms.items())
            },
        }
        return json.dumps(row, separators=(",", ":"))


def sample_functions(n: int, count: int, seed: int) -> list[TruthTable]:
    """``count`` distinct functions drawn with a seeded PCG64 generator, sorted."""
    check_n(n)
    space = 1 << (1 << n)
    if count > space:
        raise ValueError(f"cannot draw {count} distinct functions from {space}")
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen: set[int] = set()
    while len(chosen) < count:
        draw = rng.integers(0, space, size=count - len(chosen), dtype=np.uint64)
        chosen.update(int(x) for x in draw)
    return [TruthTable(n, b) for b in sorted(chosen)]


def all_functions(n: int) -> list[TruthTable]:
    check_n(n)
    if n > 4:
        raise ValueError("exhaustive enumeration is limited to n <= 4")
    return [TruthTable(n, b) for b in range(1 << (1 << n))]


_worker: Synthesizer | None = None


def _init_worker(synth: Synthesizer | None):
    global _worker
    _worker = synth or Synthesizer()


def _run_one(bits_n: tuple[int, int]):
    bits, n = bits_n
    r = _worker.synthesize(TruthTable(n, bits))
    return bits, str(r.expr), tuple(r.cost), r.method, r.detail


def _record(n: int, row) -> Record:
    bits, text, cost, method, detail = row
    ok = tt_bits(parse_expr(text, n), n) == bits
    return Record(TruthTable(n, bits), text, Cost(*cost), method, detail, ok)


def run_batch(
    functions: Iterable[TruthTable], jobs: int = 1, progress=None, synthesizer: Synthesizer | None = None
) -> list[Record]:
    """Synthesize every function; records come back sorted by truth table.

    Each expression is re-parsed and re-evaluated here, independently of the
    check inside the synthesizer.  Workers are forked, so ``synthesizer``
    and any tables it has loaded are inherited rather than pickled.
    """
    items = sorted({(f.bits, f.n) for f in functions})
    if not items:
        return []
    n = items[0][1]
    if any(k != n for _, k in items):
        raise ValueError("all functions in a batch must have the same n")
    rows = []
    if jobs <= 1:
        _init_worker(synthesizer)
        for i, item in enumerate(items):
            rows.append(_run_one(item))
            if progress:
                progress(i + 1, len(items))
    else:
        with multiprocessing.get_context("fork").Pool(jobs, _init_worker, (synthesizer,)) as pool:
            for i, row in enumerate(pool.imap_unordered(_run_one, items, chunksize=16)):
                rows.append(row)
                if progress:
                    progress(i + 1, len(items))
    rows.sort()
    return [_record(n, row) for row in rows]


def summarize(n: int, records: Iterable[Record]) -> Summary:
    summary = Summary(n)
    for rec in records:
        summary.add(rec)
    return summary


def write_report(path, config: dict, records: list[Record], summary: Summary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"type": "config", **config}, sort_keys=True, separators=(",", ":")) + "\n")
        for rec in records:
            fh.write(rec.as_json() + "\n")
        fh.write(summary.as_json() + "\n")

