"""Brute-force exact synthesis for small instances.

Every majority DAG up to the depth bound is enumerated with every input and
output polarity, so the minimum found for a truth table is the true minimum
cost among expressions of that depth.  Nothing here consults the lookup
tables or the synthesis pipeline; it exists to check them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .expr import ONE, ZERO, Cost, MajExpr, cost_of, maj, tt_bits, var
from .synth import SynthResult
from .truth_table import InputDomainError, TruthTable, check_n, full_mask, var_mask

# Depth 2 reaches all 256 three-input functions, so it is the practical
# ceiling of the search for every n in the envelope.
MAX_SEARCH_DEPTH = 2


class OracleBoundError(InputDomainError):
    """The requested search lies outside what can be enumerated exhaustively."""


@dataclass(frozen=True)
class SearchBound:
    n: int
    max_depth: int = MAX_SEARCH_DEPTH
    max_gates: int = 4

    def __post_init__(self):
        check_n(self.n)
        if self.max_depth < 0 or self.max_gates < 0:
            raise OracleBoundError("bounds must be non-negative")
        if self.n >= 5 or (self.n == 4 and self.max_depth > 2):
            raise OracleBoundError(
                f"exhaustive search is limited to n <= 3, or n = 4 at depth <= 2 "
                f"(got n={self.n}, max_depth={self.max_depth})"
            )


# A leaf or gate in the enumeration.  ``ref`` is -1 for the constant, the
# variable index for variables, or an index into the depth-1 gate list.
@dataclass(frozen=True)
class _Gate:
    children: tuple  # ((kind, ref, neg), ...) with kind in "cvg"
    tt: int
    fanin: int
    neg_vars: int  # bitmask of variables complemented at this gate's inputs


def _leaf_tt(n, kind, ref):
    return 0 if kind == "c" else var_mask(n, ref)


def _depth1_gates(n: int) -> list[_Gate]:
    full = full_mask(n)
    leaves = [("c", -1)] + [("v", k) for k in range(n)]
    out = []
    for trio in itertools.combinations(leaves, 3):
        for pols in itertools.product((0, 1), repeat=3):
            a, b, c = (_leaf_tt(n, k, r) ^ (full if p else 0) for (k, r), p in zip(trio, pols))
            neg_vars = 0
            for (k, r), p in zip(trio, pols):
                if p and k == "v":
                    neg_vars |= 1 << r
            out.append(
                _Gate(
                    tuple((k, r, p) for (k, r), p in zip(trio, pols)),
                    (a & b) | (a & c) | (b & c),
                    sum(1 for k, _ in trio if k != "c"),
                    neg_vars,
                )
            )
    return out


@dataclass
class _Best:
    cost: Cost
    witness: tuple = field(compare=False)


@lru_cache(maxsize=None)
def _search(n: int, max_depth: int, max_gates: int) -> dict[int, _Best]:
    """Minimum cost and a witness for every truth table reachable in bounds."""
    full = full_mask(n)
    best: dict[int, _Best] = {}

    def offer(tt, cost, witness):
        cur = best.get(tt)
        if cur is None or cost < cur.cost:
            best[tt] = _Best(cost, witness)

    offer(0, Cost(0, 0, 0, 0), ("const", 0))
    offer(full, Cost(0, 0, 0, 0), ("const", 1))
    for k in range(n):
        offer(var_mask(n, k), Cost(0, 0, 0, 0), ("var", k, 0))
        offer(full ^ var_mask(n, k), Cost(0, 0, 1, 0), ("var", k, 1))
    if max_depth < 1 or max_gates < 1:
        return best

    level1 = _depth1_gates(n)
    for gi, g in enumerate(level1):
        inv = bin(g.neg_vars).count("1")
        offer(g.tt, Cost(1, 1, inv, g.fanin), ("g1", gi, 0))
        offer(full ^ g.tt, Cost(1, 1, inv + 1, g.fanin), ("g1", gi, 1))
    if max_depth < 2 or max_gates < 2:
        return best

    nodes = [("c", -1)] + [("v", k) for k in range(n)] + [("g", i) for i in range(len(level1))]
    for trio in itertools.combinations(nodes, 3):
        gate_kids = [level1[r] for k, r in trio if k == "g"]
        if not gate_kids:
            continue
        gates = 1 + len(gate_kids)
        if gates > max_gates:
            continue
        fanin = sum(1 for k, _ in trio if k != "c") + sum(g.fanin for g in gate_kids)
        inner_neg = 0
        for g in gate_kids:
            inner_neg |= g.neg_vars
        tts = [0 if k == "c" else var_mask(n, r) if k == "v" else level1[r].tt for k, r in trio]
        for pols in itertools.product((0, 1), repeat=3):
            a, b, c = (t ^ (full if p else 0) for t, p in zip(tts, pols))
            tt = (a & b) | (a & c) | (b & c)
            neg_vars = inner_neg
            neg_gates = 0
            for (k, r), p in zip(trio, pols):
                if p:
                    if k == "v":
                        neg_vars |= 1 << r
                    elif k == "g":
                        neg_gates += 1
            inv = bin(neg_vars).count("1") + neg_gates
            witness = ("g2", trio, pols)
            offer(tt, Cost(2, gates, inv, fanin), witness + (0,))
            offer(full ^ tt, Cost(2, gates, inv + 1, fanin), witness + (1,))
    return best


def _build(n: int, witness: tuple) -> MajExpr:
    level1 = _depth1_gates(n) if witness[0] in ("g1", "g2") else None

    def leaf(kind, ref, neg):
        if kind == "c":
            return ONE if neg else ZERO
        return var(ref, bool(neg))

    def gate1(index):
        g = level1[index]
        return maj(*(leaf(k, r, p) for k, r, p in g.children))

    tag = witness[0]
    if tag == "const":
        return ONE if witness[1] else ZERO
    if tag == "var":
        return var(witness[1], bool(witness[2]))
    if tag == "g1":
        return gate1(witness[1]) ^ witness[2]
    _, trio, pols, root = witness
    kids = []
    for (k, r), p in zip(trio, pols):
        kids.append(gate1(r) ^ p if k == "g" else leaf(k, r, p))
    return maj(*kids) ^ root


def exact_optimum(f: TruthTable, bound: SearchBound) -> tuple[MajExpr, Cost] | None:
    """Cheapest expression for ``f`` within ``bound``, or None if unreachable."""
    if f.n != bound.n:
        raise InputDomainError(f"bound is for n={bound.n}, function has n={f.n}")
    depth = min(bound.max_depth, MAX_SEARCH_DEPTH)
    hit = _search(f.n, depth, bound.max_gates).get(f.bits)
    if hit is None:
        if f.n <= 3 and bound.max_depth > MAX_SEARCH_DEPTH and bound.max_gates >= 4:
            raise AssertionError(f"{f} not reachable at depth 2; search envelope is wrong")
        return None
    expr = _build(f.n, hit.witness)
    if tt_bits(expr, f.n) != f.bits or cost_of(expr) != hit.cost:
        raise AssertionError(f"oracle witness {expr} disagrees with its enumeration record")
    return expr, hit.cost


def within_bound(bound: SearchBound) -> list[TruthTable]:
    """Every function that has an implementation inside ``bound``, sorted."""
    depth = min(bound.max_depth, MAX_SEARCH_DEPTH)
    return [TruthTable(bound.n, b) for b in sorted(_search(bound.n, depth, bound.max_gates))]


@dataclass
class Mismatch:
    tt: TruthTable
    expr: MajExpr
    cost: Cost
    optimum: Cost | None


@dataclass
class OptimalityReport:
    checked: int = 0
    skipped: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        text = f"{len(self.mismatches)} mismatches / {self.checked:,}"
        if self.skipped:
            text += f" ({self.skipped:,} outside bound)"
        return text


def verify_optimal(results, bound: SearchBound) -> OptimalityReport:
    """Compare each result's cost with the exhaustive optimum.

    Results whose function needs more depth than the bound allows are
    counted as skipped, not as mismatches.
    """
    report = OptimalityReport()
    for result in results:
        expr = result.expr if isinstance(result, SynthResult) else result[0]
        cost = result.cost if isinstance(result, SynthResult) else result[1]
        f = TruthTable(bound.n, tt_bits(expr, bound.n))
        found = exact_optimum(f, bound)
        if found is None:
            report.skipped += 1
            continue
        report.checked += 1
        if found[1] != cost:
            report.mismatches.append(Mismatch(f, expr, cost, found[1]))
    return report
