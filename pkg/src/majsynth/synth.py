"""Truth table to majority expression synthesis.

Functions found in the primitive or M2 tables are returned directly.  For
four inputs the remaining functions are built as M(X1,X2,X3) from table
entries, first with two primitive children (``loop1``), then with at most
one (``loop2``), and finally as a four-level expression (``level4``).  For
five inputs a greedy three-level search (``greedy3``) is tried before a
Shannon split on the first variable (``shannon``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import ONE, ZERO, Cost, MajExpr, cost_of, maj, normalize_inverters, shift_vars, tt_bits, var
from .tables import Tables, get_tables
from .truth_table import InputDomainError, TernaryPattern, TruthTable, full_mask

log = logging.getLogger(__name__)

METHODS = ("primitive", "m2", "loop1", "loop2", "level4", "greedy3", "shannon")


class SynthesisError(RuntimeError):
    """An internal consistency failure; never a property of the input."""


@dataclass(frozen=True)
class CoverageVector:
    """How many of the chosen children X1, X2 cover each minterm."""

    n: int
    values: tuple[int, ...]

    @classmethod
    def build(cls, f: TruthTable, x1: int, x2: int) -> "CoverageVector":
        return cls(f.n, tuple(((x1 >> i) & 1) + ((x2 >> i) & 1) for i in range(1 << f.n)))

    def x3_pattern(self, f: TruthTable) -> TernaryPattern:
        """Cells covered exactly once must take f's value; all others are free."""
        once = 0
        for i, v in enumerate(self.values):
            if v == 1:
                once |= 1 << i
        return TernaryPattern(f.n, once, f.bits & once)


@dataclass(frozen=True)
class ResidualSets:
    """Minterms still to cover (v0), forbidden (v_minus1), covered once (v1)."""

    v0: int
    v_minus1: int
    v1: int = 0

    @classmethod
    def after_first(cls, f: int, x1: int) -> "ResidualSets":
        return cls(f & ~x1, x1 & ~f)

    def with_second(self, f: int, x1: int, x2: int) -> "ResidualSets":
        return ResidualSets(self.v0, self.v_minus1, f & (x1 ^ x2))

    def x2_pattern(self, n: int) -> TernaryPattern:
        return TernaryPattern.of(n, self.v0, self.v_minus1)


def x3_care(x1: int, x2: int) -> int:
    # minterms covered by exactly one of X1, X2: X3 decides the output there
    return x1 ^ x2


class ErrorSets:
    """Error masks ``t ^ f`` of every table entry against one target ``f``.

    M(X1,X2,X3) computes f exactly when the error masks of the three
    children are pairwise disjoint, since the majority output is wrong only
    where at least two inputs are wrong.
    """

    # positions below this are checked one at a time before the global search
    SCAN_LIMIT = 4096
    _CELLS = 1 << 22

    def __init__(self, tables: Tables, fb: int):
        self.size = 1 << tables.n
        self.err = tables.tts ^ np.uint32(fb)
        self.weight = np.bitwise_count(self.err).astype(np.int16)

    def compatible(self, p: int) -> np.ndarray:
        """Positions whose error avoids that of ``p``, ascending."""
        return np.flatnonzero((self.err & self.err[p]) == 0)

    def _chunks(self, rows, pool):
        step = max(1, self._CELLS // max(1, len(pool)))
        for s in range(0, len(rows), step):
            yield s, rows[s : s + step]

    def first_partnered(self, rows, pool) -> int | None:
        """Index of the first row with an error-disjoint partner in ``pool``."""
        rows = np.asarray(rows, dtype=np.int64)
        if not len(rows) or not len(pool):
            return None
        pe = self.err[pool]
        for s, chunk in self._chunks(rows, pool):
            ok = ((self.err[chunk][:, None] & pe[None, :]) == 0).any(axis=1)
            hit = np.flatnonzero(ok)
            if len(hit):
                return s + int(hit[0])
        return None

    def admits_pair(self, p: int) -> bool:
        pool = self.compatible(p)
        # the lighter of the two partners carries at most half the slack
        light = pool[self.weight[pool] <= (self.size - self.weight[p]) // 2]
        return self.first_partnered(light, pool) is not None

    def first_x1(self, budget: int | None = None) -> int | None:
        """Smallest position that is a member of some disjoint triple."""
        total = len(self.err) if budget is None else min(budget, len(self.err))
        for p in range(min(total, self.SCAN_LIMIT)):
            if self.admits_pair(p):
                return p
        if total <= self.SCAN_LIMIT:
            return None
        best = self._min_member()
        return best if best is not None and best < total else None

    def _min_member(self) -> int | None:
        # Enumerate triples by their lightest member a and middle member b.
        err, weight, size = self.err, self.weight, self.size
        light = np.flatnonzero(3 * weight <= size)
        light = light[np.argsort(weight[light], kind="stable")]
        best = None
        for a in light.tolist():
            wa = int(weight[a])
            pool = np.flatnonzero(((err & err[a]) == 0) & (weight >= wa))
            if not len(pool):
                continue
            pe, pw = err[pool], weight[pool]
            mids = pool[pw <= (size - wa) // 2]
            for _, chunk in self._chunks(mids, pool):
                cw = weight[chunk][:, None]
                ok = ((err[chunk][:, None] & pe[None, :]) == 0) & (pw[None, :] >= cw) & (pw[None, :] <= size - wa - cw)
                rows = ok.any(axis=1)
                if not rows.any():
                    continue
                third = int(np.where(ok, pool[None, :], len(err)).min())
                found = min(a, int(chunk[rows].min()), third)
                best = found if best is None else min(best, found)
        return best


@dataclass(frozen=True)
class SynthResult:
    expr: MajExpr
    cost: Cost
    method: str
    detail: str = ""
    parts: tuple = field(default=(), compare=False)

    def __str__(self):
        return f"{self.expr} cost={self.cost} method={self.method}"


class Synthesizer:
    """Runs the synthesis pipeline against tables from ``provider``."""

    def __init__(self, provider: Callable[[int], Tables] = get_tables, greedy_x1_budget: int | None = None):
        self.provider = provider
        self.greedy_x1_budget = greedy_x1_budget
        self._prims_by_tt: dict[int, list[int]] = {}
        self._m2_groups: dict[int, list[tuple[int, list[int]]]] = {}

    def tables(self, n: int) -> Tables:
        tables = self.provider(n)
        if tables.n != n:
            raise InputDomainError(f"table provider returned n={tables.n} for n={n}")
        return tables

    def _primitives(self, tables: Tables) -> list[int]:
        key = id(tables)
        out = self._prims_by_tt.get(key)
        if out is None:
            out = sorted(tables.prim_positions.tolist(), key=tables.tt)
            self._prims_by_tt[key] = out
        return out

    def _m2_by_size(self, tables: Tables) -> list[tuple[int, list[int]]]:
        key = id(tables)
        out = self._m2_groups.get(key)
        if out is None:
            groups: dict[int, list[int]] = {}
            for p in tables.m2_positions.tolist():
                groups.setdefault(tables.costs[p].gates, []).append(p)
            out = [(r, sorted(ps, key=tables.tt)) for r, ps in sorted(groups.items())]
            self._m2_groups[key] = out
        return out

    # entry point ----------------------------------------------------------

    def synthesize(self, f: TruthTable) -> SynthResult:
        if not isinstance(f, TruthTable):
            raise TypeError("synthesize expects a TruthTable")
        tables = self.tables(f.n)
        hit = tables.query_exact(f)
        if hit is not None:
            expr, cost = hit
            method = "primitive" if f.bits in tables.primitives.entries else "m2"
            result = SynthResult(expr, cost, method)
        elif f.n <= 3:
            raise SynthesisError(f"tables for n={f.n} do not cover {f}")
        elif f.n == 4:
            result = self.loop1(f) or self.loop2(f) or self.level4(f)
        else:
            result = self.greedy3(f) or self.shannon(f)
        return self._verified(f, result)

    @staticmethod
    def _verified(f: TruthTable, result: SynthResult) -> SynthResult:
        got = tt_bits(result.expr, f.n)
        if got != f.bits:
            raise SynthesisError(
                f"{result.method} produced {result.expr} with truth table "
                f"{TruthTable(f.n, got)} for {f}"
            )
        if cost_of(result.expr) != result.cost:
            raise SynthesisError(f"stale cost on {result.expr}")
        return result

    def _assemble(self, a: MajExpr, b: MajExpr, c: MajExpr) -> tuple[MajExpr, Cost]:
        expr = normalize_inverters(maj(a, b, c))
        return expr, cost_of(expr)

    # four inputs ----------------------------------------------------------

    def loop1(self, f: TruthTable) -> SynthResult | None:
        """Two primitive children whose pair covers f without double-covering outside it."""
        tables = self.tables(f.n)
        fb = f.bits
        prims = [p for p in self._primitives(tables) if tables.tt(p) & fb]
        if len(prims) < 2:
            return None
        ptt = tables.tts[prims].astype(np.int64)
        ii, jj = np.triu_indices(len(prims), 1)
        a, b = ptt[ii], ptt[jj]
        ok = ((a | b) & fb) == fb
        ok &= (a & b & ~fb) == 0
        best: tuple[Cost, MajExpr] | None = None
        bound = None
        for i, j in zip(ii[ok].tolist(), jj[ok].tolist()):
            p1, p2 = prims[i], prims[j]
            x1, x2 = tables.tt(p1), tables.tt(p2)
            care = x3_care(x1, x2)
            discount = tables.gate_sets[p1] | tables.gate_sets[p2]
            p3 = tables.best(care, fb & care, discount)
            if p3 is None:
                continue
            e1, e2, e3 = tables.exprs[p1], tables.exprs[p2], tables.exprs[p3]
            shape = (1 + max(e1.depth, e2.depth, e3.depth), 1 + len(discount | tables.gate_sets[p3]))
            if bound is not None and shape > bound:
                continue
            expr, cost = self._assemble(e1, e2, e3)
            if best is None or cost < best[0]:
                best = (cost, expr)
                bound = (cost.depth, cost.gates)
        if best is None:
            return None
        return SynthResult(best[1], best[0], "loop1")

    def _second_third(self, tables: Tables, fb: int, p1: int) -> tuple[int, int] | None:
        """Cheapest X2 admitting some X3 for fixed X1, and that X3."""
        x1 = tables.tt(p1)
        res = ResidualSets.after_first(fb, x1)
        g1 = tables.gate_sets[p1]
        index = tables._pattern_index() if tables.n <= 4 else None
        for p2 in tables.ranked(res.v0 | res.v_minus1, res.v0, g1):
            care = x3_care(x1, tables.tt(p2))
            if index is not None and index.lookup(care, fb & care) is None:
                continue
            p3 = tables.best(care, fb & care, g1 | tables.gate_sets[p2])
            if p3 is not None:
                return p2, p3
        return None

    def loop2(self, f: TruthTable) -> SynthResult | None:
        """X1 from primitives, then from M2 entries of growing gate count."""
        tables = self.tables(f.n)
        fb = f.bits
        stages = [("x1=primitive", self._primitives(tables))]
        stages += [(f"x1=m2(r={r})", group) for r, group in self._m2_by_size(tables)]
        for detail, x1_candidates in stages:
            best: tuple[Cost, MajExpr] | None = None
            for p1 in x1_candidates:
                found = self._second_third(tables, fb, p1)
                if found is None:
                    continue
                p2, p3 = found
                expr, cost = self._assemble(tables.exprs[p1], tables.exprs[p2], tables.exprs[p3])
                if best is None or cost < best[0]:
                    best = (cost, expr)
            if best is not None:
                return SynthResult(best[1], best[0], "loop2", detail)
        return None

    def _depth3(self, g: TruthTable) -> SynthResult | None:
        tables = self.tables(g.n)
        hit = tables.query_exact(g)
        if hit is not None:
            return SynthResult(hit[0], hit[1], "primitive" if g.bits in tables.primitives.entries else "m2")
        return self.loop1(g) or self.loop2(g)

    def level4(self, f: TruthTable) -> SynthResult:
        """X1 primitive, X2 and X3 synthesized as depth-3 functions."""
        tables = self.tables(f.n)
        fb = f.bits
        full = full_mask(f.n)
        best: tuple[Cost, MajExpr] | None = None
        for p1 in self._primitives(tables):
            x1 = tables.tt(p1)
            res = ResidualSets.after_first(fb, x1)
            free2 = full & ~(res.v0 | res.v_minus1)
            for fill2 in (0, free2):
                x2 = res.v0 | fill2
                if x2 == fb:
                    continue
                r2 = self._depth3(TruthTable(f.n, x2))
                if r2 is None:
                    continue
                care = x3_care(x1, x2)
                for fill3 in (0, full & ~care):
                    x3 = (fb & care) | fill3
                    if x3 == fb:
                        continue
                    r3 = self._depth3(TruthTable(f.n, x3))
                    if r3 is None:
                        continue
                    expr, cost = self._assemble(tables.exprs[p1], r2.expr, r3.expr)
                    if best is None or cost < best[0]:
                        best = (cost, expr)
        if best is None:
            raise SynthesisError(f"no four-level cover found for {f}")
        return SynthResult(best[1], best[0], "level4")

    # five inputs ----------------------------------------------------------

    def _cheapest(self, tables: Tables, care: int, value: int, discount) -> int | None:
        p = tables.best(care, value, discount, source="prim")
        return p if p is not None else tables.best(care, value, discount, source="m2")

    def greedy3(self, f: TruthTable) -> SynthResult | None:
        """First three-level cover found, X1 taken in ascending cost order.

        X2 is the first compatible entry in adjusted-cost order (primitives,
        then M2) that admits some X3, and X3 is the cheapest such entry.
        ``ErrorSets`` decides which X1 and X2 admit a completion, so only the
        winning branch is walked explicitly.
        """
        tables = self.tables(f.n)
        fb = f.bits
        errors = ErrorSets(tables, fb)
        p1 = errors.first_x1(self.greedy_x1_budget)
        if p1 is None:
            return None
        x1 = tables.tt(p1)
        res = ResidualSets.after_first(fb, x1)
        g1 = tables.gate_sets[p1]
        pool = errors.compatible(p1)
        for source in ("prim", "m2"):
            order = tables.ranked(res.v0 | res.v_minus1, res.v0, g1, source)
            i = errors.first_partnered(order, pool)
            if i is None:
                continue
            p2 = order[i]
            care = x3_care(x1, tables.tt(p2))
            p3 = self._cheapest(tables, care, fb & care, g1 | tables.gate_sets[p2])
            if p3 is None:
                raise SynthesisError(f"X3 lookup disagrees with error-set check for {f}")
            expr, cost = self._assemble(tables.exprs[p1], tables.exprs[p2], tables.exprs[p3])
            return SynthResult(expr, cost, "greedy3")
        raise SynthesisError(f"X1 at position {p1} admits no X2 for {f}")

    def shannon(self, f: TruthTable) -> SynthResult:
        """Split on A and recombine the cofactors with three extra gates."""
        low, high = f.cofactors()
        r_low = self._verified(low, self.synthesize(low))
        r_high = self._verified(high, self.synthesize(high))
        a = var(0)
        f_low = shift_vars(r_low.expr, 1)
        f_high = shift_vars(r_high.expr, 1)
        lo, hi = maj(f_low, ZERO, ~a), maj(f_high, ZERO, a)
        expr = maj(lo, hi, ONE)
        # Only the three new gates change polarity: the cofactor expressions
        # are already normalized, and flipping inside them could fuse a gate
        # of one with its complement in the other.
        expr = normalize_inverters(expr, {lo.node, hi.node, expr.node})
        return SynthResult(expr, cost_of(expr), "shannon", parts=(r_low, r_high))


_default = Synthesizer()


def synthesize(f: TruthTable) -> SynthResult:
    return _default.synthesize(f)


def loop1(f: TruthTable) -> SynthResult | None:
    return _default.loop1(f)


def loop2(f: TruthTable) -> SynthResult | None:
    return _default.loop2(f)


def level4(f: TruthTable) -> SynthResult:
    return _default.level4(f)


def greedy3(f: TruthTable) -> SynthResult | None:
    return _default.greedy3(f)


def shannon(f: TruthTable) -> SynthResult:
    return _default.shannon(f)
