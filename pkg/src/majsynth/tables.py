"""Primitive and two-level lookup tables.

The primitive table holds every function realizable with at most one
majority gate; the M2 table holds every remaining function realizable as
M(p1,p2,p3) over three distinct primitives.  Both map a truth table (as an
integer, bit i = minterm i) to its cheapest expression and that
expression's cost.
"""

from __future__ import annotations

import itertools
import logging
import os
import struct
import zlib
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .expr import (
    CONST,
    GATE,
    ONE,
    VAR,
    ZERO,
    Cost,
    MajExpr,
    cost_of,
    maj,
    normalize_inverters,
    tt_bits,
    var,
)
from .truth_table import InputDomainError, TernaryPattern, TruthTable, check_n, full_mask

log = logging.getLogger(__name__)


def primitive_count(n: int) -> int:
    return 2 + 2 * n + 8 * comb(n, 2) + 8 * comb(n, 3)


@dataclass
class PrimitiveTable:
    n: int
    entries: dict[int, tuple[MajExpr, Cost]] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, tt):
        return _bits(tt) in self.entries

    def get(self, tt):
        return self.entries.get(_bits(tt))


@dataclass
class M2Table:
    n: int
    entries: dict[int, tuple[MajExpr, Cost]] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, tt):
        return _bits(tt) in self.entries

    def get(self, tt):
        return self.entries.get(_bits(tt))


def _bits(tt) -> int:
    return tt.bits if isinstance(tt, TruthTable) else int(tt)


def gen_primitives(n: int) -> PrimitiveTable:
    """Constants, literals, AND/OR pairs and 3-input majorities over ``n`` inputs."""
    check_n(n)
    candidates = [ZERO, ONE]
    for k in range(n):
        candidates += [var(k), var(k, True)]
    for i, j in itertools.combinations(range(n), 2):
        for c in (ZERO, ONE):
            for ni, nj in itertools.product((False, True), repeat=2):
                candidates.append(maj(var(i, ni), var(j, nj), c))
    for i, j, k in itertools.combinations(range(n), 3):
        for ni, nj, nk in itertools.product((False, True), repeat=3):
            candidates.append(maj(var(i, ni), var(j, nj), var(k, nk)))

    table = PrimitiveTable(n)
    for expr in candidates:
        expr = normalize_inverters(expr)
        bits = tt_bits(expr, n)
        if bits in table.entries:
            raise AssertionError(f"duplicate primitive function {expr}")
        table.entries[bits] = (expr, cost_of(expr))
    assert len(table) == primitive_count(n)
    return table


def gen_m2(prims: PrimitiveTable) -> M2Table:
    """All depth-2 functions M(p1,p2,p3) over distinct primitives.

    Triples are enumerated in lexicographic order of the primitives sorted
    by truth table; for each resulting function the cheapest candidate is
    kept, the earliest triple winning ties.
    """
    n = prims.n
    full = full_mask(n)
    order = sorted(prims.entries)
    m = len(order)
    if m < 3:
        return M2Table(n)
    exprs = [prims.entries[t][0] for t in order]
    ptt = np.array(order, dtype=np.uint64)
    pdepth = np.array([e.depth for e in exprs], dtype=np.int64)
    pgates = np.array([len(e.gates) for e in exprs], dtype=np.int64)

    triples = np.array(list(itertools.combinations(range(m), 3)), dtype=np.int32)
    a, b, c = (ptt[triples[:, k]] for k in range(3))
    tt = (a & b) | (a & c) | (b & c)
    f = np.uint64(full)
    degenerate = ((a ^ b) == f) | ((a ^ c) == f) | ((b ^ c) == f)
    keep = ~degenerate & ~np.isin(tt, ptt)
    triples, tt = triples[keep], tt[keep]
    if not len(tt):
        return M2Table(n)

    depth = 1 + pdepth[triples].max(axis=1)
    gates = 1 + pgates[triples].sum(axis=1)
    assert (depth == 2).all()

    # Candidates sharing the minimal (depth, gates) of their function are
    # ranked by full cost; no other candidate can win.
    order_idx = np.lexsort((np.arange(len(tt)), gates, tt))
    tt, gates, triples = tt[order_idx], gates[order_idx], triples[order_idx]
    starts = np.flatnonzero(np.r_[True, tt[1:] != tt[:-1]])
    group_min = np.repeat(gates[starts], np.diff(np.r_[starts, len(tt)]))
    contender = gates == group_min
    tt, triples = tt[contender], triples[contender]

    table = M2Table(n)
    best: dict[int, tuple[Cost, MajExpr]] = {}
    for key, (i, j, k) in zip(tt.tolist(), triples.tolist()):
        expr = normalize_inverters(maj(exprs[i], exprs[j], exprs[k]))
        cost = cost_of(expr)
        cur = best.get(key)
        if cur is None or cost < cur[0]:
            best[key] = (cost, expr)
    for key in sorted(best):
        cost, expr = best[key]
        table.entries[key] = (expr, cost)
    return table


class Candidate(NamedTuple):
    """A table entry returned by a pattern query."""

    tt: TruthTable
    expr: MajExpr
    cost: Cost
    stored_cost: Cost
    primitive: bool


_GATE_SHIFT = 32


def _cost_key(cost: Cost) -> int:
    return (cost.depth << 48) | (cost.gates << 32) | (cost.inverters << 16) | cost.gate_inputs


class Tables:
    """Primitive and M2 tables for one ``n`` with query structures.

    Entries are held in one array sorted by (cost, truth table); position in
    that order is the ranking used by every query.
    """

    def __init__(self, primitives: PrimitiveTable, m2: M2Table):
        if primitives.n != m2.n:
            raise InputDomainError("primitive and M2 tables disagree on n")
        self.n = primitives.n
        self.primitives = primitives
        self.m2 = m2
        rows = [(cost, t, expr, True) for t, (expr, cost) in primitives.entries.items()]
        rows += [(cost, t, expr, False) for t, (expr, cost) in m2.entries.items()]
        rows.sort(key=lambda r: (r[0], r[1]))
        self.costs = [r[0] for r in rows]
        self.exprs = [r[2] for r in rows]
        self.gate_sets = [r[2].gates for r in rows]
        self.tts = np.array([r[1] for r in rows], dtype=np.uint32)
        self.is_prim = np.array([r[3] for r in rows], dtype=bool)
        self.keys = np.array([_cost_key(r[0]) for r in rows], dtype=np.int64)
        self.position = {r[1]: i for i, r in enumerate(rows)}
        by_gate: dict = {}
        for i, gs in enumerate(self.gate_sets):
            for g in gs:
                by_gate.setdefault(g, []).append(i)
        self.by_gate = {g: np.array(v, dtype=np.int64) for g, v in by_gate.items()}
        self.prim_positions = np.flatnonzero(self.is_prim)
        self.m2_positions = np.flatnonzero(~self.is_prim)
        self._index = None

    def __len__(self):
        return len(self.costs)

    # exact lookup ---------------------------------------------------------

    def query_exact(self, tt) -> tuple[MajExpr, Cost] | None:
        bits = _bits(tt)
        if isinstance(tt, TruthTable) and tt.n != self.n:
            raise InputDomainError(f"tables are for n={self.n}, got n={tt.n}")
        pos = self.position.get(bits)
        if pos is None:
            return None
        return self.exprs[pos], self.costs[pos]

    def tt(self, pos: int) -> int:
        return int(self.tts[pos])

    # pattern queries ------------------------------------------------------

    def matching(self, care: int, value: int, source: str | None = None) -> np.ndarray:
        """Positions (ascending) of entries agreeing with ``value`` on ``care``."""
        tts = self.tts
        if source == "prim":
            sub = self.prim_positions
            return sub[((tts[sub] ^ np.uint32(value)) & np.uint32(care)) == 0]
        if source == "m2":
            sub = self.m2_positions
            return sub[((tts[sub] ^ np.uint32(value)) & np.uint32(care)) == 0]
        return np.flatnonzero(((tts ^ np.uint32(value)) & np.uint32(care)) == 0)

    def shared_gates(self, pos: int, discount) -> int:
        return len(self.gate_sets[pos] & discount) if discount else 0

    def adjusted_key(self, pos: int, discount) -> tuple[int, int]:
        shared = len(self.gate_sets[pos] & discount) if discount else 0
        return (int(self.keys[pos]) - (shared << _GATE_SHIFT), int(self.tts[pos]))

    def adjusted_cost(self, pos: int, discount) -> Cost:
        cost = self.costs[pos]
        shared = len(self.gate_sets[pos] & discount) if discount else 0
        return cost._replace(gates=cost.gates - shared) if shared else cost

    def _discounted(self, discount) -> np.ndarray:
        lists = [self.by_gate[g] for g in discount if g in self.by_gate]
        if not lists:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(lists))

    def ranked(self, care: int, value: int, discount=frozenset(), source: str | None = None) -> list[int]:
        """All matching positions ordered by adjusted cost, then truth table."""
        pos = self.matching(care, value, source)
        if not discount or not len(pos):
            return pos.tolist()
        hit = np.isin(pos, self._discounted(discount))
        if not hit.any():
            return pos.tolist()
        moved = sorted(pos[hit].tolist(), key=lambda p: self.adjusted_key(p, discount))
        rest = pos[~hit].tolist()
        # merge two lists that are each sorted by adjusted key
        out = []
        i = j = 0
        while i < len(moved) and j < len(rest):
            if self.adjusted_key(moved[i], discount) <= self.adjusted_key(rest[j], discount):
                out.append(moved[i])
                i += 1
            else:
                out.append(rest[j])
                j += 1
        out += moved[i:]
        out += rest[j:]
        return out

    def best(self, care: int, value: int, discount=frozenset(), source: str | None = None) -> int | None:
        """Position of the cheapest matching entry under the gate discount."""
        if source is None and self.n <= 4:
            base = self._pattern_index().lookup(care, value)
        else:
            hits = self.matching(care, value, source)
            base = int(hits[0]) if len(hits) else None
        if base is None:
            return None
        if not discount:
            return base
        best_pos, best_key = base, self.adjusted_key(base, discount)
        mask = np.uint32(care)
        val = np.uint32(value)
        for p in self._discounted(discount).tolist():
            if (self.tts[p] ^ val) & mask:
                continue
            if source == "prim" and not self.is_prim[p] or source == "m2" and self.is_prim[p]:
                continue
            key = self.adjusted_key(p, discount)
            if key < best_key:
                best_pos, best_key = p, key
        return best_pos

    def query_pattern(self, pattern: TernaryPattern, cost_discount=frozenset()) -> list[Candidate]:
        if pattern.n != self.n:
            raise InputDomainError(f"tables are for n={self.n}, pattern has n={pattern.n}")
        discount = frozenset(cost_discount)
        return [
            Candidate(
                TruthTable(self.n, self.tt(p)),
                self.exprs[p],
                self.adjusted_cost(p, discount),
                self.costs[p],
                bool(self.is_prim[p]),
            )
            for p in self.ranked(pattern.care, pattern.value, discount)
        ]

    def _pattern_index(self) -> "PatternIndex":
        if self._index is None:
            self._index = PatternIndex(self)
        return self._index


class PatternIndex:
    """Cheapest-match table over all 3^(2^n) ternary patterns (n <= 4).

    Cell (d_0, ..., d_{m-1}) with d_i in {0, 1, 2=don't care} stores the
    smallest entry position agreeing with the pattern, or -1.
    """

    def __init__(self, tables: Tables):
        m = 1 << tables.n
        if m > 16:
            raise ValueError("pattern index only supported for n <= 4")
        self.m = m
        sentinel = np.iinfo(np.int16).max
        arr = np.full(3**m, sentinel, dtype=np.int16)
        weights = 3 ** np.arange(m, dtype=np.int64)
        bits = (tables.tts[:, None].astype(np.int64) >> np.arange(m)) & 1
        arr[bits @ weights] = np.arange(len(tables.tts), dtype=np.int16)
        for i in range(m):
            view = arr.reshape(3 ** (m - 1 - i), 3, 3**i)
            np.minimum(view[:, 0, :], view[:, 1, :], out=view[:, 2, :])
        self.arr = arr
        self.sentinel = sentinel
        chunk = min(m, 8)
        lut = np.zeros((1 << chunk, 1 << chunk), dtype=np.int64)
        for care in range(1 << chunk):
            for value in range(1 << chunk):
                if value & ~care:
                    continue
                idx = 0
                for i in range(chunk):
                    digit = (value >> i) & 1 if (care >> i) & 1 else 2
                    idx += digit * 3**i
                lut[care, value] = idx
        self.lut = lut.tolist()
        self.chunk = chunk
        self.hi_weight = 3**chunk

    def lookup(self, care: int, value: int) -> int | None:
        value &= care
        lo = (1 << self.chunk) - 1
        idx = self.lut[care & lo][value & lo]
        if self.m > self.chunk:
            idx += self.lut[care >> self.chunk][value >> self.chunk] * self.hi_weight
        pos = int(self.arr[idx])
        return None if pos == self.sentinel else pos


def build_tables(n: int) -> Tables:
    prims = gen_primitives(n)
    return Tables(prims, gen_m2(prims))


# persistence --------------------------------------------------------------

MAGIC = b"MPC2"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBII")
_COST = struct.Struct("<4H")
OP_CONST0, OP_CONST1, OP_VAR, OP_NOT, OP_MAJ = range(5)


class TableFormatError(ValueError):
    """Raised for corrupt, truncated or mismatched table files."""


def _encode(expr: MajExpr) -> bytes:
    out = bytearray()

    def emit(sig: MajExpr):
        node = sig.node
        if node.kind == CONST:
            out.append(OP_CONST1 if sig.neg else OP_CONST0)
            return
        if node.kind == VAR:
            out.extend((OP_VAR, node.var))
        else:
            for child in node.children:
                emit(child)
            out.append(OP_MAJ)
        if sig.neg:
            out.append(OP_NOT)

    emit(expr)
    return bytes(out)


def _decode(code: bytes) -> MajExpr:
    stack: list[MajExpr] = []
    i = 0
    while i < len(code):
        op = code[i]
        if op == OP_CONST0:
            stack.append(ZERO)
        elif op == OP_CONST1:
            stack.append(ONE)
        elif op == OP_VAR:
            if i + 1 >= len(code):
                raise TableFormatError("truncated VAR operand")
            i += 1
            stack.append(var(code[i]))
        elif op == OP_NOT:
            if not stack:
                raise TableFormatError("NOT on empty stack")
            stack.append(~stack.pop())
        elif op == OP_MAJ:
            if len(stack) < 3:
                raise TableFormatError("MAJ needs three operands")
            c, b, a = stack.pop(), stack.pop(), stack.pop()
            stack.append(maj(a, b, c))
        else:
            raise TableFormatError(f"unknown opcode {op}")
        i += 1
    if len(stack) != 1:
        raise TableFormatError("expression code does not reduce to one value")
    return stack[0]


def _tt_bytes(n: int) -> int:
    return max(1, (1 << n) // 8)


def dump_tables(tables: Tables) -> bytes:
    n = tables.n
    out = bytearray(_HEADER.pack(MAGIC, FORMAT_VERSION, n, len(tables.primitives), len(tables.m2)))
    width = _tt_bytes(n)
    for table in (tables.primitives, tables.m2):
        for t in sorted(table.entries):
            expr, cost = table.entries[t]
            code = _encode(expr)
            out += t.to_bytes(width, "little")
            out += struct.pack("<H", len(code))
            out += code
            out += _COST.pack(*cost)
    out += struct.pack("<I", zlib.crc32(out))
    return bytes(out)


def save_tables(tables: Tables, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(dump_tables(tables))
    os.replace(tmp, path)


def parse_tables(data: bytes, n: int | None = None) -> Tables:
    if len(data) < _HEADER.size + 4:
        raise TableFormatError("table file truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    magic, version, file_n, n_prim, n_m2 = _HEADER.unpack_from(body)
    if magic != MAGIC:
        raise TableFormatError("not a table file (bad magic)")
    if version != FORMAT_VERSION:
        raise TableFormatError(f"unsupported format version {version}")
    if n is not None and file_n != n:
        raise TableFormatError(f"table file is for n={file_n}, expected n={n}")
    if zlib.crc32(body) != crc:
        raise TableFormatError("checksum mismatch")
    check_n(file_n)
    width = _tt_bytes(file_n)
    pos = _HEADER.size
    tables = []
    memo: dict = {}
    for count, cls in ((n_prim, PrimitiveTable), (n_m2, M2Table)):
        table = cls(file_n)
        for _ in range(count):
            if pos + width + 2 > len(body):
                raise TableFormatError("table file truncated")
            t = int.from_bytes(body[pos : pos + width], "little")
            (length,) = struct.unpack_from("<H", body, pos + width)
            pos += width + 2
            if pos + length + _COST.size > len(body):
                raise TableFormatError("table file truncated")
            expr = _decode(body[pos : pos + length])
            pos += length
            cost = Cost(*_COST.unpack_from(body, pos))
            pos += _COST.size
            if tt_bits(expr, file_n, memo) != t or cost_of(expr) != cost:
                raise TableFormatError(f"entry {expr} does not match its stored key or cost")
            table.entries[t] = (expr, cost)
        tables.append(table)
    if pos != len(body):
        raise TableFormatError("trailing bytes after table entries")
    return Tables(*tables)


def load_tables(path, n: int | None = None) -> Tables:
    return parse_tables(Path(path).read_bytes(), n)


# cache --------------------------------------------------------------------

_cache: dict[int, Tables] = {}


def table_dir() -> Path:
    env = os.environ.get("MPC_TABLE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "majsynth"


def table_path(n: int, directory=None) -> Path:
    return Path(directory or table_dir()) / f"mpc_tables_n{n}.lut"


def get_tables(n: int, directory=None) -> Tables:
    """Tables for ``n``, loaded from the cache directory or generated there."""
    check_n(n)
    tables = _cache.get(n)
    if tables is not None:
        return tables
    path = table_path(n, directory)
    if path.exists():
        try:
            tables = load_tables(path, n)
        except TableFormatError as exc:
            log.warning("ignoring unreadable table cache %s: %s", path, exc)
    if tables is None:
        log.info("generating tables for n=%d", n)
        tables = build_tables(n)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            save_tables(tables, path)
        except OSError as exc:
            log.warning("could not cache tables at %s: %s", path, exc)
    _cache[n] = tables
    return tables
