"""Majority-inverter expressions.

An expression is a signal: a reference to a DAG node plus a complement
flag.  Nodes are hash-consed, so structurally identical gates are the same
object and sharing falls out of construction.  The constant 1 is the
complemented constant-0 signal.

Gate children are kept in a fixed order (variables, then gates by their
canonical text, then constants), which makes the printed text of a gate its
canonical encoding.
"""

from __future__ import annotations

import threading
from typing import NamedTuple, Sequence

from .truth_table import VAR_NAMES, InputDomainError, TruthTable, check_n, full_mask, var_mask

CONST, VAR, GATE = 0, 1, 2
_RANK = {VAR: 0, GATE: 1, CONST: 2}

# Exhaustive polarity search up to this many gates, greedy passes beyond.
EXHAUSTIVE_FLIP_GATES = 6


class Cost(NamedTuple):
    """Lexicographic cost: depth first, then gates, inverters, gate inputs."""

    depth: int
    gates: int
    inverters: int
    gate_inputs: int

    def __str__(self):
        return f"({self.depth},{self.gates},{self.inverters},{self.gate_inputs})"


ZERO_COST = Cost(0, 0, 0, 0)


class Node:
    __slots__ = ("kind", "var", "children", "text", "depth", "gates", "negs", "fanin", "max_var")

    def __repr__(self):
        return f"Node({self.text})"


class MajExpr:
    """A (possibly complemented) reference to a DAG node."""

    __slots__ = ("node", "neg")

    def __init__(self, node: Node, neg: bool = False):
        self.node = node
        self.neg = bool(neg)

    def __invert__(self) -> "MajExpr":
        return MajExpr(self.node, not self.neg)

    def __xor__(self, flip) -> "MajExpr":
        return MajExpr(self.node, self.neg ^ bool(flip)) if flip else self

    def __eq__(self, other):
        return isinstance(other, MajExpr) and self.node is other.node and self.neg == other.neg

    def __hash__(self):
        return hash((id(self.node), self.neg))

    def __str__(self):
        node = self.node
        if node.kind == CONST:
            return "1" if self.neg else "0"
        return "!" + node.text if self.neg else node.text

    def __repr__(self):
        return f"MajExpr({self})"

    def __reduce__(self):
        return (_from_text, (str(self),))

    @property
    def kind(self) -> int:
        return self.node.kind

    @property
    def is_const(self) -> bool:
        return self.node.kind == CONST

    @property
    def is_gate(self) -> bool:
        return self.node.kind == GATE

    @property
    def depth(self) -> int:
        return self.node.depth

    @property
    def gates(self) -> frozenset:
        return self.node.gates

    @property
    def children(self) -> tuple:
        return self.node.children

    def sort_key(self):
        node = self.node
        return (_RANK[node.kind], node.var, node.text, self.neg)


_intern: dict[str, Node] = {}
_intern_lock = threading.Lock()


def _make_node(kind, var, children, text) -> Node:
    node = Node()
    node.kind = kind
    node.var = var
    node.children = children
    node.text = text
    if kind == GATE:
        node.depth = 1 + max(c.node.depth for c in children)
        gates = set()
        negs = set()
        for c in children:
            gates |= c.node.gates
            negs |= c.node.negs
            if c.neg and c.node.kind != CONST:
                negs.add(c.node)
        gates.add(node)
        node.gates = frozenset(gates)
        node.negs = frozenset(negs)
        node.fanin = sum(1 for c in children if c.node.kind != CONST)
        node.max_var = max(c.node.max_var for c in children)
    else:
        node.depth = 0
        node.gates = frozenset()
        node.negs = frozenset()
        node.fanin = 0
        node.max_var = var
    return node


def _interned(kind, var, children, text) -> Node:
    node = _intern.get(text)
    if node is None:
        with _intern_lock:
            node = _intern.get(text)
            if node is None:
                node = _make_node(kind, var, children, text)
                _intern[text] = node
    return node


_ZERO_NODE = _interned(CONST, -1, (), "0")
ZERO = MajExpr(_ZERO_NODE, False)
ONE = MajExpr(_ZERO_NODE, True)


def const(value) -> MajExpr:
    return ONE if value else ZERO


def var(k: int, neg: bool = False) -> MajExpr:
    if not 0 <= k < len(VAR_NAMES):
        raise InputDomainError(f"variable index {k} out of range")
    return MajExpr(_interned(VAR, k, (), VAR_NAMES[k]), neg)


def maj(a: MajExpr, b: MajExpr, c: MajExpr) -> MajExpr:
    """Build M(a,b,c), collapsing M(x,x,y)=x and M(x,!x,y)=y."""
    if a.node is b.node:
        return a if a.neg == b.neg else c
    if a.node is c.node:
        return a if a.neg == c.neg else b
    if b.node is c.node:
        return b if b.neg == c.neg else a
    kids = tuple(sorted((a, b, c), key=MajExpr.sort_key))
    text = "M(" + ",".join(str(k) for k in kids) + ")"
    return MajExpr(_interned(GATE, -1, kids, text), False)


def max_var(expr: MajExpr) -> int:
    """Largest variable index used, or -1 for constants."""
    return expr.node.max_var


def evaluate(expr: MajExpr, assignment: Sequence[int]) -> int:
    """Evaluate ``expr`` on one input assignment (``assignment[0]`` is A)."""
    if expr.node.max_var >= len(assignment):
        raise InputDomainError(
            f"expression uses variable {VAR_NAMES[expr.node.max_var]} "
            f"but only {len(assignment)} inputs were given"
        )
    memo: dict[Node, int] = {}

    def value(node: Node) -> int:
        if node.kind == CONST:
            return 0
        if node.kind == VAR:
            return 1 if assignment[node.var] else 0
        v = memo.get(node)
        if v is None:
            s = sum(value(c.node) ^ c.neg for c in node.children)
            v = memo[node] = 1 if s >= 2 else 0
        return v

    return value(expr.node) ^ expr.neg


def tt_bits(expr: MajExpr, n: int, memo: dict | None = None) -> int:
    """Bit-parallel truth table of ``expr`` as an integer (bit i = minterm i)."""
    if expr.node.max_var >= n:
        raise InputDomainError(
            f"expression uses variable {VAR_NAMES[expr.node.max_var]} but n={n}"
        )
    full = full_mask(n)
    if memo is None:
        memo = {}

    def bits(node: Node) -> int:
        if node.kind == CONST:
            return 0
        if node.kind == VAR:
            return var_mask(n, node.var)
        v = memo.get(node)
        if v is None:
            a, b, c = (bits(ch.node) ^ (full if ch.neg else 0) for ch in node.children)
            v = memo[node] = (a & b) | (a & c) | (b & c)
        return v

    return bits(expr.node) ^ (full if expr.neg else 0)


def truth_table_of(expr: MajExpr, n: int) -> TruthTable:
    return TruthTable(check_n(n), tt_bits(expr, n))


def cost_of(expr: MajExpr) -> Cost:
    node = expr.node
    if node.kind == CONST:
        return ZERO_COST
    # the root node never appears complemented inside its own cone
    inverters = len(node.negs) + (1 if expr.neg else 0)
    return Cost(node.depth, len(node.gates), inverters, sum(g.fanin for g in node.gates))


def gate_list(expr: MajExpr) -> list[Node]:
    """Distinct gates of ``expr`` in a deterministic bottom-up order."""
    return sorted(expr.node.gates, key=lambda g: (g.depth, g.text))


def _polarity_problem(expr: MajExpr):
    gates = gate_list(expr)
    index = {g: i for i, g in enumerate(gates)}
    edges = []
    for g in gates:
        row = []
        for c in g.children:
            kind = c.node.kind
            if kind == CONST:
                continue
            if kind == VAR:
                row.append((False, c.node.var, c.neg))
            else:
                row.append((True, index[c.node], c.neg))
        edges.append(row)
    return gates, edges


def _polarity_key(flips: int, edges, root: int, root_neg: bool):
    neg_vars = 0
    neg_gates = 0
    neg_edges = 0
    for i, row in enumerate(edges):
        fi = (flips >> i) & 1
        for is_gate, ref, neg in row:
            eff = neg ^ fi
            if is_gate:
                eff ^= (flips >> ref) & 1
            if eff:
                neg_edges += 1
                if is_gate:
                    neg_gates |= 1 << ref
                else:
                    neg_vars |= 1 << ref
    out = root_neg ^ ((flips >> root) & 1)
    inverters = bin(neg_vars).count("1") + bin(neg_gates).count("1") + out
    return (inverters, neg_edges, bin(flips).count("1"), flips)


def _subsets(mask: int):
    sub = 0
    while True:
        yield sub
        sub = (sub - mask) & mask
        if not sub:
            return


def _best_flips(edges, root: int, root_neg: bool, free: int | None = None) -> int:
    count = len(edges)
    if free is None:
        free = (1 << count) - 1
    if bin(free).count("1") <= EXHAUSTIVE_FLIP_GATES:
        return min(_subsets(free), key=lambda f: _polarity_key(f, edges, root, root_neg))
    flips = 0
    best = _polarity_key(0, edges, root, root_neg)
    improved = True
    while improved:
        improved = False
        for i in range(count):
            if not (free >> i) & 1:
                continue
            key = _polarity_key(flips ^ (1 << i), edges, root, root_neg)
            if key < best:
                best, flips, improved = key, flips ^ (1 << i), True
    return flips


def apply_flips(expr: MajExpr, flipped) -> MajExpr:
    """Rewrite each gate in ``flipped`` as !M(!x,!y,!z); the function is unchanged."""
    memo: dict[Node, MajExpr] = {}

    def rebuild(node: Node) -> MajExpr:
        if node.kind != GATE:
            return MajExpr(node)
        out = memo.get(node)
        if out is None:
            kids = [rebuild(c.node) ^ c.neg for c in node.children]
            if node in flipped:
                out = ~maj(~kids[0], ~kids[1], ~kids[2])
            else:
                out = maj(*kids)
            memo[node] = out
        return out

    return rebuild(expr.node) ^ expr.neg


def normalize_inverters(expr: MajExpr, flippable=None) -> MajExpr:
    """Choose per-gate polarity (self-duality) to minimize inverters.

    Among equal inverter counts, complementing a gate output is preferred
    over complementing its inputs.  Only gates in ``flippable`` are touched
    when it is given.  Returns ``expr`` itself when the rewrite is not at
    least as cheap.
    """
    if expr.node.kind != GATE:
        return expr
    gates, edges = _polarity_problem(expr)
    free = None
    if flippable is not None:
        free = sum(1 << i for i, g in enumerate(gates) if g in flippable)
    flips = _best_flips(edges, len(gates) - 1, expr.neg, free)
    if not flips:
        return expr
    flipped = {g for i, g in enumerate(gates) if (flips >> i) & 1}
    out = apply_flips(expr, flipped)
    return out if cost_of(out) <= cost_of(expr) else expr


def shift_vars(expr: MajExpr, offset: int) -> MajExpr:
    """Rename variable k to k+offset throughout ``expr``."""
    memo: dict[Node, MajExpr] = {}

    def rebuild(node: Node) -> MajExpr:
        if node.kind == CONST:
            return ZERO
        if node.kind == VAR:
            return var(node.var + offset)
        out = memo.get(node)
        if out is None:
            out = memo[node] = maj(*(rebuild(c.node) ^ c.neg for c in node.children))
        return out

    return rebuild(expr.node) ^ expr.neg


class ExprSyntaxError(InputDomainError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.pos = pos
        self.text = text


def format_expr(expr: MajExpr) -> str:
    return str(expr)


def parse_expr(text: str, n: int | None = None) -> MajExpr:
    """Parse ``0 | 1 | A..E | !e | M(e,e,e)``; whitespace is ignored.

    Shared subexpressions written out twice become a single DAG node.
    """
    limit = len(VAR_NAMES) if n is None else check_n(n)
    pos = 0
    length = len(text)

    def skip():
        nonlocal pos
        while pos < length and text[pos].isspace():
            pos += 1

    def expect(ch):
        nonlocal pos
        skip()
        if pos >= length or text[pos] != ch:
            found = text[pos] if pos < length else "end of input"
            raise ExprSyntaxError(f"expected {ch!r}, found {found!r}", text, pos)
        pos += 1

    def expression(level=0) -> MajExpr:
        nonlocal pos
        if level > 500:
            raise ExprSyntaxError("expression nested too deeply", text, pos)
        skip()
        if pos >= length:
            raise ExprSyntaxError("unexpected end of input", text, pos)
        ch = text[pos]
        if ch == "!":
            pos += 1
            return ~expression(level + 1)
        if ch in "01":
            pos += 1
            return const(ch == "1")
        if ch == "M":
            pos += 1
            expect("(")
            a = expression(level + 1)
            expect(",")
            b = expression(level + 1)
            expect(",")
            c = expression(level + 1)
            expect(")")
            return maj(a, b, c)
        if ch in VAR_NAMES:
            k = VAR_NAMES.index(ch)
            if k >= limit:
                raise ExprSyntaxError(f"variable {ch} not allowed for n={limit}", text, pos)
            pos += 1
            return var(k)
        raise ExprSyntaxError(f"unexpected character {ch!r}", text, pos)

    out = expression()
    skip()
    if pos != length:
        raise ExprSyntaxError(f"trailing input {text[pos:]!r}", text, pos)
    return out


def _from_text(text: str) -> MajExpr:
    return parse_expr(text)
