"""Truth tables and ternary (don't-care) patterns over up to five variables.

Minterm ``i`` encodes an input assignment with the first variable (``A``) as
the most significant bit of ``i``.  Internally bit ``i`` of the integer
``bits`` holds the output for minterm ``i``; the text form lists minterm 0
first, so ``"00010111"`` is ``M(A,B,C)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

MAX_VARS = 5
VAR_NAMES = "ABCDE"


class InputDomainError(ValueError):
    """Raised for malformed truth tables, patterns or variable indices."""


def check_n(n: int) -> int:
    if not isinstance(n, int) or not 1 <= n <= MAX_VARS:
        raise InputDomainError(f"variable count must be in 1..{MAX_VARS}, got {n!r}")
    return n


def size(n: int) -> int:
    """Number of minterms, 2**n."""
    return 1 << n


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


@lru_cache(maxsize=None)
def var_mask(n: int, k: int) -> int:
    """Truth table bits of variable ``k`` (0 = A) over ``n`` variables."""
    if not 0 <= k < n:
        raise InputDomainError(f"variable index {k} out of range for n={n}")
    shift = n - 1 - k
    mask = 0
    for i in range(1 << n):
        if (i >> shift) & 1:
            mask |= 1 << i
    return mask


def popcount(x: int) -> int:
    return bin(x).count("1")


def minterms_of(bits: int) -> list[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return out


@dataclass(frozen=True, order=True)
class TruthTable:
    """A completely specified function of ``n`` variables."""

    n: int
    bits: int

    def __post_init__(self):
        check_n(self.n)
        if not isinstance(self.bits, int) or self.bits < 0 or self.bits > full_mask(self.n):
            raise InputDomainError(f"bits do not fit in 2^{self.n} minterms")

    @classmethod
    def from_string(cls, text: str, n: int | None = None) -> "TruthTable":
        text = text.strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1]
        if not text or set(text) - {"0", "1"}:
            raise InputDomainError(f"truth table must be a string of 0/1, got {text!r}")
        width = len(text)
        if width & (width - 1) or width < 2:
            raise InputDomainError(f"truth table length {width} is not 2^n for n >= 1")
        k = width.bit_length() - 1
        if n is not None and n != k:
            raise InputDomainError(f"truth table has {width} bits but n={n} needs {1 << n}")
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(k, bits)

    @classmethod
    def from_hex(cls, text: str, n: int) -> "TruthTable":
        """Parse hex where the most significant nibble holds minterms 0-3."""
        check_n(n)
        if n < 2:
            raise InputDomainError("hex truth tables need n >= 2")
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        width = (1 << n) // 4
        if len(text) != width:
            raise InputDomainError(f"hex truth table for n={n} needs {width} digits, got {len(text)}")
        try:
            value = int(text, 16)
        except ValueError:
            raise InputDomainError(f"invalid hex truth table {text!r}") from None
        return cls.from_string(format(value, f"0{1 << n}b"), n)

    @classmethod
    def from_minterms(cls, n: int, minterms) -> "TruthTable":
        bits = 0
        for m in minterms:
            if not 0 <= m < (1 << check_n(n)):
                raise InputDomainError(f"minterm {m} out of range for n={n}")
            bits |= 1 << m
        return cls(n, bits)

    @classmethod
    def variable(cls, n: int, k: int) -> "TruthTable":
        return cls(n, var_mask(check_n(n), k))

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(1 << self.n))

    def to_hex(self) -> str:
        if self.n < 2:
            raise InputDomainError("hex truth tables need n >= 2")
        return format(int(str(self), 2), f"0{(1 << self.n) // 4}x")

    def __getitem__(self, minterm: int) -> int:
        if not 0 <= minterm < (1 << self.n):
            raise IndexError(minterm)
        return (self.bits >> minterm) & 1

    def __len__(self) -> int:
        return 1 << self.n

    def __invert__(self) -> "TruthTable":
        return TruthTable(self.n, self.bits ^ full_mask(self.n))

    def minterms(self) -> list[int]:
        return minterms_of(self.bits)

    def count(self) -> int:
        return popcount(self.bits)

    def cofactors(self) -> tuple["TruthTable", "TruthTable"]:
        """Split on the first variable: (A=0 half, A=1 half) over n-1 variables."""
        if self.n < 2:
            raise InputDomainError("cannot split a 1-variable truth table")
        half = 1 << (self.n - 1)
        low = self.bits & ((1 << half) - 1)
        return TruthTable(self.n - 1, low), TruthTable(self.n - 1, self.bits >> half)


DONT_CARE = "x"


@dataclass(frozen=True)
class TernaryPattern:
    """Per-minterm constraint: 0, 1 or don't-care.

    ``care`` marks constrained minterms, ``value`` holds their required
    outputs (always a subset of ``care``).
    """

    n: int
    care: int
    value: int

    def __post_init__(self):
        check_n(self.n)
        if self.care & ~full_mask(self.n) or self.value & ~self.care:
            raise InputDomainError("pattern value must lie within its care mask")

    @classmethod
    def from_string(cls, text: str, n: int | None = None) -> "TernaryPattern":
        text = text.strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1]
        text = text.lower()
        if not text or set(text) - {"0", "1", DONT_CARE, "-"}:
            raise InputDomainError(f"pattern must use 0, 1 and x, got {text!r}")
        width = len(text)
        if width & (width - 1) or width < 2:
            raise InputDomainError(f"pattern length {width} is not 2^n for n >= 1")
        k = width.bit_length() - 1
        if n is not None and n != k:
            raise InputDomainError(f"pattern has {width} cells but n={n} needs {1 << n}")
        care = value = 0
        for i, ch in enumerate(text):
            if ch == "1":
                care |= 1 << i
                value |= 1 << i
            elif ch == "0":
                care |= 1 << i
        return cls(k, care, value)

    @classmethod
    def dont_care(cls, n: int) -> "TernaryPattern":
        return cls(n, 0, 0)

    @classmethod
    def of(cls, n: int, ones: int, zeros: int) -> "TernaryPattern":
        if ones & zeros:
            raise InputDomainError("a minterm cannot be required both 0 and 1")
        return cls(n, ones | zeros, ones)

    def __str__(self) -> str:
        cells = []
        for i in range(1 << self.n):
            if not (self.care >> i) & 1:
                cells.append(DONT_CARE)
            else:
                cells.append("1" if (self.value >> i) & 1 else "0")
        return "".join(cells)

    @property
    def ones(self) -> int:
        return self.value

    @property
    def zeros(self) -> int:
        return self.care & ~self.value

    def dont_cares(self) -> int:
        return full_mask(self.n) & ~self.care

    def complete(self, fill: int) -> TruthTable:
        """Resolve every don't-care cell to ``fill`` (0 or 1)."""
        bits = self.value | (self.dont_cares() if fill else 0)
        return TruthTable(self.n, bits)


def matches(tt: TruthTable, pattern: TernaryPattern) -> bool:
    if tt.n != pattern.n:
        raise InputDomainError(f"size mismatch: truth table n={tt.n}, pattern n={pattern.n}")
    return (tt.bits ^ pattern.value) & pattern.care == 0
