"""Dense linear algebra over GF(2).

Vectors and matrix rows are packed into Python integers: bit ``i`` of the
integer holds element ``i``.  Python ints are arbitrary-width, so a 127-bit
codeword costs the same handful of machine words as a C bitset would, and
XOR/AND/popcount run in C.
"""

from __future__ import annotations

from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class SingularMatrixError(ArithmeticError):
    """The system has no unique solution."""


def parity(x: int) -> int:
    return x.bit_count() & 1


def pack_bits(bits: Iterable[int]) -> int:
    """Pack a 0/1 sequence into an int, element 0 in the least significant bit."""
    value = 0
    for i, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
        if b:
            value |= 1 << i
    return value


def unpack_bits(value: int, length: int) -> list[int]:
    return [(value >> i) & 1 for i in range(length)]


class BitVector:
    """Immutable fixed-length vector over GF(2)."""

    __slots__ = ("_value", "_length")

    def __init__(self, bits: Iterable[int] = ()):
        bits = list(bits)
        self._value = pack_bits(bits)
        self._length = len(bits)

    @classmethod
    def from_int(cls, value: int, length: int) -> BitVector:
        if length < 0:
            raise ValueError("length must be non-negative")
        if value < 0 or value >> length:
            raise ValueError(f"value {value:#x} does not fit in {length} bits")
        v = cls.__new__(cls)
        v._value = value
        v._length = length
        return v

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls.from_int(0, length)

    @classmethod
    def unit(cls, index: int, length: int) -> BitVector:
        if not 0 <= index < length:
            raise IndexError(index)
        return cls.from_int(1 << index, length)

    @classmethod
    def from_positions(cls, positions: Iterable[int], length: int) -> BitVector:
        value = 0
        for i in positions:
            if not 0 <= i < length:
                raise IndexError(i)
            value |= 1 << i
        return cls.from_int(value, length)

    @property
    def value(self) -> int:
        return self._value

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError(i)
        return (self._value >> i) & 1

    def __iter__(self):
        v = self._value
        for _ in range(self._length):
            yield v & 1
            v >>= 1

    def __xor__(self, other: BitVector) -> BitVector:
        if not isinstance(other, BitVector):
            return NotImplemented
        if len(other) != self._length:
            raise DimensionError(f"length {self._length} vs {len(other)}")
        return BitVector.from_int(self._value ^ other._value, self._length)

    def __and__(self, other: BitVector) -> BitVector:
        if not isinstance(other, BitVector):
            return NotImplemented
        if len(other) != self._length:
            raise DimensionError(f"length {self._length} vs {len(other)}")
        return BitVector.from_int(self._value & other._value, self._length)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BitVector):
            return self._length == other._length and self._value == other._value
        if isinstance(other, (list, tuple)):
            return list(self) == list(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._value, self._length))

    def __repr__(self) -> str:
        return f"BitVector({self.to_list()})"

    def to_list(self) -> list[int]:
        return unpack_bits(self._value, self._length)

    def weight(self) -> int:
        return self._value.bit_count()

    def support(self) -> list[int]:
        return [i for i in range(self._length) if (self._value >> i) & 1]

    def flip(self, positions: Iterable[int]) -> BitVector:
        mask = 0
        for i in positions:
            if not 0 <= i < self._length:
                raise IndexError(i)
            mask ^= 1 << i
        return BitVector.from_int(self._value ^ mask, self._length)


class BitMatrix:
    """Immutable dense matrix over GF(2), stored as one packed int per row."""

    __slots__ = ("_rows", "_ncols")

    def __init__(self, rows: Sequence[Sequence[int]], ncols: int | None = None):
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise DimensionError(f"row {i} has {len(r)} entries, expected {ncols}")
        self._rows = tuple(pack_bits(r) for r in rows)
        self._ncols = ncols

    @classmethod
    def from_row_ints(cls, rows: Iterable[int], ncols: int) -> BitMatrix:
        m = cls.__new__(cls)
        m._rows = tuple(rows)
        m._ncols = ncols
        for r in m._rows:
            if r < 0 or r >> ncols:
                raise ValueError(f"row {r:#x} does not fit in {ncols} columns")
        return m

    @classmethod
    def from_column_ints(cls, columns: Sequence[int], nrows: int) -> BitMatrix:
        rows = [0] * nrows
        for j, col in enumerate(columns):
            if col < 0 or col >> nrows:
                raise ValueError(f"column {j} does not fit in {nrows} rows")
            for i in range(nrows):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        return cls.from_row_ints(rows, len(columns))

    @classmethod
    def identity(cls, size: int) -> BitMatrix:
        return cls.from_row_ints((1 << i for i in range(size)), size)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BitMatrix:
        return cls.from_row_ints([0] * nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), self._ncols

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return self._ncols

    @property
    def row_ints(self) -> tuple[int, ...]:
        return self._rows

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not 0 <= j < self._ncols:
            raise IndexError(j)
        return (self._rows[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector.from_int(self._rows[i], self._ncols)

    def column_int(self, j: int) -> int:
        if not 0 <= j < self._ncols:
            raise IndexError(j)
        col = 0
        for i, r in enumerate(self._rows):
            col |= ((r >> j) & 1) << i
        return col

    def column(self, j: int) -> BitVector:
        return BitVector.from_int(self.column_int(j), len(self._rows))

    def column_ints(self) -> list[int]:
        return [self.column_int(j) for j in range(self._ncols)]

    def hstack(self, other: BitMatrix) -> BitMatrix:
        if other.rows != self.rows:
            raise DimensionError(f"{self.rows} rows vs {other.rows}")
        shift = self._ncols
        return BitMatrix.from_row_ints(
            (a | (b << shift) for a, b in zip(self._rows, other._rows)),
            self._ncols + other._ncols,
        )

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_column_ints(list(self._rows), self._ncols)

    def permute_rows(self, order: Sequence[int]) -> BitMatrix:
        if sorted(order) != list(range(self.rows)):
            raise ValueError("order is not a permutation of the rows")
        return BitMatrix.from_row_ints((self._rows[i] for i in order), self._ncols)

    def to_lists(self) -> list[list[int]]:
        return [unpack_bits(r, self._ncols) for r in self._rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self._ncols == other._ncols and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._rows, self._ncols))

    def __repr__(self) -> str:
        return f"BitMatrix({self.to_lists()})"

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return mat_vec_mul(self, other)
        return NotImplemented


def mat_vec_mul(m: BitMatrix, v: BitVector) -> BitVector:
    if len(v) != m.cols:
        raise DimensionError(f"matrix has {m.cols} columns, vector has length {len(v)}")
    x = v.value
    out = 0
    for i, r in enumerate(m.row_ints):
        out |= ((r & x).bit_count() & 1) << i
    return BitVector.from_int(out, m.rows)


def _eliminate(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form.  Returns (reduced rows, pivot columns).

    Rows are folded one at a time into a fully reduced basis keyed by pivot
    column (the lowest variable bit).  The RREF of a matrix is unique, so the
    order of folding does not matter.  Bits at or above ``ncols`` (an
    augmented right-hand side) never become pivots; rows left with only such
    bits follow the pivot rows.
    """
    var_mask = (1 << ncols) - 1
    basis: dict[int, int] = {}
    residues: list[int] = []
    for r in rows:
        for col, b in basis.items():
            if (r >> col) & 1:
                r ^= b
        low = r & var_mask
        if not low:
            residues.append(r)
            continue
        col = (low & -low).bit_length() - 1
        for c2, b in basis.items():
            if (b >> col) & 1:
                basis[c2] = b ^ r
        basis[col] = r
    pivots = sorted(basis)
    return [basis[c] for c in pivots] + residues, pivots


def rank(m: BitMatrix) -> int:
    return len(_eliminate(list(m.row_ints), m.cols)[1])


def solve_linear(m: BitMatrix, s: BitVector) -> BitVector:
    """Unique solution ``x`` of ``m @ x == s`` for square full-rank ``m``."""
    if m.rows != m.cols:
        raise DimensionError(f"matrix is {m.rows}x{m.cols}, expected square")
    if len(s) != m.rows:
        raise DimensionError(f"right-hand side has length {len(s)}, expected {m.rows}")
    x = solve_affine(m.row_ints, s.value, m.cols)
    if x is None or rank(m) < m.rows:
        raise SingularMatrixError("matrix is singular")
    return BitVector.from_int(x, m.cols)


def solve_affine(
    rows: Sequence[int], rhs: int, nvars: int, free_values: int = 0
) -> int | None:
    """Any solution of the (possibly underdetermined) system ``rows @ x == rhs``.

    ``rows[i]`` packs the coefficients of equation ``i``; bit ``i`` of ``rhs``
    is its right-hand side.  Free variables take their value from the
    matching bit of ``free_values``.  Returns None when inconsistent.
    """
    aug = [r | (((rhs >> i) & 1) << nvars) for i, r in enumerate(rows)]
    reduced, pivots = _eliminate(aug, nvars)
    rhs_bit = 1 << nvars
    for r in reduced[len(pivots):]:
        if r == rhs_bit:
            return None
    var_mask = rhs_bit - 1
    pivot_mask = 0
    for c in pivots:
        pivot_mask |= 1 << c
    x = free_values & var_mask & ~pivot_mask
    for r, c in zip(reduced, pivots):
        # pivot value = rhs xor (free vars appearing in this row)
        val = ((r >> nvars) & 1) ^ parity(r & var_mask & ~(1 << c) & x)
        x |= val << c
    return x
