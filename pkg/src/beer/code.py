"""Systematic single-error-correcting Hamming codes in standard form.

A code is fixed by its ``p x k`` sub-matrix ``P``; the parity-check matrix is
``H = [P | I_p]`` and codewords are laid out as ``[d_0 .. d_{k-1} | p_0 .. p_{p-1}]``.
Column ``j`` of ``H`` is kept as a packed int whose bit ``i`` is ``H[i, j]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .gf2 import BitMatrix, BitVector, DimensionError, parity

CODE_FORMAT = "beer-code-v1"


class InvalidCodeError(ValueError):
    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class FormatError(ValueError):
    """A serialized artifact is malformed or carries the wrong format tag."""


def parity_bits_for(k: int) -> int:
    """Smallest ``p`` with ``2**p >= k + p + 1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = 1
    while (1 << p) < k + p + 1:
        p += 1
    return p


def is_full_length(k: int) -> bool:
    p = parity_bits_for(k)
    return k == (1 << p) - 1 - p


@dataclass(frozen=True)
class DecodeResult:
    dataword: BitVector
    syndrome: BitVector
    corrected_position: int | None
    # nonzero syndrome that matches no column of H (shortened codes only)
    uncorrectable: bool = False


@dataclass(frozen=True, eq=False)
class EccCode:
    k: int
    p: int
    P: BitMatrix
    report_unmatched: bool = field(default=True, compare=False)

    @property
    def n(self) -> int:
        return self.k + self.p

    @cached_property
    def data_columns(self) -> tuple[int, ...]:
        return tuple(self.P.column_ints())

    @cached_property
    def columns(self) -> tuple[int, ...]:
        """All ``n`` columns of H as packed ints."""
        return self.data_columns + tuple(1 << i for i in range(self.p))

    @cached_property
    def H(self) -> BitMatrix:
        return self.P.hstack(BitMatrix.identity(self.p))

    @cached_property
    def G(self) -> BitMatrix:
        """Generator matrix (``n x k``) with ``c = G @ d``."""
        return BitMatrix.from_row_ints(
            [1 << j for j in range(self.k)] + list(self.P.row_ints), self.k
        )

    @cached_property
    def H_rows(self) -> tuple[int, ...]:
        return self.H.row_ints

    @cached_property
    def syndrome_table(self) -> np.ndarray:
        """Codeword position for every syndrome value, -1 where none matches."""
        table = np.full(1 << self.p, -1, dtype=np.int64)
        for pos, col in enumerate(self.columns):
            table[col] = pos
        return table

    @cached_property
    def _position_of(self) -> dict[int, int]:
        return {col: pos for pos, col in enumerate(self.columns)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EccCode):
            return NotImplemented
        return self.k == other.k and self.p == other.p and self.P == other.P

    def __hash__(self) -> int:
        return hash((self.k, self.p, self.P))

    def __repr__(self) -> str:
        return f"EccCode(n={self.n}, k={self.k}, P={self.P.to_lists()})"

    # -- int-level fast paths ------------------------------------------------

    def parity_of(self, d: int) -> int:
        out = 0
        for i, row in enumerate(self.P.row_ints):
            out |= parity(row & d) << i
        return out

    def encode_int(self, d: int) -> int:
        return d | (self.parity_of(d) << self.k)

    def syndrome_int(self, c: int) -> int:
        s = 0
        for i, row in enumerate(self.H_rows):
            s |= parity(row & c) << i
        return s

    def position_of_syndrome(self, s: int) -> int | None:
        return self._position_of.get(s)

    def decode_int(self, c: int) -> tuple[int, int, int | None]:
        """Returns (dataword, syndrome, corrected position)."""
        s = self.syndrome_int(c)
        if s == 0:
            return c & ((1 << self.k) - 1), 0, None
        pos = self._position_of.get(s)
        if pos is not None:
            c ^= 1 << pos
        return c & ((1 << self.k) - 1), s, pos

    def to_dict(self) -> dict[str, Any]:
        return {"format": CODE_FORMAT, "k": self.k, "n": self.n, "P": self.P.to_lists()}


def construct_code(P: BitMatrix, k: int, *, report_unmatched: bool = True) -> EccCode:
    if P.cols != k:
        raise DimensionError(f"P has {P.cols} columns, expected k={k}")
    p = P.rows
    if p < 1:
        raise InvalidCodeError("P must have at least one row")
    if (1 << p) < k + p + 1:
        raise InvalidCodeError(f"{p} parity bits cannot correct {k + p} bit codewords")
    seen: dict[int, int] = {}
    for j, col in enumerate(P.column_ints()):
        if col == 0:
            raise InvalidCodeError(f"data column {j} is zero", column=j)
        if col.bit_count() == 1:
            raise InvalidCodeError(
                f"data column {j} has weight 1 and collides with a parity column", column=j
            )
        if col in seen:
            raise InvalidCodeError(
                f"data column {j} duplicates column {seen[col]}", column=j
            )
        seen[col] = j
    return EccCode(k=k, p=p, P=P, report_unmatched=report_unmatched)


def code_from_columns(columns, p: int, **kw) -> EccCode:
    columns = list(columns)
    return construct_code(BitMatrix.from_column_ints(columns, p), len(columns), **kw)


def encode(code: EccCode, d: BitVector) -> BitVector:
    if len(d) != code.k:
        raise DimensionError(f"dataword has length {len(d)}, expected k={code.k}")
    return BitVector.from_int(code.encode_int(d.value), code.n)


def decode(code: EccCode, c_prime: BitVector) -> DecodeResult:
    """Syndrome decoding.

    A nonzero syndrome that matches no column (possible for shortened codes)
    never flips anything.  ``code.report_unmatched`` only selects whether the
    result is flagged as uncorrectable or passed through silently.
    """
    if len(c_prime) != code.n:
        raise DimensionError(f"codeword has length {len(c_prime)}, expected n={code.n}")
    c = c_prime.value
    s = code.syndrome_int(c)
    pos = code.position_of_syndrome(s) if s else None
    if pos is not None:
        c ^= 1 << pos
    return DecodeResult(
        dataword=BitVector.from_int(c & ((1 << code.k) - 1), code.k),
        syndrome=BitVector.from_int(s, code.p),
        corrected_position=pos,
        uncorrectable=bool(s) and pos is None and code.report_unmatched,
    )


def weight2plus_columns(p: int) -> list[int]:
    return [v for v in range(1 << p) if v.bit_count() >= 2]


def sample_random_code(k: int, seed: int) -> EccCode:
    """Uniformly random standard-form SEC code with the minimal parity count."""
    p = parity_bits_for(k)
    candidates = np.array(weight2plus_columns(p), dtype=np.int64)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(candidates, size=k, replace=False)
    return code_from_columns([int(c) for c in chosen], p)


def canonicalize(code: EccCode, row_groups=None) -> EccCode:
    """Row-permutation representative with the smallest row sequence.

    Rows are compared as big-endian integers (data column 0 most
    significant), so the minimal sequence is the rows sorted ascending.
    ``row_groups`` restricts the permutation to rows within each group
    (lists of row indices); by default every row may move.
    """
    k = code.k
    def key(row: int) -> int:
        # reverse the packed row so column 0 becomes the most significant bit
        return int(format(row, f"0{k}b")[::-1], 2)

    old = code.P.row_ints
    if row_groups is None:
        rows = sorted(old, key=key)
    else:
        rows = list(old)
        for g in row_groups:
            g = sorted(g)
            for i, r in zip(g, sorted((old[i] for i in g), key=key)):
                rows[i] = r
    if tuple(rows) == old:
        return code
    return EccCode(k=k, p=code.p, P=BitMatrix.from_row_ints(rows, k),
                   report_unmatched=code.report_unmatched)


def codes_equivalent(a: EccCode, b: EccCode) -> bool:
    if (a.k, a.p) != (b.k, b.p):
        return False
    return canonicalize(a) == canonicalize(b)


def code_to_json(code: EccCode) -> str:
    return json.dumps(code.to_dict())


def code_from_dict(obj: dict[str, Any]) -> EccCode:
    if not isinstance(obj, dict) or obj.get("format") != CODE_FORMAT:
        raise FormatError(f"expected format {CODE_FORMAT!r}")
    try:
        k, n, rows = int(obj["k"]), int(obj["n"]), obj["P"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed code object: {exc}") from exc
    if not isinstance(rows, list) or len(rows) != n - k:
        raise FormatError(f"P must have n - k = {n - k} rows")
    for row in rows:
        if not isinstance(row, list) or len(row) != k or any(b not in (0, 1) for b in row):
            raise FormatError(f"every P row must hold {k} entries of 0/1")
    return construct_code(BitMatrix(rows, ncols=k), k)


# The (7, 4, 3) Hamming code used as the running example throughout the tests.
HAMMING_7_4 = BitMatrix([
    [1, 1, 1, 0],
    [1, 1, 0, 1],
    [1, 0, 1, 1],
])


def hamming_7_4() -> EccCode:
    return construct_code(HAMMING_7_4, 4)
