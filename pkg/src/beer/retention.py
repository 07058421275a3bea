"""DRAM data-retention error channel.

Only CHARGED cells leak, and a leaking cell always lands on its DISCHARGED
logical value.  Which logical value is CHARGED depends on the cell polarity:
true-cells store a 1 as charge, anti-cells store a 0 as charge.

Random draws are organised in fixed-size chunks of words.  Each chunk gets its
own generator keyed by ``(seed, stream, chunk index, kind)``, so the failure
pattern of word ``w`` depends only on the seed, the stream and ``w``.  Any
partition of the words across workers reproduces the sequential result.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .code import EccCode
from .gf2 import BitVector, DimensionError

CHUNK_WORDS = 4096

_RETENTION, _NOISE = 0, 1


class ChargeState(IntEnum):
    DISCHARGED = 0
    CHARGED = 1


@dataclass(frozen=True)
class CellPolarity:
    """Per-bit polarity of an ``n``-bit codeword; bit ``i`` of ``anti`` marks an anti-cell."""

    n: int
    anti: int = 0

    def __post_init__(self):
        if self.anti < 0 or self.anti >> self.n:
            raise ValueError("anti-cell mask does not fit the codeword")

    @classmethod
    def all_true(cls, n: int) -> CellPolarity:
        return cls(n, 0)

    @classmethod
    def all_anti(cls, n: int) -> CellPolarity:
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_flags(cls, anti_flags: Sequence[bool]) -> CellPolarity:
        mask = 0
        for i, f in enumerate(anti_flags):
            if f:
                mask |= 1 << i
        return cls(len(anti_flags), mask)

    def is_anti(self, i: int) -> bool:
        return bool((self.anti >> i) & 1)

    def data_anti(self, k: int) -> int:
        return self.anti & ((1 << k) - 1)

    def parity_anti(self, k: int) -> int:
        return self.anti >> k


def _default_polarity(pol: CellPolarity | None, n: int) -> CellPolarity:
    if pol is None:
        return CellPolarity.all_true(n)
    if pol.n != n:
        raise DimensionError(f"polarity covers {pol.n} bits, codeword has {n}")
    return pol


@dataclass(frozen=True)
class RetentionErrorModel:
    """Per-cell failure probability for CHARGED cells.

    With ``mask`` set, only the listed codeword positions can fail (each with
    ``probability``); ``probability=1`` then gives a deterministic error mask.
    """

    probability: float
    seed: int = 0
    mask: frozenset[int] | None = None

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("failure probability must lie in [0, 1]")
        if self.mask is not None:
            object.__setattr__(self, "mask", frozenset(int(i) for i in self.mask))

    @classmethod
    def deterministic(cls, positions: Iterable[int], seed: int = 0) -> RetentionErrorModel:
        return cls(1.0, seed, frozenset(positions))

    def cell_probabilities(self, positions: Sequence[int]) -> np.ndarray:
        if self.mask is None:
            return np.full(len(positions), self.probability)
        return np.array(
            [self.probability if i in self.mask else 0.0 for i in positions], dtype=float
        )


@dataclass(frozen=True)
class TransientNoiseModel:
    probability: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("flip probability must lie in [0, 1]")


NO_NOISE = TransientNoiseModel(0.0)


def charged_mask(c: int, pol: CellPolarity) -> int:
    """Packed CHARGED flags for a packed codeword."""
    return (c ^ pol.anti) & ((1 << pol.n) - 1)


def charge_states(c: BitVector, pol: CellPolarity) -> list[ChargeState]:
    if len(c) != pol.n:
        raise DimensionError(f"codeword has length {len(c)}, polarity covers {pol.n}")
    m = charged_mask(c.value, pol)
    return [ChargeState((m >> i) & 1) for i in range(pol.n)]


def _chunk_rng(seed: int, stream: tuple[int, ...], chunk: int, kind: int):
    ss = np.random.SeedSequence(seed, spawn_key=(*stream, chunk, kind))
    return np.random.default_rng(ss)


def _as_stream(stream) -> tuple[int, ...]:
    if isinstance(stream, (int, np.integer)):
        return (int(stream),)
    return tuple(int(s) for s in stream)


def _chunks(start: int, words: int):
    """Yield (chunk index, first row in chunk, row count, output offset)."""
    w, end = start, start + words
    while w < end:
        ci, row = divmod(w, CHUNK_WORDS)
        count = min(CHUNK_WORDS - row, end - w)
        yield ci, row, count, w - start
        w += count


def failure_draws(
    positions: Sequence[int],
    probs: np.ndarray,
    seed: int,
    stream=(),
    start: int = 0,
    words: int = 1,
) -> np.ndarray:
    """Boolean ``(words, len(positions))`` failure matrix for the given cells.

    Cells with probability 0 or 1 are decided without drawing; the others
    take uniforms in listed order, so the same cell set and word index
    always see the same draws.
    """
    stream = _as_stream(stream)
    probs = np.asarray(probs, dtype=float)
    out = np.zeros((words, len(positions)), dtype=bool)
    out[:, probs >= 1.0] = True
    # only cells with a genuinely random outcome consume uniforms
    random_cols = np.nonzero((probs > 0.0) & (probs < 1.0))[0]
    if len(random_cols) == 0:
        return out
    p = probs[random_cols]
    for ci, row, count, off in _chunks(start, words):
        u = _chunk_rng(seed, stream, ci, _RETENTION).random((CHUNK_WORDS, len(random_cols)))
        out[off:off + count, random_cols] = u[row:row + count] < p
    return out


def noise_flips(
    k: int, probability: float, seed: int, stream=(), start: int = 0, words: int = 1
) -> np.ndarray:
    """``(words, k)`` uint8 matrix of transient read flips.

    The flip count per chunk is binomial and the flipped cells are a uniform
    draw without replacement, which is the same law as independent
    per-bit Bernoulli flips.
    """
    stream = _as_stream(stream)
    out = np.zeros((words, k), dtype=np.uint8)
    if probability <= 0.0 or k == 0:
        return out
    cells = CHUNK_WORDS * k
    for ci, row, count, off in _chunks(start, words):
        rng = _chunk_rng(seed, stream, ci, _NOISE)
        nflip = rng.binomial(cells, probability)
        flat = rng.choice(cells, size=nflip, replace=False)
        r, col = np.divmod(flat, k)
        keep = (r >= row) & (r < row + count)
        out[r[keep] - row + off, col[keep]] ^= 1
    return out


def inject_retention_errors(
    c: BitVector,
    pol: CellPolarity,
    model: RetentionErrorModel,
    word_index: int = 0,
    stream=(),
) -> BitVector:
    if len(c) != pol.n:
        raise DimensionError(f"codeword has length {len(c)}, polarity covers {pol.n}")
    charged = charged_mask(c.value, pol)
    positions = [i for i in range(pol.n) if (charged >> i) & 1]
    fails = failure_draws(
        positions, model.cell_probabilities(positions), model.seed, stream, word_index, 1
    )[0]
    flips = 0
    for i, f in zip(positions, fails):
        if f:
            flips |= 1 << i
    return BitVector.from_int(c.value ^ flips, pol.n)


def _data_int(d) -> int:
    return d.value if isinstance(d, BitVector) else int(d)


def simulate_reads(
    code: EccCode,
    d_written,
    pol: CellPolarity | None,
    model: RetentionErrorModel,
    noise: TransientNoiseModel = NO_NOISE,
    words: int = 1,
    stream=(),
    start: int = 0,
) -> np.ndarray:
    """Write ``d_written`` into ``words`` words, let them decay, read them back.

    Returns the post-correction datawords as a ``(words, k)`` uint8 matrix.
    Word ``start + i`` uses the same random draws regardless of batch size.
    """
    k, n = code.k, code.n
    pol = _default_polarity(pol, n)
    d = _data_int(d_written)
    if d >> k:
        raise DimensionError(f"dataword does not fit k={k}")
    c = code.encode_int(d)
    charged = charged_mask(c, pol)
    positions = [i for i in range(n) if (charged >> i) & 1]
    fails = failure_draws(
        positions, model.cell_probabilities(positions), model.seed, stream, start, words
    )

    cols = np.array([code.columns[i] for i in positions], dtype=np.int64)
    syn = np.zeros(words, dtype=np.int64)
    for j in range(len(positions)):
        syn ^= fails[:, j] * cols[j]
    corrected = code.syndrome_table[syn]

    observed = np.zeros((words, k), dtype=np.uint8)
    observed[:] = [(d >> j) & 1 for j in range(k)]
    for j, pos in enumerate(positions):
        if pos < k:
            observed[:, pos] ^= fails[:, j]
    rows = np.nonzero((corrected >= 0) & (corrected < k))[0]
    observed[rows, corrected[rows]] ^= 1
    if noise.probability > 0:
        observed ^= noise_flips(k, noise.probability, model.seed, stream, start, words)
    return observed


def simulate_read(
    code: EccCode,
    d_written: BitVector,
    pol: CellPolarity | None,
    model: RetentionErrorModel,
    noise: TransientNoiseModel = NO_NOISE,
    word_index: int = 0,
    stream=(),
) -> BitVector:
    if len(d_written) != code.k:
        raise DimensionError(f"dataword has length {len(d_written)}, expected k={code.k}")
    row = simulate_reads(code, d_written, pol, model, noise, 1, stream, word_index)[0]
    return BitVector(int(b) for b in row)
