"""Bit-exact error profiling with a known ECC function.

For each codeword bit in turn, a dataword is crafted so that the target cell
is CHARGED and a failure of the target, together with errors found so far,
makes the decoder flip a DISCHARGED data bit.  Such a flip can only be a
miscorrection, and it reveals the syndrome exactly: the syndrome is that data
bit's column.  Solving ``H @ c' = s`` for the unseen parity bits then gives
every pre-correction error in the word.

Every cell's charge state is an affine function of the dataword, so crafting
a pattern is a linear system over GF(2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .code import EccCode
from .gf2 import BitVector, DimensionError, solve_affine
from .profile import TestPattern
from .retention import (
    CellPolarity,
    RetentionErrorModel,
    _default_polarity,
    charged_mask,
    simulate_reads,
)

REPORT_FORMAT = "beep-report-v1"
DEFAULT_MAX_SUBSET = 3

Adjacency = Callable[[int, int], Sequence[int]]


class AmbiguousObservationError(ValueError):
    """The observed word does not expose exactly one miscorrection."""


def codeword_neighbors(t: int, n: int) -> list[int]:
    return [i for i in (t - 1, t + 1) if 0 <= i < n]


def _as_int(d) -> int:
    return d.value if isinstance(d, BitVector) else int(d)


def _cell_rows(code: EccCode) -> list[int]:
    """Row ``i`` gives codeword bit ``i`` as a linear form in the dataword."""
    return [1 << j for j in range(code.k)] + list(code.P.row_ints)


def _miscorrection_candidates(code: EccCode, target: int, known: Sequence[int], max_subset: int):
    """Yield ``(partners, j)``: target plus partners XOR to data column ``j``."""
    cols = code.columns
    for r in range(1, min(max_subset, len(known)) + 1):
        for partners in itertools.combinations(known, r):
            s = cols[target]
            for i in partners:
                s ^= cols[i]
            j = code.position_of_syndrome(s)
            if j is None or j >= code.k or j == target or j in partners:
                continue
            yield partners, j


def craft_pattern(
    code: EccCode,
    target: int,
    known_errors: Iterable[int] = (),
    *,
    pol: CellPolarity | None = None,
    adjacency: Adjacency = codeword_neighbors,
    max_subset: int = DEFAULT_MAX_SUBSET,
    fill: int = 0,
    isolate_known: bool = True,
) -> TestPattern | None:
    """A pattern that miscorrects if ``target`` fails alongside known errors.

    Constraint tiers are tried in order: neighbours DISCHARGED with the
    other known errors DISCHARGED too, neighbours only, other known errors
    only, and finally just the miscorrection itself.  ``isolate_known=False``
    drops the tiers that discharge the other known errors.  Within a tier the
    first candidate in (subset size, lexicographic) order wins.  Free
    dataword bits take their values from ``fill``.  Returns None when no
    pattern exists.
    """
    n, k = code.n, code.k
    if not 0 <= target < n:
        raise IndexError(f"target bit {target} outside codeword of length {n}")
    pol = _default_polarity(pol, n)
    known = sorted(set(int(i) for i in known_errors) - {target})
    for i in known:
        if not 0 <= i < n:
            raise IndexError(f"known error {i} outside codeword of length {n}")
    rows = _cell_rows(code)
    neighbors = [i for i in adjacency(target, n) if i != target]

    def attempt(charged: Iterable[int], discharged: Iterable[int]) -> int | None:
        eqs, rhs = [], 0
        for bit, want in itertools.chain(((i, 1) for i in charged), ((i, 0) for i in discharged)):
            rhs |= (want ^ pol.is_anti(bit)) << len(eqs)
            eqs.append(rows[bit])
        return solve_affine(eqs, rhs, k, fill)

    candidates = list(_miscorrection_candidates(code, target, known, max_subset))
    tiers = ((True, True), (True, False), (False, True), (False, False))
    if not isolate_known:
        tiers = ((True, False), (False, False))
    for use_adj, strict in tiers:
        for partners, j in candidates:
            charged = {target, *partners}
            discharged = {j}
            if use_adj:
                discharged.update(neighbors)
            if strict:
                discharged.update(i for i in known if i not in partners)
            if charged & discharged:
                continue
            d = attempt(sorted(charged), sorted(discharged))
            if d is not None:
                c = code.encode_int(d)
                data_charged = charged_mask(c, pol) & ((1 << k) - 1)
                return TestPattern(k, tuple(i for i in range(k) if (data_charged >> i) & 1))
    return None


def locate_errors(
    code: EccCode, d_written, d_observed, pol: CellPolarity | None = None
) -> frozenset[int]:
    """Pre-correction error positions behind one observed miscorrection."""
    k = code.k
    pol = _default_polarity(pol, code.n)
    for d in (d_written, d_observed):
        if isinstance(d, BitVector) and len(d) != k:
            raise DimensionError(f"dataword has length {len(d)}, expected k={k}")
    w, o = _as_int(d_written), _as_int(d_observed)
    c = code.encode_int(w)
    data_discharged = ~charged_mask(c, pol) & ((1 << k) - 1)
    flips = (w ^ o) & data_discharged
    if flips.bit_count() != 1:
        raise AmbiguousObservationError(
            f"{flips.bit_count()} DISCHARGED data bits flipped, need exactly one"
        )
    j = flips.bit_length() - 1
    s = code.columns[j]
    d_pre = o ^ (1 << j)
    p_pre = s ^ code.parity_of(d_pre)
    c_pre = d_pre | (p_pre << k)
    diff = c ^ c_pre
    return frozenset(i for i in range(code.n) if (diff >> i) & 1)


@dataclass(frozen=True)
class BeepChip:
    """Simulated word with a hidden set of error-prone cells."""

    mask: frozenset[int]
    probability: float = 1.0
    seed: int = 0
    pol: CellPolarity | None = None

    def model(self) -> RetentionErrorModel:
        return RetentionErrorModel(self.probability, self.seed, frozenset(self.mask))


@dataclass(frozen=True)
class Evidence:
    target: int
    written: int
    observed: int
    errors: frozenset[int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target,
            "written": self.written,
            "observed": self.observed,
            "errors": sorted(self.errors),
        }


@dataclass
class BeepReport:
    code: EccCode
    suspected: frozenset[int]
    passes: int
    skipped: frozenset[int]
    evidence: list[Evidence] = field(default_factory=list)
    # suspected set after each pass
    history: list[frozenset[int]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "code": self.code.to_dict(),
            "suspected": sorted(self.suspected),
            "passes": self.passes,
            "skipped": sorted(self.skipped),
            "evidence": [e.to_dict() for e in self.evidence],
        }


def _fill_bits(seed: int, pass_index: int, target: int, k: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(pass_index, target, 2)))
    bits = rng.integers(0, 2, size=k)
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def run_beep(
    code: EccCode,
    chip: BeepChip,
    passes: int = 1,
    words_per_pattern: int | None = None,
    *,
    adjacency: Adjacency = codeword_neighbors,
    max_subset: int = DEFAULT_MAX_SUBSET,
    random_fill: bool = True,
) -> BeepReport:
    """Walk the codeword ``passes`` times, crafting and testing one pattern per bit.

    Before any error is known, a target is paired with every other cell as a
    potential partner, so the first pattern can already expose two failing
    cells.  With ``random_fill`` the unconstrained dataword bits are drawn
    from the chip seed, otherwise they are zero.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    n, k = code.n, code.k
    pol = _default_polarity(chip.pol, n)
    if words_per_pattern is None:
        words_per_pattern = 1 if chip.probability >= 1.0 else 64
    if words_per_pattern < 1:
        raise ValueError("words_per_pattern must be >= 1")
    model = chip.model()

    suspected: set[int] = set()
    evidence: list[Evidence] = []
    history: list[frozenset[int]] = []
    skipped: set[int] = set()
    for ps in range(passes):
        skipped = set()
        for t in range(n):
            fill = _fill_bits(chip.seed, ps, t, k) if random_fill else 0
            known = sorted(suspected - {t})
            pattern = craft_pattern(
                code, t, known, pol=pol, adjacency=adjacency, max_subset=max_subset, fill=fill
            )
            if pattern is None and not suspected:
                others = [i for i in range(n) if i != t]
                pattern = craft_pattern(
                    code, t, others, pol=pol, adjacency=adjacency, max_subset=1,
                    fill=fill, isolate_known=False,
                )
            if pattern is None:
                skipped.add(t)
                continue
            d = pattern.dataword_int(pol)
            charged = charged_mask(code.encode_int(d), pol)
            reads = simulate_reads(code, d, pol, model, words=words_per_pattern, stream=(ps, t))
            seen: set[int] = set()
            for row in reads:
                o = int(sum(int(b) << i for i, b in enumerate(row)))
                if o == d or o in seen:
                    continue
                seen.add(o)
                try:
                    errors = locate_errors(code, d, o, pol)
                except AmbiguousObservationError:
                    continue
                if any(not (charged >> i) & 1 for i in errors):
                    # a DISCHARGED cell cannot fail; the read was not a clean miscorrection
                    continue
                evidence.append(Evidence(t, d, o, errors))
                suspected |= errors
        history.append(frozenset(suspected))
    return BeepReport(code, frozenset(suspected), passes, frozenset(skipped), evidence, history)
