"""Miscorrection profiles.

A test pattern charges a chosen set of data cells and discharges the rest.
Its profile entry lists the DISCHARGED data bits where the decoder can be
driven to flip a bit that never failed.  CHARGED data bits are left out of
both the positive and the negative evidence: a flip there may just be the
retention error itself.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .code import EccCode, FormatError
from .gf2 import BitVector, DimensionError
from .retention import (
    NO_NOISE,
    CellPolarity,
    RetentionErrorModel,
    TransientNoiseModel,
    charged_mask,
    simulate_reads,
)

PROFILE_FORMAT = "beer-profile-v1"
OBSERVED_FORMAT = "beer-observed-v1"
DUMP_FORMAT = "beer-dump-v1"

DEFAULT_SUBSET_CAP = 24
DEFAULT_THRESHOLD = 0.01


class ProfileError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class TestPattern:
    k: int
    charged: tuple[int, ...]

    __test__ = False  # not a pytest class

    def __init__(self, k: int, charged: Iterable[int]):
        charged = tuple(sorted(set(int(i) for i in charged)))
        for i in charged:
            if not 0 <= i < k:
                raise ValueError(f"charged bit {i} outside [0, {k})")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "charged", charged)

    @property
    def charged_mask(self) -> int:
        m = 0
        for i in self.charged:
            m |= 1 << i
        return m

    def dataword_int(self, pol: CellPolarity | None = None) -> int:
        """Logical dataword that puts exactly the charged cells into the CHARGED state."""
        anti = pol.data_anti(self.k) if pol is not None else 0
        return self.charged_mask ^ anti

    def dataword(self, pol: CellPolarity | None = None) -> BitVector:
        return BitVector.from_int(self.dataword_int(pol), self.k)

    def __repr__(self) -> str:
        return f"TestPattern(k={self.k}, charged={set(self.charged) or '{}'})"


@dataclass(frozen=True)
class ProfileEntry:
    pattern: TestPattern
    miscorrectable: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "miscorrectable", frozenset(self.miscorrectable))
        bad = self.miscorrectable & set(self.pattern.charged)
        if bad:
            raise ProfileError(f"charged bits {sorted(bad)} cannot be marked miscorrectable")
        for j in self.miscorrectable:
            if not 0 <= j < self.pattern.k:
                raise ProfileError(f"bit {j} outside [0, {self.pattern.k})")


@dataclass(frozen=True)
class MiscorrectionProfile:
    k: int
    entries: tuple[ProfileEntry, ...]

    def __init__(self, k: int, entries: Iterable[ProfileEntry]):
        entries = tuple(entries)
        for e in entries:
            if e.pattern.k != k:
                raise ProfileError(f"pattern over {e.pattern.k} bits in a k={k} profile")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_mapping(cls, k: int, mapping: Mapping[Iterable[int], Iterable[int]]):
        return cls(k, [ProfileEntry(TestPattern(k, c), frozenset(m)) for c, m in mapping.items()])

    def as_dict(self) -> dict[tuple[int, ...], frozenset[int]]:
        out: dict[tuple[int, ...], frozenset[int]] = {}
        for e in self.entries:
            out[e.pattern.charged] = out.get(e.pattern.charged, frozenset()) | e.miscorrectable
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MiscorrectionProfile):
            return NotImplemented
        return self.k == other.k and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.k, frozenset(self.as_dict().items())))

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": PROFILE_FORMAT,
            "k": self.k,
            "entries": [
                {"charged": list(e.pattern.charged), "miscorrectable": sorted(e.miscorrectable)}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> MiscorrectionProfile:
        if not isinstance(obj, dict) or obj.get("format") != PROFILE_FORMAT:
            raise FormatError(f"expected format {PROFILE_FORMAT!r}")
        try:
            k = int(obj["k"])
            entries = [
                ProfileEntry(TestPattern(k, e["charged"]), frozenset(int(j) for j in e["miscorrectable"]))
                for e in obj["entries"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed profile: {exc}") from exc
        return cls(k, entries)


@dataclass(frozen=True)
class ObservedEntry:
    pattern: TestPattern
    counts: tuple[int, ...]
    words: int

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.counts) != self.pattern.k:
            raise ProfileError(f"expected {self.pattern.k} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ProfileError("counts must be non-negative")


@dataclass(frozen=True)
class ObservedProfile:
    k: int
    entries: tuple[ObservedEntry, ...]

    def __init__(self, k: int, entries: Iterable[ObservedEntry]):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "entries", tuple(entries))

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": OBSERVED_FORMAT,
            "k": self.k,
            "entries": [
                {"charged": list(e.pattern.charged), "counts": list(e.counts), "words": e.words}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> ObservedProfile:
        if not isinstance(obj, dict) or obj.get("format") != OBSERVED_FORMAT:
            raise FormatError(f"expected format {OBSERVED_FORMAT!r}")
        try:
            k = int(obj["k"])
            entries = [
                ObservedEntry(TestPattern(k, e["charged"]), tuple(e["counts"]), int(e["words"]))
                for e in obj["entries"]
            ]
        except (KeyError, TypeError, ValueError, ProfileError) as exc:
            raise FormatError(f"malformed observed profile: {exc}") from exc
        return cls(k, entries)


def load_profile(obj: dict[str, Any]) -> MiscorrectionProfile | ObservedProfile:
    fmt = obj.get("format") if isinstance(obj, dict) else None
    if fmt == PROFILE_FORMAT:
        return MiscorrectionProfile.from_dict(obj)
    if fmt == OBSERVED_FORMAT:
        return ObservedProfile.from_dict(obj)
    raise FormatError(f"unknown profile format {fmt!r}")


def enumerate_test_patterns(k: int, weights: Iterable[int]) -> list[TestPattern]:
    """All w-CHARGED patterns for each weight, weights ascending, patterns lexicographic."""
    weights = sorted(set(weights))
    for w in weights:
        if not 1 <= w <= k:
            raise ValueError(f"pattern weight {w} outside [1, {k}]")
    return [TestPattern(k, c) for w in weights for c in itertools.combinations(range(k), w)]


def exhaustive_entry(
    code: EccCode,
    pattern: TestPattern,
    pol: CellPolarity | None = None,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    witnesses: dict[int, int] | None = None,
) -> frozenset[int]:
    """Brute-force the possible miscorrections of one pattern.

    Every subset of the CHARGED codeword cells is failed in turn and the
    corrupted codeword is run through the decoder.  When ``witnesses`` is
    given it receives, for each miscorrectable bit, the first failing-cell
    mask (packed over codeword positions) that produced it.
    """
    pol = pol or CellPolarity.all_true(code.n)
    d = pattern.dataword_int(pol)
    c = code.encode_int(d)
    charged = charged_mask(c, pol)
    cells = [i for i in range(code.n) if (charged >> i) & 1]
    if len(cells) > subset_cap:
        raise ProfileError(
            f"pattern {pattern.charged} charges {len(cells)} cells; enumerating 2^{len(cells)} "
            f"error subsets exceeds the cap of 2^{subset_cap}, use Monte-Carlo profiling instead"
        )
    discharged_data = ~charged & ((1 << code.k) - 1)
    found = 0
    for r in range(len(cells) + 1):
        for subset in itertools.combinations(cells, r):
            flips = 0
            for i in subset:
                flips |= 1 << i
            d_read, _, _ = code.decode_int(c ^ flips)
            new = (d_read ^ d) & discharged_data & ~found
            if new:
                found |= new
                if witnesses is not None:
                    for j in range(code.k):
                        if (new >> j) & 1:
                            witnesses[j] = flips
    return frozenset(j for j in range(code.k) if (found >> j) & 1)


def exhaustive_profile(
    code: EccCode,
    patterns: Sequence[TestPattern],
    pol: CellPolarity | None = None,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> MiscorrectionProfile:
    entries = []
    for pat in patterns:
        if pat.k != code.k:
            raise DimensionError(f"pattern over {pat.k} bits for a k={code.k} code")
        entries.append(ProfileEntry(pat, exhaustive_entry(code, pat, pol, subset_cap)))
    return MiscorrectionProfile(code.k, entries)


def _mc_counts(args) -> tuple[int, ...]:
    code, pattern, pol, model, noise, words, stream = args
    d = pattern.dataword_int(pol)
    # process in bounded batches to cap memory
    counts = np.zeros(code.k, dtype=np.int64)
    d_bits = np.array([(d >> j) & 1 for j in range(code.k)], dtype=np.uint8)
    batch = 1 << 16
    for start in range(0, words, batch):
        n = min(batch, words - start)
        read = simulate_reads(code, d, pol, model, noise, n, stream, start)
        counts += (read ^ d_bits).sum(axis=0, dtype=np.int64)
    return tuple(int(c) for c in counts)


def monte_carlo_profile(
    code: EccCode,
    patterns: Sequence[TestPattern],
    pol: CellPolarity | None,
    model: RetentionErrorModel,
    words_per_pattern: int,
    noise: TransientNoiseModel = NO_NOISE,
    jobs: int = 1,
) -> ObservedProfile:
    """Per-bit post-correction error counts over simulated words.

    Pattern ``i`` draws from random stream ``i``, so the result does not
    depend on ``jobs``.
    """
    if words_per_pattern < 1:
        raise ValueError("words_per_pattern must be >= 1")
    pol = pol or CellPolarity.all_true(code.n)
    tasks = [(code, pat, pol, model, noise, words_per_pattern, (i,)) for i, pat in enumerate(patterns)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_mc_counts, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_mc_counts(t) for t in tasks]
    return ObservedProfile(
        code.k,
        [ObservedEntry(pat, counts, words_per_pattern) for pat, counts in zip(patterns, results)],
    )


def threshold_filter(
    obs: ObservedProfile,
    relative_threshold: float = DEFAULT_THRESHOLD,
    scope: str = "global",
) -> MiscorrectionProfile:
    """Keep the bits whose counts clear a fraction of the largest count.

    With ``scope="global"`` the reference is the largest non-charged count
    anywhere in the profile, one cut separating miscorrections from rare
    transient flips.  A pattern that never miscorrects then stays empty even
    if noise touched it.  ``scope="pattern"`` compares each pattern against
    its own maximum only.
    """
    if not 0.0 <= relative_threshold < 1.0:
        raise ValueError("relative_threshold must lie in [0, 1)")
    if scope not in ("global", "pattern"):
        raise ValueError("scope must be 'global' or 'pattern'")

    def free_counts(e: ObservedEntry) -> list[tuple[int, int]]:
        charged = set(e.pattern.charged)
        return [(j, c) for j, c in enumerate(e.counts) if j not in charged]

    global_max = max((c for e in obs.entries for _, c in free_counts(e)), default=0)
    entries = []
    for e in obs.entries:
        free = free_counts(e)
        local_max = max((c for _, c in free), default=0)
        if local_max == 0:
            entries.append(ProfileEntry(e.pattern, frozenset()))
            continue
        cut = relative_threshold * (global_max if scope == "global" else local_max)
        entries.append(ProfileEntry(e.pattern, frozenset(j for j, c in free if c > cut)))
    return MiscorrectionProfile(obs.k, entries)


def coverage_estimate(code: EccCode, pattern: TestPattern, probability: float, words: int,
                      pol: CellPolarity | None = None) -> float:
    """Expected fraction of the pattern's error subsets seen at least once."""
    pol = pol or CellPolarity.all_true(code.n)
    m = charged_mask(code.encode_int(pattern.dataword_int(pol)), pol).bit_count()
    q = probability
    total = 0.0
    for s in range(m + 1):
        ps = q**s * (1 - q) ** (m - s)
        total += math.comb(m, s) * -math.expm1(words * math.log1p(-ps)) if ps < 1 else math.comb(m, s)
    return total / 2**m


# -- raw dump ingestion ------------------------------------------------------

def _word_int(w) -> int:
    if isinstance(w, BitVector):
        return w.value
    if isinstance(w, (bytes, bytearray)):
        return int.from_bytes(w, "little")
    if isinstance(w, (list, tuple, np.ndarray)):
        value = 0
        for i, b in enumerate(w):
            value |= int(b) << i
        return value
    return int(w)


def _word_len(w) -> int | None:
    if isinstance(w, BitVector):
        return len(w)
    if isinstance(w, (bytes, bytearray)):
        return 8 * len(w)
    if isinstance(w, (list, tuple, np.ndarray)):
        return len(w)
    return None


def deinterleave_region(region: bytes, ways: int = 2) -> list[bytes]:
    """Split a region of byte-interleaved ECC words: byte ``i`` goes to word ``i % ways``."""
    if len(region) % ways:
        raise FormatError(f"region of {len(region)} bytes does not split into {ways} words")
    return [bytes(region[w::ways]) for w in range(ways)]


def ingest_dump(
    raw_words: Iterable[tuple[Any, Any]],
    pattern_of: Mapping[Any, TestPattern] | None,
    k: int,
    interleaved: bool = False,
) -> ObservedProfile:
    """Group (written, read) word pairs by pattern and count flipped bits.

    ``pattern_of`` maps the written word (packed int, bytes, bit list or
    BitVector) to its pattern; :func:`pattern_lookup` builds one from a
    pattern list.  In interleaved mode each element of ``raw_words`` is a
    pair of 32-byte regions holding two byte-interleaved 16-byte words.
    """
    if pattern_of is None:
        raise FormatError("a written-word to pattern mapping is required")
    lookup = {_word_int(key): pat for key, pat in pattern_of.items()}
    pairs: list[tuple[Any, Any]] = []
    for written, read in raw_words:
        if interleaved:
            if not isinstance(written, (bytes, bytearray)) or not isinstance(read, (bytes, bytearray)):
                raise FormatError("interleaved mode expects raw byte regions")
            pairs.extend(zip(deinterleave_region(written), deinterleave_region(read)))
        else:
            pairs.append((written, read))

    order: list[TestPattern] = []
    counts: dict[TestPattern, np.ndarray] = {}
    totals: dict[TestPattern, int] = {}
    for written, read in pairs:
        for w in (written, read):
            length = _word_len(w)
            if length is not None and length != k:
                raise FormatError(f"word of {length} bits, expected k={k}")
        wi, ri = _word_int(written), _word_int(read)
        if wi >> k or ri >> k:
            raise FormatError(f"word does not fit k={k}")
        pat = lookup.get(wi)
        if pat is None:
            raise FormatError(f"written word {wi:#x} matches no known pattern")
        if pat not in counts:
            order.append(pat)
            counts[pat] = np.zeros(k, dtype=np.int64)
            totals[pat] = 0
        diff = wi ^ ri
        counts[pat] += [(diff >> j) & 1 for j in range(k)]
        totals[pat] += 1
    return ObservedProfile(k, [ObservedEntry(p, tuple(counts[p]), totals[p]) for p in order])


def pattern_lookup(patterns: Iterable[TestPattern], pol: CellPolarity | None = None) -> dict[int, TestPattern]:
    """Map each pattern's written dataword to the pattern."""
    return {p.dataword_int(pol): p for p in patterns}


def read_dump(binary: bytes, sidecar: dict[str, Any]) -> ObservedProfile:
    """Parse a raw dump: concatenated (written, read) records described by a JSON sidecar.

    Sidecar fields: ``format`` (``beer-dump-v1``), ``k``, ``word_bytes`` (bytes
    per written or read record), ``interleaved`` (records are 32-byte regions
    of two byte-interleaved words), ``patterns`` (list of charged-bit lists)
    and optionally ``anti_cells`` (codeword positions that are anti-cells,
    with ``n``).  Bits are little-endian: bit ``j`` is bit ``j % 8`` of byte
    ``j // 8``.
    """
    if sidecar.get("format") != DUMP_FORMAT:
        raise FormatError(f"expected sidecar format {DUMP_FORMAT!r}")
    try:
        k = int(sidecar["k"])
        word_bytes = int(sidecar["word_bytes"])
        interleaved = bool(sidecar.get("interleaved", False))
        patterns = [TestPattern(k, c) for c in sidecar["patterns"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed sidecar: {exc}") from exc
    pol = None
    if sidecar.get("anti_cells"):
        n = int(sidecar["n"])
        pol = CellPolarity.from_flags([i in set(sidecar["anti_cells"]) for i in range(n)])
    if word_bytes <= 0 or len(binary) % (2 * word_bytes):
        raise FormatError(f"dump length {len(binary)} is not a whole number of record pairs")
    per_word = word_bytes // 2 if interleaved else word_bytes
    if 8 * per_word < k:
        raise FormatError(f"{per_word}-byte words cannot hold k={k} bits")
    records = []
    for off in range(0, len(binary), 2 * word_bytes):
        records.append((binary[off:off + word_bytes], binary[off + word_bytes:off + 2 * word_bytes]))

    def trim(pair):
        w, r = pair
        if 8 * len(w) == k:
            return w, r
        wi, ri = int.from_bytes(w, "little"), int.from_bytes(r, "little")
        if wi >> k or ri >> k:
            raise FormatError(f"word sets bits above k={k}")
        return BitVector.from_int(wi, k), BitVector.from_int(ri, k)

    if interleaved:
        split = []
        for w, r in records:
            split.extend(zip(deinterleave_region(w), deinterleave_region(r)))
        records = split
    return ingest_dump([trim(p) for p in records], pattern_lookup(patterns, pol), k)


def write_dump(pairs: Sequence[tuple[int, int]], k: int, word_bytes: int) -> bytes:
    """Inverse of :func:`read_dump` for non-interleaved dumps."""
    out = bytearray()
    for w, r in pairs:
        out += int(w).to_bytes(word_bytes, "little")
        out += int(r).to_bytes(word_bytes, "little")
    return bytes(out)


def profile_to_json(profile) -> str:
    return json.dumps(profile.to_dict())
