"""Recover every standard-form SEC code that explains a miscorrection profile.

The unknowns are the ``k`` data columns of ``H``.  Columns are assigned in
index order; each column value is a ``p``-bit int, and the domain of every
unassigned column is a bitset over those values, so a constraint prunes a
whole domain with one AND.

A pattern can miscorrect into DISCHARGED data bit ``j`` iff column ``j`` is
the XOR of some set of CHARGED cells' columns.  With ``M`` the CHARGED parity
cells (they depend on the unknown columns through ``P @ d``) and ``S`` any
subset of the CHARGED data cells, the reachable syndromes are::

    {xor(S) ^ m  :  m a submask of M}

Outside ``M`` such a syndrome is ``xor(S) & ~M``, inside it is free, so the
set is a union of shifted copies of the submask set of ``M``.

Row permutations of ``P`` give equivalent codes.  The search only builds
matrices whose rows are sorted ascending with the first searched column most
significant, so each class is found once.  Columns are searched
most-constrained first; solutions are mapped back and canonicalized.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .code import (
    EccCode,
    FormatError,
    canonicalize,
    code_from_columns,
    code_from_dict,
    parity_bits_for,
)
from .profile import MiscorrectionProfile
from .retention import CellPolarity

SOLUTIONS_FORMAT = "beer-solutions-v1"


def _submask_sets(p: int) -> list[int]:
    """``out[M]`` is the bitset over values of all submasks of ``M``."""
    out = []
    for m in range(1 << p):
        bits, s = 0, m
        while True:
            bits |= 1 << s
            if s == 0:
                break
            s = (s - 1) & m
        out.append(bits)
    return out


def _iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass
class _Entry:
    charged: tuple[int, ...]
    targets: tuple[tuple[int, bool], ...]
    trigger: int                   # last column the reachable set depends on


@dataclass
class SolveStats:
    nodes: int = 0
    wall_time: float = 0.0

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {"nodes": self.nodes}
        if timings:
            d["wall_time"] = round(self.wall_time, 6)
        return d


@dataclass
class SolveOutcome:
    solutions: list[EccCode]
    exhausted: bool
    stats: SolveStats = field(default_factory=SolveStats)

    def to_dict(self, k: int, timings: bool = False) -> dict[str, Any]:
        return {
            "format": SOLUTIONS_FORMAT,
            "k": k,
            "solutions": [c.to_dict() for c in self.solutions],
            "exhausted": self.exhausted,
            "stats": self.stats.to_dict(timings),
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> SolveOutcome:
        if not isinstance(obj, dict) or obj.get("format") != SOLUTIONS_FORMAT:
            raise FormatError(f"expected format {SOLUTIONS_FORMAT!r}")
        try:
            sols = [code_from_dict(c) for c in obj["solutions"]]
            stats = SolveStats(int(obj.get("stats", {}).get("nodes", 0)),
                               float(obj.get("stats", {}).get("wall_time", 0.0)))
            return cls(sols, bool(obj["exhausted"]), stats)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed solutions file: {exc}") from exc


class _Search:
    def __init__(self, profile: MiscorrectionProfile, k: int, p: int, pol: CellPolarity):
        self.k, self.p = k, p
        self.parity_anti = pol.parity_anti(k)
        # The parity charge mask of a pattern is XOR(cols[charged]) ^ a with
        # a = XOR(cols[anti data bits]) ^ parity_anti, shared by all patterns.
        # The search fixes a up front and checks it once its columns are set.
        self.data_anti = tuple(_iter_bits(pol.data_anti(k)))
        self.anti_last = max(self.data_anti, default=-1)
        self.a = self.parity_anti
        self.sub = _submask_sets(p)
        self.full = (1 << (1 << p)) - 1
        base = 0
        for v in range(1 << p):
            if v.bit_count() >= 2:
                base |= 1 << v
        self.base_domain = base

        self.by_trigger: list[list[_Entry]] = [[] for _ in range(k + 1)]
        for charged, miscorrectable in profile.as_dict().items():
            targets = tuple((j, j in miscorrectable) for j in range(k) if j not in charged)
            trigger = max(charged, default=-1)
            self.by_trigger[trigger + 1].append(_Entry(tuple(charged), targets, trigger))
        self.nodes = 0

    def reachable(self, entry: _Entry, cols: list[int]) -> int:
        m = self.a
        for i in entry.charged:
            m ^= cols[i]
        outside = ~m
        offsets = set()
        for r in range(len(entry.charged) + 1):
            for sub in itertools.combinations(entry.charged, r):
                x = 0
                for i in sub:
                    x ^= cols[i]
                offsets.add(x & outside)
        base = self.sub[m]
        bits = 0
        for o in offsets:
            bits |= base << o
        return bits & self.full

    def root_domains(self) -> list[int] | None:
        domains = [self.base_domain] * self.k
        for e in self.by_trigger[0]:
            r = self.reachable(e, [])
            for j, need in e.targets:
                domains[j] &= r if need else ~r
                if not domains[j]:
                    return None
        return domains

    def a_values(self):
        return range(1 << self.p) if self.data_anti else [self.parity_anti]

    def live_roots(self) -> int:
        """Number of values of ``a`` whose root node survives propagation."""
        live = 0
        for a in self.a_values():
            self.a = a
            live += self.root_domains() is not None
        return live

    def run(self, limit: int | None, root_values: list[int] | None = None):
        """Depth-first search; yields column tuples in deterministic order."""
        groups = [g for g in parity_row_groups(self.p, self.parity_anti) if len(g) > 1]
        masks = [sum(1 << i for i in g) for g in groups]
        for a in self.a_values():
            self.a = a
            domains = self.root_domains()
            if domains is None:
                continue
            yield from self._extend(0, [], domains, 0, masks, root_values)

    @staticmethod
    def _canonical_ok(v: int, groups: list[int]) -> bool:
        for g in groups:
            ones = v & g
            if ones and (g & ~ones) > (ones & -ones):
                return False
        return True

    def _extend(self, t, cols, domains, used, groups, root_values=None):
        self.nodes += 1
        k = self.k
        if t == k:
            yield tuple(cols)
            return
        cand = domains[t] & ~used
        entries = self.by_trigger[t + 1]
        # Evidence about already-assigned targets does not depend on the candidate.
        fixed = []
        for e in entries:
            req = forb = 0
            self_need = None
            for j, need in e.targets:
                if j < t:
                    if need:
                        req |= 1 << cols[j]
                    else:
                        forb |= 1 << cols[j]
                elif j == t:
                    self_need = need
            fixed.append((req, forb, self_need))

        for v in _iter_bits(cand):
            if t == 0 and root_values is not None and v not in root_values:
                continue
            if not self._canonical_ok(v, groups):
                continue
            cols.append(v)
            ok = True
            if t == self.anti_last:
                x = self.parity_anti
                for i in self.data_anti:
                    x ^= cols[i]
                ok = x == self.a
            reach = []
            for e, (req, forb, self_need) in zip(entries, fixed):
                if not ok:
                    break
                r = self.reachable(e, cols)
                if (r & req) != req or (r & forb):
                    ok = False
                    break
                if self_need is not None and bool((r >> v) & 1) != self_need:
                    ok = False
                    break
                reach.append(r)
            if ok:
                new_used = used | (1 << v)
                new_domains = list(domains)
                for e, r in zip(entries, reach):
                    for j, need in e.targets:
                        if j > t:
                            new_domains[j] &= r if need else ~r
                for j in range(t + 1, k):
                    if not new_domains[j] & ~new_used:
                        ok = False
                        break
                if ok:
                    new_groups = []
                    for g in groups:
                        for part in (g & ~v, g & v):
                            if part & (part - 1):
                                new_groups.append(part)
                    yield from self._extend(t + 1, cols, new_domains, new_used, new_groups)
            cols.pop()


def parity_row_groups(p: int, parity_anti: int) -> list[list[int]]:
    """Rows of P that may be permuted among themselves.

    Swapping two rows also swaps their parity cells, which only leaves the
    profile unchanged when those cells share a polarity.
    """
    anti = [i for i in range(p) if (parity_anti >> i) & 1]
    true = [i for i in range(p) if not (parity_anti >> i) & 1]
    return [g for g in (true, anti) if g]


def _resolve_p(k: int, p: int | None) -> int:
    return parity_bits_for(k) if p is None else p


def column_order(profile: MiscorrectionProfile, k: int) -> list[int]:
    """Most-constrained-first order: columns that appear in the most evidence."""
    score = [0] * k
    for charged, miscorrectable in profile.as_dict().items():
        for i in charged:
            score[i] += len(miscorrectable)
        for j in miscorrectable:
            score[j] += 1
    return sorted(range(k), key=lambda i: (-score[i], i))


def _relabel(profile: MiscorrectionProfile, order: list[int]) -> MiscorrectionProfile:
    """Profile with data bit ``order[i]`` renamed to ``i``."""
    inv = {old: new for new, old in enumerate(order)}
    mapping = {
        tuple(sorted(inv[i] for i in charged)): {inv[j] for j in mis}
        for charged, mis in profile.as_dict().items()
    }
    return MiscorrectionProfile.from_mapping(profile.k, mapping)


def _relabel_polarity(pol: CellPolarity, order: list[int], k: int) -> CellPolarity:
    anti = pol.anti & ~((1 << k) - 1)
    for new, old in enumerate(order):
        if pol.is_anti(old):
            anti |= 1 << new
    return CellPolarity(pol.n, anti)


def _unpermute(cols: tuple[int, ...], order: list[int]) -> list[int]:
    out = [0] * len(cols)
    for new, old in enumerate(order):
        out[old] = cols[new]
    return out


def _branch_worker(args):
    profile, k, p, pol, limit, root = args
    search = _Search(profile, k, p, pol)
    found = []
    for cols in search.run(limit, [root]):
        found.append(cols)
        if limit is not None and len(found) >= limit:
            return found, False, search.nodes
    return found, True, search.nodes


def solve(
    profile: MiscorrectionProfile,
    k: int,
    limit: int | None = None,
    *,
    p: int | None = None,
    pol: CellPolarity | None = None,
    jobs: int = 1,
) -> SolveOutcome:
    """All canonical codes whose exhaustive profile equals ``profile``.

    With anti-cells among the parity bits, rows are only canonicalized within
    groups of equal parity polarity (see :func:`parity_row_groups`).

    ``exhausted`` is True when the whole search space was explored and fewer
    than ``limit`` solutions exist, so the list is complete.
    """
    if profile.k != k:
        raise ValueError(f"profile is over k={profile.k}, solver asked for k={k}")
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1")
    p = _resolve_p(k, p)
    pol = pol or CellPolarity.all_true(k + p)
    t0 = time.perf_counter()
    order = column_order(profile, k)
    profile = _relabel(profile, order)
    pol = _relabel_polarity(pol, order, k)
    search = _Search(profile, k, p, pol)
    found: list[tuple[int, ...]] = []
    exhausted = True
    nodes = 0

    if jobs > 1 and limit is None:
        roots = list(_iter_bits(search.base_domain))
        tasks = [(profile, k, p, pol, None, r) for r in roots]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for cols, _, n in ex.map(_branch_worker, tasks):
                found.extend(cols)
                nodes += n
        # each branch counts the shared root nodes once
        nodes -= search.live_roots() * (len(roots) - 1)
    else:
        for cols in search.run(limit):
            found.append(cols)
            if limit is not None and len(found) >= limit:
                exhausted = False
                break
        nodes = search.nodes

    groups = parity_row_groups(p, pol.parity_anti(k))
    sols = [canonicalize(code_from_columns(_unpermute(cols, order), p), groups) for cols in found]
    sols.sort(key=lambda c: c.P.row_ints)
    return SolveOutcome(sols, exhausted, SolveStats(nodes, time.perf_counter() - t0))


class Uniqueness(Enum):
    UNIQUE = "unique"
    MULTIPLE = "multiple"
    NONE = "none"


@dataclass
class UniquenessResult:
    kind: Uniqueness
    count: int
    codes: list[EccCode]
    exhausted: bool

    @property
    def code(self) -> EccCode | None:
        return self.codes[0] if self.kind is Uniqueness.UNIQUE else None


def check_uniqueness(
    profile: MiscorrectionProfile,
    k: int,
    *,
    count_all: bool = False,
    max_count: int | None = None,
    p: int | None = None,
    pol: CellPolarity | None = None,
) -> UniquenessResult:
    """Classify a profile as explained by one, several or no codes.

    By default the search stops at the second solution, so ``count`` of a
    MULTIPLE result is a lower bound.  ``count_all`` keeps enumerating (up to
    ``max_count`` when given).
    """
    limit = max_count if count_all else 2
    out = solve(profile, k, limit, p=p, pol=pol)
    n = len(out.solutions)
    if n == 0:
        kind = Uniqueness.NONE
    elif n == 1:
        kind = Uniqueness.UNIQUE
    else:
        kind = Uniqueness.MULTIPLE
    return UniquenessResult(kind, n, out.solutions, out.exhausted)
