"""Brute-force reference implementations used to cross-check the library.

Everything here works on plain lists of 0/1 and shares no code with the
package beyond reading ``code.P``.
"""

from __future__ import annotations

import functools
import itertools


def matvec(M, v):
    return [sum(a & b for a, b in zip(row, v)) % 2 for row in M]


def brute_rank(rows):
    """Rank as log2 of the number of distinct row-subset sums."""
    ncols = len(rows[0]) if rows else 0
    span = set()
    for r in range(len(rows) + 1):
        for subset in itertools.combinations(rows, r):
            acc = [0] * ncols
            for row in subset:
                acc = [a ^ b for a, b in zip(acc, row)]
            span.add(tuple(acc))
    return len(span).bit_length() - 1


def P_lists(code):
    return [list(r) for r in code.P.to_lists()]


def H_lists(P):
    p, k = len(P), len(P[0])
    return [P[i] + [1 if j == i else 0 for j in range(p)] for i in range(p)]


def encode(P, d):
    return list(d) + matvec(P, d)


def decode(P, c, H=None):
    """Syndrome decoding with no flip on an unmatched syndrome."""
    H = H or H_lists(P)
    s = matvec(H, c)
    c = list(c)
    if any(s):
        cols = [[H[i][j] for i in range(len(H))] for j in range(len(c))]
        if s in cols:
            c[cols.index(s)] ^= 1
    return c[: len(P[0])]


def brute_entry(P, charged_data, anti=()):
    """Miscorrectable DISCHARGED data bits for one pattern, by full enumeration."""
    k = len(P[0])
    n = k + len(P)
    anti = set(anti)
    d = [(1 if j in charged_data else 0) ^ (1 if j in anti else 0) for j in range(k)]
    c = encode(P, d)
    charged = [i for i in range(n) if c[i] ^ (1 if i in anti else 0)]
    data_charged = {j for j in charged if j < k}
    H = H_lists(P)
    out = set()
    for r in range(len(charged) + 1):
        for fail in itertools.combinations(charged, r):
            c2 = list(c)
            for i in fail:
                c2[i] ^= 1
            got = decode(P, c2, H)
            for j in range(k):
                if got[j] != d[j] and j not in data_charged:
                    out.add(j)
    return frozenset(out)


def brute_profile(P, patterns, anti=()):
    return {tuple(sorted(pat)): brute_entry(P, set(pat), anti) for pat in patterns}


def weight2plus(p):
    return [v for v in range(1 << p) if bin(v).count("1") >= 2]


def columns_to_P(cols, p):
    return [[(c >> i) & 1 for c in cols] for i in range(p)]


def class_key(P, row_groups=None):
    """Key invariant under row permutations within each group (all rows by default)."""
    if row_groups is None:
        return tuple(sorted(tuple(r) for r in P))
    return tuple(tuple(sorted(tuple(P[i]) for i in g)) for g in row_groups)


def row_groups_for(k, p, anti=()):
    """Rows that may be swapped: parity cells of equal polarity. None if all may."""
    anti = set(anti)
    groups = [[i for i in range(p) if (k + i in anti) == flag] for flag in (False, True)]
    groups = [g for g in groups if g]
    return None if len(groups) == 1 else groups


def all_code_classes(k, p, row_groups=None):
    """One representative P per row-permutation class of standard-form SEC codes."""
    seen = {}
    for cols in itertools.permutations(weight2plus(p), k):
        P = columns_to_P(cols, p)
        seen.setdefault(class_key(P, row_groups), P)
    return list(seen.values())


@functools.lru_cache(maxsize=None)
def class_profiles(k, p, patterns, anti=()):
    """``{class key: brute profile}`` over every code class (cached)."""
    groups = row_groups_for(k, p, anti)
    return {class_key(P, groups): brute_profile(P, patterns, anti) for P in all_code_classes(k, p, groups)}


def brute_solutions(profile_map, k, p, anti=()):
    """Class keys of every code whose brute-force profile equals ``profile_map``."""
    patterns = tuple(sorted(profile_map))
    table = class_profiles(k, p, patterns, tuple(sorted(anti)))
    return {key for key, prof in table.items() if prof == profile_map}
