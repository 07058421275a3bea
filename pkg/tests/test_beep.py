import itertools
import random

import pytest

from beer.beep import (
    AmbiguousObservationError,
    BeepChip,
    codeword_neighbors,
    craft_pattern,
    locate_errors,
    run_beep,
)
from beer.code import construct_code, hamming_7_4, sample_random_code
from beer.gf2 import BitMatrix, BitVector
from beer.retention import CellPolarity, charged_mask


def charged_cells(code, d, pol=None):
    pol = pol or CellPolarity.all_true(code.n)
    m = charged_mask(code.encode_int(d), pol)
    return {i for i in range(code.n) if (m >> i) & 1}


def miscorrects(code, d, errors, pol=None):
    """Forward replay: does failing ``errors`` flip a DISCHARGED data bit?"""
    c = code.encode_int(d)
    flips = 0
    for i in errors:
        flips |= 1 << i
    out = code.decode_int(c ^ flips)[0]
    discharged = {j for j in range(code.k) if j not in charged_cells(code, d, pol)}
    return any(((out ^ d) >> j) & 1 for j in discharged)


def test_craft_example_target5_known6():
    code = hamming_7_4()
    # the dataword named in the example qualifies
    assert {5, 6} <= charged_cells(code, 0b0001)
    assert code.columns[5] ^ code.columns[6] == code.columns[3]
    assert miscorrects(code, 0b0001, {5, 6})
    # the adjacency tier is impossible here (6 is both partner and neighbour)
    pat = craft_pattern(code, 5, {6})
    assert pat is not None
    d = pat.dataword_int()
    assert {5, 6} <= charged_cells(code, d) and 3 not in charged_cells(code, d)
    assert miscorrects(code, d, {5, 6})
    assert pat.charged == (0,)


def test_craft_without_known_errors_is_absent():
    for code in (hamming_7_4(), sample_random_code(16, 2)):
        for t in range(code.n):
            assert craft_pattern(code, t, ()) is None


def test_craft_all_ones_column_with_first_parity_bit():
    k = 11
    base = sample_random_code(k, 0)
    cols = list(base.data_columns)
    full = (1 << base.p) - 1
    j = cols.index(full) if full in cols else None
    if j is None:
        cols[0] = full
    else:
        cols[0], cols[j] = cols[j], cols[0]
    code = construct_code(BitMatrix.from_column_ints(cols, base.p), k)
    pat = craft_pattern(code, 0, {k})
    want = code.columns[0] ^ code.columns[k]
    assert pat is not None
    d = pat.dataword_int()
    assert {0, k} <= charged_cells(code, d)
    assert miscorrects(code, d, {0, k})
    # brute force agrees that such a pattern exists
    assert want in code.data_columns


def test_craft_honours_adjacency_when_possible():
    code = sample_random_code(26, 5)
    hits = 0
    for t in range(code.n):
        pat = craft_pattern(code, t, [i for i in range(0, code.n, 5) if i != t])
        if pat is None:
            continue
        d = pat.dataword_int()
        ch = charged_cells(code, d)
        assert t in ch
        hits += all(i not in ch for i in codeword_neighbors(t, code.n))
    assert hits > code.n // 2


def test_craft_rejects_bad_target():
    with pytest.raises(IndexError):
        craft_pattern(hamming_7_4(), 7, {1})


def test_locate_examples():
    code = hamming_7_4()
    assert locate_errors(code, BitVector([1, 0, 0, 0]), BitVector([1, 0, 0, 1])) == {5, 6}
    # bit 0's flip kept as a data error
    got = locate_errors(code, BitVector([1, 0, 0, 0]), BitVector([0, 0, 0, 1]))
    assert got == {0, 4}
    c = code.encode_int(0b0001)
    assert code.decode_int(c ^ (1 << 0) ^ (1 << 4))[0] == 0b1000
    with pytest.raises(AmbiguousObservationError):
        locate_errors(code, BitVector([1, 0, 0, 0]), BitVector([1, 0, 0, 0]))
    with pytest.raises(AmbiguousObservationError):
        locate_errors(code, BitVector([1, 0, 0, 0]), BitVector([1, 1, 1, 0]))


@pytest.mark.parametrize("k, seed, anti", [(4, 0, ()), (11, 1, ()), (11, 2, (0, 5, 12)), (16, 3, (2, 17))])
def test_locate_exact_against_forward_enumeration(k, seed, anti):
    code = sample_random_code(k, seed)
    pol = CellPolarity.from_flags([i in anti for i in range(code.n)])
    rng = random.Random(seed)
    for _ in range(12):
        d = rng.getrandbits(k)
        c = code.encode_int(d)
        ch = sorted(charged_cells(code, d, pol))
        discharged_data = [j for j in range(k) if j not in ch]
        for r in range(2, min(4, len(ch)) + 1):
            for errs in itertools.combinations(ch, r):
                flips = sum(1 << i for i in errs)
                o = code.decode_int(c ^ flips)[0]
                dis_flips = [j for j in discharged_data if ((o ^ d) >> j) & 1]
                if len(dis_flips) == 1:
                    assert locate_errors(code, d, o, pol) == frozenset(errs)
                elif not dis_flips:
                    with pytest.raises(AmbiguousObservationError):
                        locate_errors(code, d, o, pol)


def test_run_beep_examples():
    code = hamming_7_4()
    assert run_beep(code, BeepChip(frozenset(), seed=1)).suspected == frozenset()
    rep = run_beep(code, BeepChip(frozenset({5, 6}), seed=1))
    assert rep.suspected == {5, 6}
    for ev in rep.evidence:
        assert ev.errors <= rep.suspected


def test_run_beep_no_false_positives_and_monotone():
    for trial in range(6):
        code = sample_random_code(26, trial)
        rng = random.Random(trial)
        mask = frozenset(rng.sample(range(code.n), rng.randint(2, 4)))
        rep = run_beep(code, BeepChip(mask, seed=trial), passes=2)
        assert rep.suspected <= mask
        assert rep.history[0] <= rep.history[1] == rep.suspected
        for s in rep.suspected:
            assert any(s in ev.errors for ev in rep.evidence)
        for ev in rep.evidence:
            assert code.decode_int(code.encode_int(ev.written) ^ sum(1 << i for i in ev.errors))[0] == ev.observed


def test_run_beep_probabilistic_and_report_format():
    code = sample_random_code(26, 7)
    mask = frozenset({3, 9, 20})
    rep = run_beep(code, BeepChip(mask, probability=0.75, seed=4), passes=2)
    assert rep.suspected <= mask
    obj = rep.to_dict()
    assert obj["format"] == "beep-report-v1"
    assert set(obj) >= {"suspected", "passes", "skipped", "evidence"}
    again = run_beep(code, BeepChip(mask, probability=0.75, seed=4), passes=2)
    assert again.to_dict() == obj
    with pytest.raises(ValueError):
        run_beep(code, BeepChip(mask), passes=0)
