import itertools
import random

import pytest

from beer.gf2 import (
    BitMatrix,
    BitVector,
    DimensionError,
    SingularMatrixError,
    mat_vec_mul,
    rank,
    solve_affine,
    solve_linear,
)
from oracles import brute_rank

H_74 = BitMatrix([
    [1, 1, 1, 0, 1, 0, 0],
    [1, 1, 0, 1, 0, 1, 0],
    [1, 0, 1, 1, 0, 0, 1],
])


def test_mat_vec_mul_codeword_is_in_kernel():
    assert mat_vec_mul(H_74, BitVector([1, 0, 0, 0, 1, 1, 1])) == [0, 0, 0]


def test_mat_vec_mul_identity():
    assert mat_vec_mul(BitMatrix.identity(3), BitVector([1, 0, 1])) == [1, 0, 1]


def test_mat_vec_mul_unit_vector_picks_column():
    assert H_74 @ BitVector([0, 0, 1, 0, 0, 0, 0]) == [1, 0, 1]


def test_mat_vec_mul_dimension_error():
    with pytest.raises(DimensionError):
        mat_vec_mul(H_74, BitVector([1, 0, 1]))


@pytest.mark.parametrize("m, expected", [
    (H_74, 3),
    (BitMatrix.zeros(3, 3), 0),
    (BitMatrix.identity(4), 4),
])
def test_rank_examples(m, expected):
    assert rank(m) == expected


def test_solve_linear_examples():
    assert solve_linear(BitMatrix.identity(3), BitVector([0, 1, 1])) == [0, 1, 1]
    assert solve_linear(BitMatrix([[1, 1], [0, 1]]), BitVector([1, 1])) == [0, 1]


def test_solve_linear_singular():
    with pytest.raises(SingularMatrixError):
        solve_linear(BitMatrix([[1, 1], [1, 1]]), BitVector([1, 0]))


def test_solve_linear_rejects_non_square():
    with pytest.raises(DimensionError):
        solve_linear(H_74, BitVector([0, 0, 0]))


def test_rank_matches_brute_force_up_to_5x5():
    rng = random.Random(11)
    for _ in range(400):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        rows = [[rng.randint(0, 1) for _ in range(c)] for _ in range(r)]
        assert rank(BitMatrix(rows)) == brute_rank(rows)


def test_solve_affine_agrees_with_enumeration():
    rng = random.Random(5)
    for _ in range(300):
        nvars, neq = rng.randint(1, 5), rng.randint(1, 5)
        rows = [rng.getrandbits(nvars) for _ in range(neq)]
        rhs = rng.getrandbits(neq)
        sols = [
            x for x in range(1 << nvars)
            if all(((r & x).bit_count() & 1) == (rhs >> i) & 1 for i, r in enumerate(rows))
        ]
        x = solve_affine(rows, rhs, nvars, free_values=rng.getrandbits(nvars))
        if sols:
            assert x in sols
        else:
            assert x is None


def test_solve_affine_free_values_reach_every_solution():
    rows, rhs = [0b011], 0b1  # x0 ^ x1 = 1, x2 free
    got = {solve_affine(rows, rhs, 3, f) for f in range(8)}
    assert got == {x for x in range(8) if ((x & 1) ^ ((x >> 1) & 1)) == 1}


def test_bitvector_basics():
    v = BitVector([1, 0, 1, 1])
    assert len(v) == 4 and v.weight() == 3 and v.support() == [0, 2, 3]
    assert v.flip([0]) == [0, 0, 1, 1]
    assert (v ^ v).weight() == 0
    with pytest.raises(ValueError):
        BitVector([1, 2])
    with pytest.raises(DimensionError):
        v ^ BitVector([1])


def test_bitmatrix_columns_round_trip():
    cols = H_74.column_ints()
    assert BitMatrix.from_column_ints(cols, 3) == H_74
    assert H_74.transpose().transpose() == H_74
    assert H_74.column(2) == [1, 0, 1]
    assert list(itertools.chain.from_iterable(H_74.to_lists()))[:4] == [1, 1, 1, 0]
