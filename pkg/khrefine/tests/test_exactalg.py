import random
from fractions import Fraction

import numpy as np
import pytest

from khrefine.algebra.matrices import (
    FieldMatrix,
    IntMatrix,
    Matrix,
    Subspace,
    image,
    kernel,
    preimage,
    rref,
    solve,
)
from khrefine.algebra.rings import F2Ring, IntegerRing, PrimeFieldRing, RationalRing, get_field, get_ring
from khrefine.errors import DimensionMismatch

FIELDS = [F2Ring(), PrimeFieldRing(3), PrimeFieldRing(5), RationalRing()]


def random_matrix(ring, nrows, ncols, rng, density=0.4) -> FieldMatrix:
    low = -2 if ring.characteristic == 0 else 0
    high = 2 if ring.characteristic == 0 else ring.characteristic - 1
    data = [
        [rng.randint(low, high) if rng.random() < density else 0 for _ in range(ncols)]
        for _ in range(nrows)
    ]
    return FieldMatrix.from_dense(ring, data, ncols=ncols)


def dense_rank_mod_p(data, p: int) -> int:
    """Gaussian elimination on a dense numpy array over F_p."""
    a = np.array(data, dtype=np.int64) % p
    rank = 0
    nrows, ncols = a.shape
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if a[r, col]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, col]), -1, p)) % p
        for r in range(nrows):
            if r != rank and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[rank]) % p
        rank += 1
    return rank


def test_ring_registry():
    assert get_ring("f2") == F2Ring()
    assert get_ring("F7").characteristic == 7
    assert get_ring("q") == RationalRing()
    assert get_ring("z") == IntegerRing()
    with pytest.raises(ValueError):
        get_ring("f4")
    with pytest.raises(ValueError):
        get_ring("r")
    with pytest.raises(ValueError):
        get_field("z")


def test_rational_json():
    q = RationalRing()
    assert q.to_json(Fraction(4, 2)) == 2
    assert q.to_json(Fraction(-1, 3)) == "-1/3"


def test_rref_examples():
    f2 = F2Ring()
    reduction = rref(Matrix.identity(f2, 3))
    assert reduction.rank == 3
    assert reduction.kernel.dimension == 0

    reduction = rref(FieldMatrix.from_dense(f2, [[1, 1], [1, 1]]))
    assert reduction.rank == 1
    assert reduction.pivots == (0,)
    assert [f2.dense(v, 2) for v in reduction.kernel.basis] == [[1, 1]]


@pytest.mark.parametrize("ring", FIELDS, ids=lambda r: r.name)
def test_rank_nullity_and_transpose(subtests, ring):
    rng = random.Random(20)
    for trial in range(10):
        with subtests.test(trial=trial):
            m = random_matrix(ring, 20, rng.randint(5, 25), rng)
            reduction = rref(m)
            assert reduction.rank + reduction.kernel.dimension == m.nrows
            assert m.rank() == m.transpose().rank()
            for v in reduction.kernel.basis:
                assert ring.is_zero(m.apply(v))


def test_bit_packed_rank_matches_dense_oracle(subtests):
    f2 = F2Ring()
    rng = random.Random(50)
    for trial in range(5):
        with subtests.test(trial=trial):
            m = random_matrix(f2, 50, 50, rng, density=0.1 + 0.1 * trial)
            assert m.rank() == dense_rank_mod_p(m.to_dense(), 2)


def test_rational_rank_matches_numpy():
    q = RationalRing()
    rng = random.Random(7)
    for _ in range(5):
        m = random_matrix(q, 8, 6, rng)
        dense = np.array([[float(x) for x in row] for row in m.to_dense()])
        assert m.rank() == np.linalg.matrix_rank(dense)


def test_solve():
    f3 = PrimeFieldRing(3)
    b = f3.vector([(0, 1), (2, 2)])
    assert solve(Matrix.identity(f3, 3), b) == b
    assert solve(FieldMatrix(f3, 3, 3), b) is None
    with pytest.raises(DimensionMismatch):
        solve(Matrix.identity(f3, 2), b)


@pytest.mark.parametrize("ring", FIELDS, ids=lambda r: r.name)
def test_solve_resubstitution(ring):
    rng = random.Random(3)
    for _ in range(10):
        m = random_matrix(ring, 12, 9, rng)
        x = ring.from_dense([rng.randint(0, 2) for _ in range(12)])
        b = m.apply(x)
        y = solve(m, b)
        assert y is not None
        assert ring.items(m.apply(y)) == ring.items(b)
        # Deterministic: the same system gives the same answer
        assert ring.items(solve(m, b)) == ring.items(y)


@pytest.mark.parametrize("ring", FIELDS, ids=lambda r: r.name)
def test_preimage(ring):
    rng = random.Random(11)
    for _ in range(10):
        m = random_matrix(ring, 10, 8, rng)
        assert preimage(m, Subspace.full(ring, 8)) == Subspace.full(ring, 10)
        assert preimage(m, Subspace.zero(ring, 8)) == kernel(m)

        w = Subspace.span(ring, 8, random_matrix(ring, 3, 8, rng).rows)
        im = image(m)
        meet = w.dimension + im.dimension - (w + im).dimension
        assert preimage(m, w).dimension == kernel(m).dimension + meet
        for v in preimage(m, w).basis:
            assert w.contains(m.apply(v))
    with pytest.raises(DimensionMismatch):
        preimage(FieldMatrix(ring, 2, 3), Subspace.zero(ring, 2))


def test_subspace_is_canonical():
    f5 = PrimeFieldRing(5)
    a = Subspace.span(f5, 3, [f5.from_dense([1, 2, 0]), f5.from_dense([0, 1, 1])])
    b = Subspace.span(f5, 3, [f5.from_dense([1, 3, 1]), f5.from_dense([2, 4, 0])])
    assert a == b
    assert a.coordinates(a.basis[1]) == [0, 1]


def test_matrix_shapes():
    z = IntegerRing()
    with pytest.raises(DimensionMismatch):
        IntMatrix(z, 2, 2, [{}])
    with pytest.raises(DimensionMismatch):
        Matrix.from_entries(z, 2, 2, [(2, 0, 1)])
    with pytest.raises(ValueError):
        FieldMatrix(z, 1, 1)
    a = IntMatrix.from_dense(z, [[1, 2], [3, 4]])
    assert (a @ a).to_dense() == [[7, 10], [15, 22]]
    assert a.transpose().to_dense() == [[1, 3], [2, 4]]
    assert a.submatrix([1], [1, 0]).to_dense() == [[4, 3]]
