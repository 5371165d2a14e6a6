from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

from khrefine.algebra.rings import Ring, Vec
from khrefine.errors import DimensionMismatch


class Matrix:
    """
    A sparse `nrows x ncols` matrix over a ring, stored as one sparse vector per row.

    Matrices act on row vectors from the right: the image of the i-th source basis
    vector is row i, and `apply(x)` computes x·M. A differential C^h -> C^{h+1}
    therefore has one row per generator of C^h.
    """

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring: Ring, nrows: int, ncols: int, rows: Optional[Sequence[Vec]] = None):
        self.ring = ring
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [ring.zero() for _ in range(nrows)]
        if len(rows) != nrows:
            raise DimensionMismatch(
                f"Expected {nrows} rows, got {len(rows)}",
                expected=nrows,
                actual=len(rows),
            )
        self.rows = list(rows)

    @classmethod
    def from_dense(cls, ring: Ring, data: Sequence[Sequence[Any]], ncols: Optional[int] = None):
        if ncols is None:
            ncols = len(data[0]) if data else 0
        return cls(ring, len(data), ncols, [ring.from_dense(row) for row in data])

    @classmethod
    def from_entries(cls, ring: Ring, nrows: int, ncols: int, entries: Iterable[tuple[int, int, Any]]):
        buckets: list[list[tuple[int, Any]]] = [[] for _ in range(nrows)]
        for r, c, value in entries:
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise DimensionMismatch(
                    f"Entry ({r}, {c}) outside a {nrows}x{ncols} matrix",
                    row=r,
                    col=c,
                )
            buckets[r].append((c, value))
        return cls(ring, nrows, ncols, [ring.vector(bucket) for bucket in buckets])

    @classmethod
    def identity(cls, ring: Ring, n: int):
        return cls(ring, n, n, [ring.vector([(i, 1)]) for i in range(n)])

    def to_dense(self) -> list[list[Any]]:
        return [self.ring.dense(row, self.ncols) for row in self.rows]

    def entries(self) -> list[tuple[int, int, Any]]:
        return [
            (r, c, value)
            for r, row in enumerate(self.rows)
            for c, value in self.ring.items(row)
        ]

    def nnz(self) -> int:
        return sum(self.ring.nnz(row) for row in self.rows)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(row) for row in self.rows)

    def apply(self, x: Vec) -> Vec:
        """Return the row vector x·M."""
        ring = self.ring
        out = ring.zero()
        for i, c in ring.items(x):
            if i >= self.nrows:
                raise DimensionMismatch(
                    f"Vector index {i} outside a matrix with {self.nrows} rows",
                    index=i,
                    nrows=self.nrows,
                )
            out = ring.axpy(out, c, self.rows[i])
        return out

    def compose(self, other: 'Matrix') -> 'Matrix':
        """Return self·other, the map `x -> (x·self)·other`."""
        if self.ncols != other.nrows:
            raise DimensionMismatch(
                f"Cannot compose {self.nrows}x{self.ncols} with {other.nrows}x{other.ncols}",
                left=(self.nrows, self.ncols),
                right=(other.nrows, other.ncols),
            )
        return self.__class__(self.ring, self.nrows, other.ncols, [other.apply(row) for row in self.rows])

    __matmul__ = compose

    def add(self, other: 'Matrix') -> 'Matrix':
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch(
                "Cannot add matrices of different shapes",
                left=(self.nrows, self.ncols),
                right=(other.nrows, other.ncols),
            )
        return self.__class__(
            self.ring, self.nrows, self.ncols,
            [self.ring.add(a, b) for a, b in zip(self.rows, other.rows)],
        )

    def scale(self, coefficient: Any) -> 'Matrix':
        return self.__class__(
            self.ring, self.nrows, self.ncols,
            [self.ring.scale(row, coefficient) for row in self.rows],
        )

    def transpose(self) -> 'Matrix':
        buckets: list[list[tuple[int, Any]]] = [[] for _ in range(self.ncols)]
        for r, c, value in self.entries():
            buckets[c].append((r, value))
        return self.__class__(self.ring, self.ncols, self.nrows, [self.ring.vector(b) for b in buckets])

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> 'Matrix':
        """Keep the listed rows and columns, renumbered in the given order."""
        positions = [-1] * self.ncols
        for new, old in enumerate(col_indices):
            positions[old] = new
        return self.__class__(
            self.ring, len(row_indices), len(col_indices),
            [self.ring.permute(self.rows[r], positions) for r in row_indices],
        )

    def permuted(self, row_positions: Sequence[int], col_positions: Sequence[int]) -> 'Matrix':
        """Move row i to row_positions[i] and column c to col_positions[c]."""
        rows: list[Vec] = [self.ring.zero()] * self.nrows
        for r, row in enumerate(self.rows):
            rows[row_positions[r]] = self.ring.permute(row, col_positions)
        return self.__class__(self.ring, self.nrows, self.ncols, rows)

    def rank(self) -> int:
        if self.ring.is_field:
            echelon = Echelon(self.ring)
            for row in self.rows:
                echelon.insert(row)
            return echelon.rank
        from khrefine.algebra.smith import invariant_factors
        return len(invariant_factors(self))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and all(self.ring.items(a) == other.ring.items(b) for a, b in zip(self.rows, other.rows))
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.ring.name}, {self.nrows}x{self.ncols}, nnz={self.nnz()})"


class FieldMatrix(Matrix):
    __slots__ = ()

    def __init__(self, ring: Ring, nrows: int, ncols: int, rows: Optional[Sequence[Vec]] = None):
        if not ring.is_field:
            raise ValueError(f"FieldMatrix needs a field, got {ring.name}")
        super().__init__(ring, nrows, ncols, rows)


class IntMatrix(Matrix):
    __slots__ = ()

    def __init__(self, ring: Ring, nrows: int, ncols: int, rows: Optional[Sequence[Vec]] = None):
        if ring.is_field:
            raise ValueError(f"IntMatrix needs the integers, got {ring.name}")
        super().__init__(ring, nrows, ncols, rows)


def make_matrix(ring: Ring, nrows: int, ncols: int, rows: Optional[Sequence[Vec]] = None) -> Matrix:
    cls = FieldMatrix if ring.is_field else IntMatrix
    return cls(ring, nrows, ncols, rows)


class Echelon:
    """
    Incremental row echelon form over a field.

    Every stored row has its leading (lowest) index as pivot with coefficient 1, and
    pivots are distinct. Rows are not reduced against each other; `rref_rows`
    produces the fully reduced form. With `track=True` each row remembers the
    combination of inserted vectors it came from.
    """

    def __init__(self, ring: Ring, track: bool = False):
        if not ring.is_field:
            raise ValueError(f"Echelon elimination needs a field, got {ring.name}")
        self.ring = ring
        self.track = track
        self.rows: dict[int, Vec] = {}
        self.combos: dict[int, Vec] = {}
        self._bits = ring.characteristic == 2

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def reduce(self, v: Vec, combo: Optional[Vec] = None) -> tuple[Vec, Vec]:
        """Cancel leading terms until the leading index is not a pivot."""
        ring = self.ring
        rows = self.rows
        if combo is None:
            combo = ring.zero()
        if self._bits:
            while v:
                p = (v & -v).bit_length() - 1
                row = rows.get(p)
                if row is None:
                    break
                v ^= row
                if self.track:
                    combo ^= self.combos[p]
            return v, combo
        while v:
            p = ring.leading(v)
            row = rows.get(p)
            if row is None:
                break
            c = v[p]
            v = ring.axpy(v, -c, row)
            if self.track:
                combo = ring.axpy(combo, -c, self.combos[p])
        return v, combo

    def full_reduce(self, v: Vec, combo: Optional[Vec] = None) -> tuple[Vec, Vec]:
        """Cancel every entry sitting on a pivot; the result is the canonical coset representative."""
        ring = self.ring
        rows = self.rows
        if combo is None:
            combo = ring.zero()
        if self._bits:
            kept = 0
            while v:
                low = v & -v
                p = low.bit_length() - 1
                row = rows.get(p)
                if row is None:
                    kept |= low
                    v ^= low
                else:
                    v ^= row
                    if self.track:
                        combo ^= self.combos[p]
            return kept, combo
        kept_entries = []
        while v:
            p = ring.leading(v)
            c = v[p]
            row = rows.get(p)
            if row is None:
                kept_entries.append((p, c))
                v = dict(v)
                del v[p]
            else:
                v = ring.axpy(v, -c, row)
                if self.track:
                    combo = ring.axpy(combo, -c, self.combos[p])
        return ring.vector(kept_entries), combo

    def insert(self, v: Vec, combo: Optional[Vec] = None) -> tuple[Optional[int], Vec]:
        """
        Insert a vector.

        Returns the new pivot, or None when the vector reduced to zero; in the
        latter case the returned combination is a dependency among inserted vectors.
        """
        ring = self.ring
        v, combo = self.reduce(v, combo)
        if ring.is_zero(v):
            return None, combo
        p = ring.leading(v)
        if not self._bits:
            inverse = ring.inverse(v[p])
            v = ring.scale(v, inverse)
            if self.track:
                combo = ring.scale(combo, inverse)
        self.rows[p] = v
        if self.track:
            self.combos[p] = combo
        return p, combo

    def contains(self, v: Vec) -> bool:
        return self.ring.is_zero(self.reduce(v)[0])

    def rref_rows(self) -> list[Vec]:
        """Reduced row echelon basis of the span, sorted by pivot."""
        ring = self.ring
        reduced: dict[int, Vec] = {}
        for p in sorted(self.rows, reverse=True):
            row = self.rows[p]
            out = row
            # Rows with larger pivots are already reduced, so no cancellation cascades
            for i, c in ring.items(row):
                if i != p and i in reduced:
                    out = ring.axpy(out, -c, reduced[i])
            reduced[p] = out
        return [reduced[p] for p in sorted(reduced)]


class Subspace:
    """A subspace of F^ambient, kept as its reduced row echelon basis."""

    __slots__ = ("ring", "ambient", "basis", "pivots", "_echelon")

    def __init__(self, ring: Ring, ambient: int, basis: Sequence[Vec]):
        self.ring = ring
        self.ambient = ambient
        self.basis = tuple(basis)
        self.pivots = tuple(ring.leading(v) for v in self.basis)
        self._echelon: Optional[Echelon] = None

    @classmethod
    def span(cls, ring: Ring, ambient: int, vectors: Iterable[Vec]) -> 'Subspace':
        echelon = Echelon(ring)
        for v in vectors:
            if ring.max_index(v) >= ambient:
                raise DimensionMismatch(
                    f"Vector does not fit in ambient dimension {ambient}",
                    ambient=ambient,
                )
            echelon.insert(v)
        return cls(ring, ambient, echelon.rref_rows())

    @classmethod
    def zero(cls, ring: Ring, ambient: int) -> 'Subspace':
        return cls(ring, ambient, [])

    @classmethod
    def full(cls, ring: Ring, ambient: int) -> 'Subspace':
        return cls(ring, ambient, [ring.vector([(i, 1)]) for i in range(ambient)])

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def echelon(self) -> Echelon:
        if self._echelon is None:
            echelon = Echelon(self.ring)
            for v in self.basis:
                echelon.insert(v)
            self._echelon = echelon
        return self._echelon

    def reduce(self, v: Vec) -> Vec:
        """Canonical representative of v modulo this subspace."""
        return self.echelon().full_reduce(v)[0]

    def contains(self, v: Vec) -> bool:
        return self.ring.is_zero(self.reduce(v))

    def coordinates(self, v: Vec) -> list[Any]:
        """Coordinates of a vector lying in the subspace, read off at the pivots."""
        return [self.ring.entry(v, p) for p in self.pivots]

    def __add__(self, other: 'Subspace') -> 'Subspace':
        return Subspace.span(self.ring, self.ambient, self.basis + other.basis)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and [self.ring.items(v) for v in self.basis] == [other.ring.items(v) for v in other.basis]
        )

    def __repr__(self) -> str:
        return f"Subspace({self.ring.name}, dim={self.dimension}, ambient={self.ambient})"


@dataclass(frozen=True)
class RowReduction:
    rank: int
    pivots: tuple[int, ...]
    reduced: FieldMatrix
    kernel: Subspace
    image: Subspace


def rref(matrix: Matrix) -> RowReduction:
    ring = matrix.ring
    echelon = Echelon(ring, track=True)
    dependencies = []
    for r, row in enumerate(matrix.rows):
        pivot, combo = echelon.insert(row, ring.vector([(r, 1)]))
        if pivot is None:
            dependencies.append(combo)
    basis = echelon.rref_rows()
    image = Subspace(ring, matrix.ncols, basis)
    kernel = Subspace.span(ring, matrix.nrows, dependencies)
    return RowReduction(
        rank=len(basis),
        pivots=image.pivots,
        reduced=FieldMatrix(ring, len(basis), matrix.ncols, basis),
        kernel=kernel,
        image=image,
    )


def kernel(matrix: Matrix) -> Subspace:
    """{x : x·M = 0}."""
    return rref(matrix).kernel


def image(matrix: Matrix) -> Subspace:
    return Subspace.span(matrix.ring, matrix.ncols, matrix.rows)


def solve(matrix: Matrix, b: Vec) -> Optional[Vec]:
    """
    Some x with x·M = b, or None.

    Rows that are dependent on earlier rows get coefficient zero, so the answer
    is the same on every run.
    """
    ring = matrix.ring
    if ring.max_index(b) >= matrix.ncols:
        raise DimensionMismatch(
            f"Right-hand side does not fit {matrix.ncols} columns",
            ncols=matrix.ncols,
        )
    echelon = Echelon(ring, track=True)
    for r, row in enumerate(matrix.rows):
        echelon.insert(row, ring.vector([(r, 1)]))
    remainder, combo = echelon.full_reduce(b)
    if not ring.is_zero(remainder):
        return None
    return ring.scale(combo, -1)


def preimage(matrix: Matrix, target: Subspace) -> Subspace:
    """{x : x·M ∈ target}."""
    if target.ambient != matrix.ncols:
        raise DimensionMismatch(
            f"Subspace of dimension {target.ambient} does not live in the {matrix.ncols}-dimensional codomain",
            ambient=target.ambient,
            ncols=matrix.ncols,
        )
    # Reduction modulo the target is linear with kernel exactly the target
    reduced = FieldMatrix(matrix.ring, matrix.nrows, matrix.ncols, [target.reduce(row) for row in matrix.rows])
    return kernel(reduced)


def restrict_to(subspace: Subspace, matrix: Matrix) -> FieldMatrix:
    """The matrix of M restricted to a subspace, in the subspace's basis."""
    return FieldMatrix(matrix.ring, subspace.dimension, matrix.ncols, [matrix.apply(v) for v in subspace.basis])
