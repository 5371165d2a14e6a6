from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from khrefine.algebra.matrices import FieldMatrix, Subspace
from khrefine.algebra.rings import Ring, Vec
from khrefine.errors import ParityError
from khrefine.models.complexes import GradedComplex


class HomologyBlock:
    """
    The homology of one block of a complex over a field: C^{h,j} for the Khovanov
    flavor, or all of C^h when `j` is None.

    Vectors are in block-local coordinates, i.e. indexed by position in `indices`.
    The basis is canonical: cocycles reduced modulo coboundaries, then put in
    reduced row echelon form.
    """

    def __init__(
        self,
        ring: Ring,
        h: int,
        j: Optional[int],
        indices: Sequence[int],
        cycles: Subspace,
        boundaries: Subspace,
    ):
        self.ring = ring
        self.h = h
        self.j = j
        self.indices = list(indices)
        self.cycles = cycles
        self.boundaries = boundaries
        self.basis_space = Subspace.span(
            ring, len(self.indices), [boundaries.reduce(z) for z in cycles.basis]
        )

    @property
    def rank(self) -> int:
        return self.basis_space.dimension

    @property
    def basis(self) -> tuple[Vec, ...]:
        return self.basis_space.basis

    def is_cycle(self, v: Vec) -> bool:
        return self.cycles.contains(v)

    def coordinates(self, v: Vec) -> list[Any]:
        """Coordinates of the class of a cocycle in the canonical basis."""
        return self.basis_space.coordinates(self.boundaries.reduce(v))

    def representative(self, coordinates: Sequence[Any]) -> Vec:
        ring = self.ring
        out = ring.zero()
        for c, w in zip(coordinates, self.basis):
            out = ring.axpy(out, c, w)
        return out

    def global_entries(self, v: Vec) -> list[tuple[int, Any]]:
        """Entries of a block-local vector against the generator indices of C^h."""
        return [(self.indices[i], c) for i, c in self.ring.items(v)]

    def state_entries(self, complex_: GradedComplex, v: Vec) -> list[list[Any]]:
        """[vertex, labeling, value] triples of a block-local vector."""
        generators = complex_.generators[self.h]
        return [
            [generators[g].vertex, generators[g].labeling, self.ring.to_json(c)]
            for g, c in self.global_entries(v)
        ]

    def __repr__(self) -> str:
        return f"HomologyBlock(h={self.h}, j={self.j}, rank={self.rank})"


@dataclass(frozen=True)
class FiltrationLevel:
    """F_q, the span of the generators with j >= q; `start` is its first position in filtration order."""
    q: int
    start: int


@dataclass
class LevelMaps:
    """
    The maps out of H_0(F_q) at one filtration level.

    `cycles` is the canonical basis of H_0(F_q), as cocycles in filtration
    coordinates of C^0. Row r of `inclusion` is i_* of basis element r in the
    basis of H_0(C); row r of `projection` is p_* of it in the basis of Kh^{0,q}.
    """
    level: FiltrationLevel
    cycles: list[Vec]
    inclusion: FieldMatrix
    projection: FieldMatrix

    @property
    def q(self) -> int:
        return self.level.q

    @property
    def dimension(self) -> int:
        return len(self.cycles)

    @property
    def inclusion_rank(self) -> int:
        return self.inclusion.rank()


@dataclass(frozen=True)
class FiltrationRanks:
    """rank i_*: H_0(F_q) -> H_0(C) per scanned level q, and the rank of H_0(C)."""
    ranks: dict[int, int]
    total: int

    @property
    def s_min(self) -> int:
        return max(q for q, rank in self.ranks.items() if rank == self.total)

    @property
    def s_max(self) -> int:
        return max(q for q, rank in self.ranks.items() if rank >= 1)

    @property
    def s(self) -> int:
        return self.s_min + 1


@dataclass
class FiltrationMaps:
    """
    i_* and p_* for every odd q in [j_min - 2, j_max + 2], against a single basis
    of H_0(C) fixed once per diagram.
    """
    complex: GradedComplex
    #: canonical indices of C^0 in filtration order, and their quantum gradings
    order: list[int]
    gradings: list[int]
    total_homology: HomologyBlock
    khovanov_blocks: dict[int, HomologyBlock]
    levels: dict[int, LevelMaps] = field(default_factory=dict)

    @property
    def ring(self) -> Ring:
        return self.complex.ring

    @property
    def q_values(self) -> list[int]:
        """Scanned levels, highest first."""
        return sorted(self.levels, reverse=True)

    @property
    def q_min(self) -> int:
        return min(self.levels)

    @property
    def q_max(self) -> int:
        return max(self.levels)

    def level(self, q: int) -> LevelMaps:
        """The maps at level q; outside the scanned range the answer is the one at the nearest end."""
        if q % 2 == 0:
            raise ParityError(f"Filtration level q = {q} must be odd", q=q)
        return self.levels[min(max(q, self.q_min), self.q_max)]

    def inclusion_rank(self, q: int) -> int:
        return self.level(q).inclusion_rank

    def ranks(self) -> FiltrationRanks:
        return FiltrationRanks(
            ranks={q: level.inclusion_rank for q, level in self.levels.items()},
            total=self.total_homology.rank,
        )

    @property
    def s_min(self) -> int:
        return self.ranks().s_min

    @property
    def s_max(self) -> int:
        return self.ranks().s_max

    @property
    def s(self) -> int:
        return self.s_min + 1

    def state_entries(self, v: Vec) -> list[list[Any]]:
        """[vertex, labeling, value] triples of a vector in filtration coordinates of C^0."""
        generators = self.complex.generators[0]
        return [
            [generators[self.order[p]].vertex, generators[self.order[p]].labeling, self.ring.to_json(c)]
            for p, c in self.ring.items(v)
        ]
