from typing import NamedTuple, Optional, Sequence

from khrefine.algebra.matrices import Matrix, make_matrix
from khrefine.algebra.rings import Ring
from khrefine.models.cube import Flavor
from khrefine.models.diagram import PlanarDiagram


class EnhancedState(NamedTuple):
    """A cube vertex together with a labeling of its circles (bit 1 = x_-)."""
    vertex: int
    labeling: int


class GradedComplex:
    """
    A cochain complex over a ring, stored per homological grading h.

    Generators of C^h are kept in a fixed order together with their quantum
    gradings; `differentials[h]` is the matrix of C^h -> C^{h+1} with one row per
    generator of C^h. The Khovanov flavor preserves j; the Bar-Natan flavor only
    never decreases it.
    """

    def __init__(
        self,
        diagram: PlanarDiagram,
        flavor: Flavor,
        ring: Ring,
        generators: dict[int, list[EnhancedState]],
        qgradings: dict[int, list[int]],
        differentials: dict[int, Matrix],
    ):
        self.diagram = diagram
        self.flavor = flavor
        self.ring = ring
        self.generators = generators
        self.qgradings = qgradings
        self.differentials = differentials
        self._index: dict[int, dict[EnhancedState, int]] = {}

    @property
    def degrees(self) -> list[int]:
        return sorted(self.generators)

    def dimension(self, h: int) -> int:
        return len(self.generators.get(h, ()))

    @property
    def total_dimension(self) -> int:
        return sum(len(g) for g in self.generators.values())

    def index(self, h: int) -> dict[EnhancedState, int]:
        if h not in self._index:
            self._index[h] = {state: i for i, state in enumerate(self.generators.get(h, ()))}
        return self._index[h]

    def differential(self, h: int) -> Matrix:
        matrix = self.differentials.get(h)
        if matrix is None:
            return make_matrix(self.ring, self.dimension(h), self.dimension(h + 1))
        return matrix

    def quantum_gradings(self, h: int) -> list[int]:
        return self.qgradings.get(h, [])

    @property
    def j_range(self) -> tuple[int, int]:
        values = [j for js in self.qgradings.values() for j in js]
        if not values:
            return 0, 0
        return min(values), max(values)

    def bigradings(self) -> list[tuple[int, int]]:
        return sorted({(h, j) for h in self.generators for j in self.qgradings[h]})

    def block_indices(self, h: int, j: int) -> list[int]:
        return [i for i, q in enumerate(self.quantum_gradings(h)) if q == j]

    def block(self, h: int, j: int, target_j: Optional[int] = None) -> Matrix:
        """The part of δ_h from quantum grading j to target_j (default j), in block-local indices."""
        if target_j is None:
            target_j = j
        rows = self.block_indices(h, j)
        cols = self.block_indices(h + 1, target_j)
        return self.differential(h).submatrix(rows, cols)

    def filtration_order(self, h: int) -> tuple[list[int], list[int], dict[int, int]]:
        """
        Generators of C^h sorted by (j, canonical index).

        Returns the order, the position of every canonical index in it, and the
        position where each quantum grading starts. Each j forms a contiguous run
        in canonical relative order, so F_q is a suffix of the order.
        """
        qs = self.quantum_gradings(h)
        order = sorted(range(len(qs)), key=lambda i: (qs[i], i))
        positions = [0] * len(qs)
        for position, i in enumerate(order):
            positions[i] = position
        starts: dict[int, int] = {}
        for position, i in enumerate(order):
            starts.setdefault(qs[i], position)
        return order, positions, starts

    def restrict(self, keep: dict[int, Sequence[int]]) -> 'GradedComplex':
        """The span of the kept generators with δ restricted to it."""
        generators = {}
        qgradings = {}
        for h in self.degrees:
            indices = list(keep.get(h, ()))
            generators[h] = [self.generators[h][i] for i in indices]
            qgradings[h] = [self.qgradings[h][i] for i in indices]
        differentials = {}
        for h in self.degrees:
            if h + 1 in generators:
                differentials[h] = self.differential(h).submatrix(list(keep.get(h, ())), list(keep.get(h + 1, ())))
        return GradedComplex(self.diagram, self.flavor, self.ring, generators, qgradings, differentials)

    def euler_characteristic(self) -> dict[int, int]:
        """Σ_h (-1)^h dim C^{h,j}, per j."""
        chi: dict[int, int] = {}
        for h in self.degrees:
            for j in self.qgradings[h]:
                chi[j] = chi.get(j, 0) + (-1) ** (h % 2)
        return {j: v for j, v in sorted(chi.items()) if v}

    def __repr__(self) -> str:
        dims = {h: self.dimension(h) for h in self.degrees}
        return f"GradedComplex({self.flavor.value}, {self.ring.name}, dims={dims})"
