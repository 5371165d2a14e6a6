import time
from itertools import combinations
from typing import Iterable, Optional

import structlog

from khrefine.algebra.matrices import Matrix, make_matrix
from khrefine.algebra.rings import F2Ring, Ring
from khrefine.errors import DimensionMismatch
from khrefine.models.complexes import EnhancedState, GradedComplex
from khrefine.models.cube import CircleMove, Flavor, FrobeniusFlavor, GaugeTransformation, SignAssignment
from khrefine.models.diagram import PlanarDiagram, ResolvedState
from khrefine.services.cube_service import CubeService
from khrefine.services.diagram_service import DiagramService
from khrefine.utils.bits import popcount, reverse_bits


class ComplexService:
    """
    Assembles Khovanov and Bar-Natan complexes from the cube of resolutions and
    cuts filtration subcomplexes and quotients out of them.
    """

    def __init__(
        self,
        diagram_service: Optional[DiagramService] = None,
        cube_service: Optional[CubeService] = None,
        check_d_squared: bool = False,
    ):
        self.diagram_service = diagram_service or DiagramService()
        self.cube_service = cube_service or CubeService()
        self.check = check_d_squared
        self.log = structlog.get_logger(service="complex")

    def vertices(self, diagram: PlanarDiagram, weight: int) -> list[int]:
        """Cube vertices of the given weight, lexicographic from crossing 0."""
        n = diagram.crossing_count
        if weight < 0 or weight > n:
            return []
        out = []
        for ones in combinations(range(n), weight):
            v = 0
            for i in ones:
                v |= 1 << i
            out.append(v)
        out.sort(key=lambda v: reverse_bits(v, n))
        return out

    @staticmethod
    def quantum_grading(diagram: PlanarDiagram, state: ResolvedState, labeling: int) -> int:
        return (
            state.circle_count - 2 * popcount(labeling)
            + state.weight + diagram.n_plus - 2 * diagram.n_minus
        )

    def build(
        self,
        diagram: PlanarDiagram,
        flavor: Flavor = Flavor.KHOVANOV,
        ring: Optional[Ring] = None,
        signs: Optional[SignAssignment] = None,
        degrees: Optional[Iterable[int]] = None,
    ) -> GradedComplex:
        """
        Build the complex of a diagram.

        Parameters
        ----------
        diagram: PlanarDiagram
            The diagram to build the cube of resolutions for
        flavor: Flavor
            Khovanov or Bar-Natan Frobenius algebra
        ring: Ring, optional
            Coefficients, F2 by default
        signs: SignAssignment, optional
            Edge signs, the standard assignment by default
        degrees: Iterable[int], optional
            Homological gradings to build; differentials are assembled between
            consecutive requested gradings only
        """
        started = time.monotonic()
        ring = ring or F2Ring()
        n = diagram.crossing_count
        signs = signs or self.cube_service.standard_signs(n)
        if signs.crossing_count != n:
            raise DimensionMismatch(
                f"Sign assignment is for {signs.crossing_count} crossings, the diagram has {n}",
                expected=n,
                actual=signs.crossing_count,
            )
        all_degrees = range(-diagram.n_minus, diagram.n_plus + 1)
        wanted = sorted(set(all_degrees) if degrees is None else set(degrees) & set(all_degrees))
        self.log.debug(
            "Building complex",
            diagram=diagram.name,
            crossings=n,
            flavor=flavor.value,
            ring=ring.name,
            degrees=wanted,
        )

        states: dict[int, ResolvedState] = {}

        def state_of(v: int) -> ResolvedState:
            if v not in states:
                states[v] = self.diagram_service.resolve(diagram, v)
            return states[v]

        generators: dict[int, list[EnhancedState]] = {}
        qgradings: dict[int, list[int]] = {}
        for h in wanted:
            gens = []
            qs = []
            for v in self.vertices(diagram, h + diagram.n_minus):
                state = state_of(v)
                k = state.circle_count
                for labeling in sorted(range(1 << k), key=lambda lab: reverse_bits(lab, k)):
                    gens.append(EnhancedState(v, labeling))
                    qs.append(self.quantum_grading(diagram, state, labeling))
            generators[h] = gens
            qgradings[h] = qs

        frobenius = FrobeniusFlavor(flavor, ring)
        moves: dict[tuple[int, int], CircleMove] = {}
        complex_ = GradedComplex(diagram, flavor, ring, generators, qgradings, {})
        for h in wanted:
            if h + 1 not in generators:
                continue
            target_index = complex_.index(h + 1)
            rows = []
            for state in generators[h]:
                u = state.vertex
                row = []
                for i in range(n):
                    if (u >> i) & 1:
                        continue
                    w = u | (1 << i)
                    move = moves.get((u, i))
                    if move is None:
                        move = self.cube_service.circle_move(diagram, state_of(u), state_of(w))
                        moves[u, i] = move
                    sign = signs.sign(u, i)
                    for labeling, coefficient in move.images(state.labeling, frobenius):
                        row.append((target_index[EnhancedState(w, labeling)], sign * coefficient))
                rows.append(ring.vector(row))
            complex_.differentials[h] = make_matrix(ring, len(generators[h]), len(generators[h + 1]), rows)

        if self.check:
            bad = self.d_squared_failures(complex_)
            if bad:
                raise RuntimeError(f"δ² ≠ 0 in homological degrees {bad}")
        self.log.info(
            "Built complex",
            diagram=diagram.name,
            flavor=flavor.value,
            ring=ring.name,
            generators=complex_.total_dimension,
            elapsed=round(time.monotonic() - started, 3),
        )
        return complex_

    def d_squared_failures(self, complex_: GradedComplex) -> list[int]:
        """Degrees h where δ_{h+1} ∘ δ_h does not vanish."""
        bad = []
        for h in complex_.degrees:
            if h + 2 not in complex_.generators:
                continue
            if not (complex_.differential(h) @ complex_.differential(h + 1)).is_zero():
                bad.append(h)
        return bad

    def check_d_squared(self, complex_: GradedComplex) -> bool:
        return not self.d_squared_failures(complex_)

    def filtration_subcomplex(self, complex_: GradedComplex, q: int) -> GradedComplex:
        """F_q: the span of generators with j >= q."""
        return complex_.restrict({
            h: [i for i, j in enumerate(complex_.quantum_gradings(h)) if j >= q]
            for h in complex_.degrees
        })

    def quotient_complex(self, complex_: GradedComplex, q: int) -> GradedComplex:
        """C / F_q, spanned by the generators with j < q."""
        return complex_.restrict({
            h: [i for i, j in enumerate(complex_.quantum_gradings(h)) if j < q]
            for h in complex_.degrees
        })

    def graded_quotient(self, complex_: GradedComplex, q: int) -> GradedComplex:
        """F_q / F_{q+2}; for a knot this is the quantum-grading-q part of the Khovanov complex."""
        return complex_.restrict({
            h: complex_.block_indices(h, q)
            for h in complex_.degrees
        })

    def gauge_map(self, complex_: GradedComplex, gauge: GaugeTransformation) -> dict[int, Matrix]:
        """
        The chain isomorphism x -> t(v)·x from the complex built with signs s to the one
        built with the gauged signs, per homological grading.
        """
        ring = complex_.ring
        return {
            h: make_matrix(
                ring,
                complex_.dimension(h),
                complex_.dimension(h),
                [ring.vector([(i, gauge(state.vertex))]) for i, state in enumerate(complex_.generators[h])],
            )
            for h in complex_.degrees
        }
