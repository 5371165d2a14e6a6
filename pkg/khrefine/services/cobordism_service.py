import time
from typing import Any, Callable, Optional

import structlog

from khrefine.algebra.matrices import FieldMatrix, Matrix, Subspace, image, kernel, make_matrix
from khrefine.algebra.rings import Ring
from khrefine.errors import InvalidMoveError
from khrefine.models.artifacts import CobordismResult, MovieStep
from khrefine.models.complexes import EnhancedState, GradedComplex
from khrefine.models.cube import X_MINUS, X_PLUS, CircleMove, Flavor, FrobeniusFlavor
from khrefine.models.diagram import PlanarDiagram, ResolvedState
from khrefine.models.moves import CapMove, CupMove, Movie, MovieMap, MoveUnion, SaddleMove
from khrefine.services.diagram_service import DiagramService, Reconnection
from khrefine.services.homology_service import HomologyService

# (source circles, target circles, source labeling) -> [(target labeling, coefficient)]
LabelingMap = Callable[[ResolvedState, ResolvedState, int], list[tuple[int, int]]]


class CobordismService:
    """
    Chain maps of cups, caps and saddles, and of movies composed from them.

    A move never touches the crossings, so the source and target diagrams share
    their cube: every map below sends the generators at a vertex v to generators
    at the same vertex v, in the same homological grading.
    """

    def __init__(
        self,
        homology_service: Optional[HomologyService] = None,
        diagram_service: Optional[DiagramService] = None,
    ):
        self.homology_service = homology_service or HomologyService()
        self.diagram_service = diagram_service or DiagramService()
        self.log = structlog.get_logger(service="cobordism")

    def _complex(self, diagram: PlanarDiagram, flavor: Flavor, ring: Ring) -> GradedComplex:
        return self.homology_service.complex(diagram, flavor, ring)

    def _assemble(
        self,
        reconnection: Reconnection,
        flavor: Flavor,
        ring: Ring,
        chi: int,
        labeling_map: LabelingMap,
        move: MoveUnion,
    ) -> MovieMap:
        source = self._complex(reconnection.source, flavor, ring)
        target = self._complex(reconnection.target, flavor, ring)
        states: dict[tuple[int, int], ResolvedState] = {}

        def state_of(side: int, v: int) -> ResolvedState:
            if (side, v) not in states:
                diagram = reconnection.source if side == 0 else reconnection.target
                states[side, v] = self.diagram_service.resolve(diagram, v)
            return states[side, v]

        matrices: dict[int, Matrix] = {}
        for h in source.degrees:
            index = target.index(h)
            rows = []
            for generator in source.generators[h]:
                v = generator.vertex
                images = labeling_map(state_of(0, v), state_of(1, v), generator.labeling)
                rows.append(ring.vector(
                    (index[EnhancedState(v, labeling)], coefficient) for labeling, coefficient in images
                ))
            matrices[h] = make_matrix(ring, source.dimension(h), target.dimension(h), rows)
        return MovieMap(source=source, target=target, chi=chi, matrices=matrices, moves=[move], label=move.move)

    @staticmethod
    def _carry(reconnection: Reconnection, before: ResolvedState, after: ResolvedState, labeling: int, skip=()) -> int:
        """Move the labels of the untouched circles to their positions after the move."""
        out = 0
        for index, circle in enumerate(before.circles):
            if index in skip or not (labeling >> index) & 1:
                continue
            out |= 1 << after.circle_of[reconnection.edge_map[circle[0]]]
        return out

    def cup_map(self, diagram: PlanarDiagram, flavor: Flavor, ring: Ring) -> MovieMap:
        """C(L) -> C(L ⊔ U): the new circle is labelled x_+."""
        reconnection = self.diagram_service.cup(diagram)
        (loop,) = reconnection.attach

        def labeling_map(before, after, labeling):
            carried = self._carry(reconnection, before, after, labeling)
            return [(carried | (X_PLUS << after.circle_of[loop]), 1)]

        return self._assemble(reconnection, flavor, ring, 1, labeling_map, CupMove())

    def cap_map(self, diagram: PlanarDiagram, loop: int, flavor: Flavor, ring: Ring) -> MovieMap:
        """C(L ⊔ U) -> C(L) through the counit: x_- on the capped circle goes to 1, x_+ to 0."""
        reconnection = self.diagram_service.cap(diagram, loop)

        def labeling_map(before, after, labeling):
            capped = before.circle_of[loop]
            if (labeling >> capped) & 1 != X_MINUS:
                return []
            return [(self._carry(reconnection, before, after, labeling, skip=(capped,)), 1)]

        return self._assemble(reconnection, flavor, ring, 1, labeling_map, CapMove(loop=loop))

    def saddle_map(self, diagram: PlanarDiagram, e1: int, e2: int, flavor: Flavor, ring: Ring) -> MovieMap:
        """
        The bare merge or split of the flavor at the two arcs the band joins. This
        is the edge map of the cube with the band as an extra, last crossing, up to
        the sign (-1)^{|v|}.
        """
        reconnection = self.diagram_service.saddle(diagram, e1, e2)
        frobenius = FrobeniusFlavor(flavor, ring)
        first, second = reconnection.site
        moves: dict[int, CircleMove] = {}

        def circle_move(before: ResolvedState, after: ResolvedState) -> CircleMove:
            if before.vertex in moves:
                return moves[before.vertex]
            a, b = before.circle_of[first], before.circle_of[second]
            if a != b:
                kind, sources, targets = "merge", (a, b), (after.circle_of[reconnection.attach[0]],)
            else:
                kind, sources = "split", (a,)
                targets = tuple(after.circle_of[label] for label in reconnection.attach)
            positions = tuple(
                -1 if index in sources else after.circle_of[reconnection.edge_map[circle[0]]]
                for index, circle in enumerate(before.circles)
            )
            move = CircleMove(kind=kind, sources=sources, targets=targets, positions=positions)
            moves[before.vertex] = move
            return move

        def labeling_map(before, after, labeling):
            return circle_move(before, after).images(labeling, frobenius)

        return self._assemble(reconnection, flavor, ring, -1, labeling_map, SaddleMove(edges=(first, second)))

    def identity(self, diagram: PlanarDiagram, flavor: Flavor, ring: Ring) -> MovieMap:
        complex_ = self._complex(diagram, flavor, ring)
        return MovieMap(
            source=complex_,
            target=complex_,
            chi=0,
            matrices={h: make_matrix(ring, complex_.dimension(h), complex_.dimension(h), [
                ring.vector([(i, 1)]) for i in range(complex_.dimension(h))
            ]) for h in complex_.degrees},
            label="identity",
        )

    def compose(self, first: MovieMap, second: MovieMap) -> MovieMap:
        """`second ∘ first`."""
        if first.target.diagram != second.source.diagram:
            raise InvalidMoveError(
                "Consecutive moves do not meet in the same diagram",
                first=first.target.diagram.to_pd_text(),
                second=second.source.diagram.to_pd_text(),
            )
        matrices = {h: first.matrix(h) @ second.matrix(h) for h in first.source.degrees}
        return MovieMap(
            source=first.source,
            target=second.target,
            chi=first.chi + second.chi,
            matrices=matrices,
            moves=first.moves + second.moves,
            label=" ".join(m.move for m in first.moves + second.moves) or None,
        )

    def move_map(self, diagram: PlanarDiagram, move: MoveUnion, flavor: Flavor, ring: Ring) -> MovieMap:
        if isinstance(move, CupMove):
            return self.cup_map(diagram, flavor, ring)
        if isinstance(move, CapMove):
            return self.cap_map(diagram, move.loop, flavor, ring)
        if isinstance(move, SaddleMove):
            return self.saddle_map(diagram, move.edges[0], move.edges[1], flavor, ring)
        raise InvalidMoveError(f"Unknown move {move.move}", move=move.move)

    def compose_movie(self, diagram: PlanarDiagram, movie: Movie, flavor: Flavor, ring: Ring) -> MovieMap:
        """The map of a movie starting at `diagram`; the empty movie is the identity."""
        return self._play(diagram, movie, flavor, ring)[0]

    def _play(
        self,
        diagram: PlanarDiagram,
        movie: Movie,
        flavor: Flavor,
        ring: Ring,
    ) -> tuple[MovieMap, list[MovieStep]]:
        steps = []
        current = diagram
        result = self.identity(diagram, flavor, ring)
        for move in movie.moves:
            step = self.move_map(current, move, flavor, ring)
            steps.append(MovieStep(
                move=move.move,
                chi=move.chi,
                source=current.to_pd_text(),
                target=step.target.diagram.to_pd_text(),
            ))
            result = self.compose(result, step)
            current = step.target.diagram
        return result, steps

    # Checks

    def is_chain_map(self, movie_map: MovieMap) -> bool:
        """δ ∘ F = F ∘ δ in every homological grading."""
        source, target = movie_map.source, movie_map.target
        for h in source.degrees:
            if h + 1 not in source.generators:
                continue
            before = source.differential(h) @ movie_map.matrix(h + 1)
            after = movie_map.matrix(h) @ target.differential(h)
            if before != after:
                return False
        return True

    def filtration_violations(self, movie_map: MovieMap) -> list[tuple[int, int, int]]:
        """(h, source index, target index) of every entry that lowers j by more than -χ."""
        bad = []
        for h, matrix in movie_map.matrices.items():
            qs_source = movie_map.source.quantum_gradings(h)
            qs_target = movie_map.target.quantum_gradings(h)
            for r, c, _ in matrix.entries():
                if qs_target[c] < qs_source[r] + movie_map.chi:
                    bad.append((h, r, c))
        return bad

    def is_filtered(self, movie_map: MovieMap) -> bool:
        return not self.filtration_violations(movie_map)

    def induced_rank(self, movie_map: MovieMap, h: int) -> int:
        """Rank of the map induced on H^h; needs coefficients in a field."""
        ring = movie_map.source.ring
        if not ring.is_field:
            raise ValueError(f"Induced maps are computed over a field, got {ring.name}")
        source, target = movie_map.source, movie_map.target
        cycles = kernel(source.differential(h))
        boundaries = image(target.differential(h - 1))
        images = [movie_map.matrix(h).apply(z) for z in cycles.basis]
        return (Subspace.span(ring, target.dimension(h), images) + boundaries).dimension - boundaries.dimension

    def induced_ranks(self, movie_map: MovieMap) -> dict[int, int]:
        return {h: self.induced_rank(movie_map, h) for h in movie_map.source.degrees}

    def induced_block(self, movie_map: MovieMap, h: int, j: int) -> FieldMatrix:
        """
        The map Kh^{h,j}(source) -> Kh^{h,j+χ}(target) in canonical bases. Khovanov
        flavor only, where movie maps are homogeneous of degree χ.
        """
        if movie_map.source.flavor != Flavor.KHOVANOV:
            raise ValueError("Induced blocks are defined for the Khovanov flavor")
        ring = movie_map.source.ring
        source_block = self.homology_service.khovanov_block(movie_map.source.diagram, ring, h, j)
        target_block = self.homology_service.khovanov_block(movie_map.target.diagram, ring, h, j + movie_map.chi)
        positions = [-1] * movie_map.target.dimension(h)
        for local, index in enumerate(target_block.indices):
            positions[index] = local
        rows = []
        for b in source_block.basis:
            cochain = ring.vector(source_block.global_entries(b))
            mapped = ring.permute(movie_map.matrix(h).apply(cochain), positions)
            rows.append(ring.vector(enumerate(target_block.coordinates(mapped))))
        return FieldMatrix(ring, source_block.rank, target_block.rank, rows)

    def evaluation(self, movie_map: MovieMap) -> Optional[Any]:
        """The number a closed surface evaluates to, when source and target are empty."""
        source, target = movie_map.source.diagram, movie_map.target.diagram
        if source.crossing_count or source.loops or target.crossing_count or target.loops:
            return None
        ring = movie_map.source.ring
        return ring.to_json(ring.entry(movie_map.matrix(0).rows[0], 0))

    def evaluate_movie(self, diagram: PlanarDiagram, movie: Movie, flavor: Flavor, ring: Ring) -> CobordismResult:
        started = time.monotonic()
        result, steps = self._play(diagram, movie, flavor, ring)
        chain_map = self.is_chain_map(result)
        filtered = self.is_filtered(result)
        if not (chain_map and filtered):
            self.log.warning("Movie map failed a check", chain_map=chain_map, filtered=filtered)
        out = CobordismResult(
            source=diagram.to_pd_text(),
            target=result.target.diagram.to_pd_text(),
            field=ring.name,
            flavor=flavor.value,
            chi=result.chi,
            steps=steps,
            chain_map=chain_map,
            filtered=filtered,
            induced_ranks=self.induced_ranks(result) if ring.is_field else {},
            evaluation=self.evaluation(result),
        )
        self.log.info(
            "Evaluated movie",
            source=diagram.name,
            moves=len(movie.moves),
            chi=result.chi,
            elapsed=round(time.monotonic() - started, 3),
        )
        return out
