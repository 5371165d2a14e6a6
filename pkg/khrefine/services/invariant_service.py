import time
from typing import Optional

import structlog

from khrefine.algebra.matrices import Echelon, FieldMatrix, Subspace, preimage, restrict_to, solve
from khrefine.algebra.rings import Ring, Vec
from khrefine.algebra.smith import AbelianGroup
from khrefine.errors import EmptyScanRange, NotAKnotError, ParityError, UnsupportedModulus
from khrefine.models.artifacts import (
    InvariantBounds,
    OperationMatrix,
    RefinedInvariants,
    SIntegralResult,
    SResult,
    Witness,
    WitnessElement,
)
from khrefine.models.diagram import PlanarDiagram
from khrefine.models.homology import FiltrationMaps, LevelMaps
from khrefine.models.jobs import OperationSource
from khrefine.services.diagram_service import DiagramService
from khrefine.services.homology_service import HomologyService
from khrefine.services.operation_service import OperationService


class InvariantService:
    """
    The s-invariants and their refinements by a cohomology operation α.

    Fullness at a level q is a subspace question. With V the preimage under
    p_*: H_0(F_q) -> Kh^{0,q} of the image of α: Kh^{-n,q} -> Kh^{0,q}, q is
    α-half-full when i_*(V) is nonzero and α-full when i_*(V) is all of H_0(C).
    """

    def __init__(
        self,
        homology_service: Optional[HomologyService] = None,
        operation_service: Optional[OperationService] = None,
        diagram_service: Optional[DiagramService] = None,
    ):
        self.homology_service = homology_service or HomologyService()
        self.operation_service = operation_service or OperationService(self.homology_service)
        self.diagram_service = diagram_service or DiagramService()
        self.log = structlog.get_logger(service="invariant")

    # s over a field and over the integers

    def s_field(self, diagram: PlanarDiagram, field: Ring) -> SResult:
        ranks = self.homology_service.filtration_ranks(diagram, field)
        result = SResult(
            diagram=diagram.name,
            field=field.name,
            s_min=ranks.s_min,
            s_max=ranks.s_max,
            s=ranks.s,
            inclusion_ranks={q: ranks.ranks[q] for q in sorted(ranks.ranks, reverse=True)},
        )
        self.log.info("Computed s", diagram=diagram.name, field=field.name, s=result.s)
        return result

    def s_integral(self, diagram: PlanarDiagram, m: int) -> SIntegralResult:
        """
        s^{Z,m}_min is the largest q where Z/m surjects onto H_0(C;Z)/i_* H_0(F_q;Z),
        s^{Z,m}_max the largest where Z ⊕ Z/m does.
        """
        if m <= 0:
            raise UnsupportedModulus(f"The modulus must be a positive integer, got {m}", m=m)
        if not diagram.is_knot:
            raise NotAKnotError(
                f"{diagram.name or 'Diagram'} has {diagram.component_count} components, expected a knot",
                components=diagram.component_count,
            )
        cokernels = self.homology_service.integral_filtration_cokernels(diagram)
        cyclic = AbelianGroup.cyclic(m)
        with_free = AbelianGroup.cyclic(0) + cyclic
        s_min = next((q for q, group in cokernels if cyclic.surjects_onto(group)), None)
        s_max = next((q for q, group in cokernels if with_free.surjects_onto(group)), None)
        if s_min is None or s_max is None:
            raise EmptyScanRange("No filtration level satisfies the surjectivity condition", m=m)
        self.log.info("Computed integral s", diagram=diagram.name, m=m, s_min=s_min, s_max=s_max)
        return SIntegralResult(
            diagram=diagram.name,
            m=m,
            s_min=s_min,
            s_max=s_max,
            s_min_plus_one=s_min + 1,
            s_max_minus_one=s_max - 1,
        )

    # Fullness

    def alpha_block(self, maps: FiltrationMaps, operation: OperationMatrix, q: int) -> FieldMatrix:
        """α: Kh^{-n,q} -> Kh^{0,q}."""
        return self.operation_service.block_matrix(
            operation, maps.complex.diagram, maps.ring, -operation.degree, q
        )

    def alpha_image(self, maps: FiltrationMaps, operation: OperationMatrix, q: int) -> Subspace:
        level = maps.level(q)
        block = self.alpha_block(maps, operation, level.q)
        return Subspace.span(maps.ring, level.projection.ncols, block.rows)

    def full_subspace(self, maps: FiltrationMaps, operation: OperationMatrix, q: int) -> Subspace:
        """V: the classes of H_0(F_q) whose image in Kh^{0,q} is hit by α."""
        level = maps.level(q)
        return preimage(level.projection, self.alpha_image(maps, operation, q))

    def is_half_full(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
        q: int,
    ) -> tuple[bool, Optional[Witness]]:
        chosen = self._independent_images(maps, operation, q, wanted=1)
        if len(chosen) < 1:
            return False, None
        return True, self._witness(maps, operation, q, "half_full", chosen)

    def is_full(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
        q: int,
    ) -> tuple[bool, Optional[Witness]]:
        wanted = maps.total_homology.rank
        chosen = self._independent_images(maps, operation, q, wanted=wanted)
        if len(chosen) < wanted:
            return False, None
        return True, self._witness(maps, operation, q, "full", chosen)

    def _independent_images(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
        q: int,
        wanted: int,
    ) -> list[Vec]:
        """Elements of V, as many as `wanted`, whose images under i_* are independent."""
        if q % 2 == 0:
            raise ParityError(f"Filtration level q = {q} must be odd", q=q)
        level = maps.level(q)
        space = self.full_subspace(maps, operation, q)
        images = restrict_to(space, level.inclusion)
        echelon = Echelon(maps.ring)
        chosen = []
        for v, image in zip(space.basis, images.rows):
            if len(chosen) == wanted:
                break
            pivot, _ = echelon.insert(image)
            if pivot is not None:
                chosen.append(v)
        return chosen

    def _witness(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
        q: int,
        kind: str,
        chosen: list[Vec],
    ) -> Witness:
        level = maps.level(q)
        return Witness(
            q=q,
            kind=kind,
            elements=[self._witness_element(maps, operation, level, v) for v in chosen],
        )

    def _witness_element(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
        level: LevelMaps,
        v: Vec,
    ) -> WitnessElement:
        ring = maps.ring
        cocycle = ring.zero()
        for index, c in ring.items(v):
            cocycle = ring.axpy(cocycle, c, level.cycles[index])
        a_bar = [ring.to_json(c) for c in ring.dense(level.inclusion.apply(v), maps.total_homology.rank)]
        a_tilde = None
        projected = level.projection.apply(v)
        if not ring.is_zero(projected):
            preimage_coordinates = solve(self.alpha_block(maps, operation, level.q), projected)
            if preimage_coordinates is None:
                raise RuntimeError(f"p_*(a) at q = {level.q} is not in the image of α")
            source = self.homology_service.khovanov_block(
                maps.complex.diagram, ring, -operation.degree, level.q
            )
            representative = source.representative(ring.dense(preimage_coordinates, source.rank))
            khovanov = self.homology_service.khovanov_window(maps.complex.diagram, ring, -operation.degree)
            a_tilde = source.state_entries(khovanov, representative)
        return WitnessElement(a=maps.state_entries(cocycle), a_bar=a_bar, a_tilde=a_tilde)

    def fullness_profile(self, maps: FiltrationMaps, operation: OperationMatrix) -> dict[int, tuple[bool, bool]]:
        """(half-full, full) at every scanned level."""
        out = {}
        for q in maps.q_values:
            space = self.full_subspace(maps, operation, q)
            rank = restrict_to(space, maps.level(q).inclusion).rank()
            out[q] = (rank >= 1, rank == maps.total_homology.rank)
        return out

    # Refined invariants

    def _extremes(
        self,
        maps: FiltrationMaps,
        operation: OperationMatrix,
    ) -> tuple[int, Witness, int, Witness]:
        """(r_+, its witness, s_+, its witness), scanning q downwards."""
        half: Optional[tuple[int, Witness]] = None
        full: Optional[tuple[int, Witness]] = None
        for q in maps.q_values:
            if half is None:
                found, witness = self.is_half_full(maps, operation, q)
                if found:
                    half = (q, witness)  # type: ignore
            found, witness = self.is_full(maps, operation, q)
            if found:
                full = (q, witness)  # type: ignore
                # Full implies half-full, and fullness only persists downwards
                break
        if half is None or full is None:
            raise EmptyScanRange(
                f"No α-full level among {len(maps.levels)} filtration levels",
                levels=len(maps.levels),
            )
        return half[0] + 1, half[1], full[0] + 3, full[1]

    def bounds(self, maps: FiltrationMaps, operation: OperationMatrix) -> InvariantBounds:
        """
        r_+ and s_+ both lie in {s, s + 2}. A zero block of α into Kh^{0,s_min}
        forces s_+ = s; a zero block into Kh^{0,s_max} forces r_+ = s.
        """
        s = maps.s
        s_plus_forced = s if self.alpha_block(maps, operation, maps.s_min).is_zero() else None
        r_plus_forced = s if self.alpha_block(maps, operation, maps.s_max).is_zero() else None
        return InvariantBounds(
            r_plus=[s, s + 2],
            s_plus=[s, s + 2],
            r_plus_forced=r_plus_forced,
            s_plus_forced=s_plus_forced,
        )

    def refined_invariants(
        self,
        diagram: PlanarDiagram,
        field: Ring,
        source: OperationSource,
    ) -> RefinedInvariants:
        """
        r_± and s_± for the operation named by `source`. The minus versions are
        minus the plus versions of the mirror, with the operation taken on the
        mirror (recomputed for Sq¹, read from `source.mirror_path` otherwise).
        """
        started = time.monotonic()
        maps = self.homology_service.filtration_maps(diagram, field)
        operation = self.operation_service.resolve(source, diagram, field)
        r_plus, r_plus_witness, s_plus, s_plus_witness = self._extremes(maps, operation)

        mirror = self.diagram_service.mirror(diagram)
        mirror_maps = self.homology_service.filtration_maps(mirror, field)
        mirror_operation = self.operation_service.resolve(source, mirror, field, mirror=True)
        mirror_r, mirror_r_witness, mirror_s, mirror_s_witness = self._extremes(mirror_maps, mirror_operation)

        witnesses: dict[str, Witness] = {
            "r_plus": r_plus_witness,
            "s_plus": s_plus_witness,
            "r_minus": mirror_r_witness,
            "s_minus": mirror_s_witness,
        }
        result = RefinedInvariants(
            diagram=diagram.name,
            field=field.name,
            operation=operation.name or source.label,
            s_min=maps.s_min,
            s_max=maps.s_max,
            s=maps.s,
            r_plus=r_plus,
            s_plus=s_plus,
            r_minus=-mirror_r,
            s_minus=-mirror_s,
            witnesses=witnesses,
            bounds=self.bounds(maps, operation),
        )
        self.log.info(
            "Computed refined invariants",
            diagram=diagram.name,
            field=field.name,
            operation=result.operation,
            s=result.s,
            r_plus=result.r_plus,
            s_plus=result.s_plus,
            r_minus=result.r_minus,
            s_minus=result.s_minus,
            elapsed=round(time.monotonic() - started, 3),
        )
        return result

