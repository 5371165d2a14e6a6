import bisect
import time
from typing import Optional

import structlog
import sympy

from khrefine.algebra.matrices import Echelon, FieldMatrix, Subspace, image, kernel, make_matrix
from khrefine.algebra.rings import IntegerRing, Ring
from khrefine.algebra.simplify import gaussian_eliminate
from khrefine.algebra.smith import AbelianGroup, IntegerEchelon, elementary_divisors, integer_kernel, invariant_factors
from khrefine.errors import NotAKnotError
from khrefine.models.artifacts import HomologyCell, HomologyTable
from khrefine.models.complexes import GradedComplex
from khrefine.models.cube import Flavor, SignAssignment
from khrefine.models.diagram import PlanarDiagram
from khrefine.models.homology import FiltrationLevel, FiltrationMaps, FiltrationRanks, HomologyBlock, LevelMaps
from khrefine.services.complex_service import ComplexService


class HomologyService:
    """
    Homology over fields and the integers, and the filtration maps i_* and p_*
    that the invariants are read off from.

    Complexes and homology blocks are cached per (diagram, flavor, ring), since the
    invariant searches ask for the same Khovanov blocks over and over. A single
    block only needs C^{h-1} -> C^h -> C^{h+1}, so blocks are read off that window
    unless the whole complex has already been built.
    """

    def __init__(
        self,
        complex_service: Optional[ComplexService] = None,
        simplify: bool = True,
    ):
        self.complex_service = complex_service or ComplexService()
        self.simplify = simplify
        self.log = structlog.get_logger(service="homology")
        self._complexes: dict[tuple, GradedComplex] = {}
        self._windows: dict[tuple, GradedComplex] = {}
        self._khovanov_blocks: dict[tuple, dict[tuple[int, int], HomologyBlock]] = {}
        self._filtration_maps: dict[tuple, FiltrationMaps] = {}
        self._filtration_ranks: dict[tuple, FiltrationRanks] = {}

    def complex(
        self,
        diagram: PlanarDiagram,
        flavor: Flavor,
        ring: Ring,
        signs: Optional[SignAssignment] = None,
    ) -> GradedComplex:
        """Build (or fetch) a complex; complexes with explicit signs are never cached."""
        if signs is not None:
            return self.complex_service.build(diagram, flavor, ring, signs)
        key = (diagram, flavor, ring.name)
        if key not in self._complexes:
            self._complexes[key] = self.complex_service.build(diagram, flavor, ring)
        return self._complexes[key]

    # Homology over a field

    def block(self, complex_: GradedComplex, h: int, j: Optional[int] = None) -> HomologyBlock:
        """The homology of C^{h,j}, or of C^h when j is None."""
        if j is None:
            indices = list(range(complex_.dimension(h)))
            outgoing = complex_.differential(h)
            incoming = complex_.differential(h - 1)
        else:
            indices = complex_.block_indices(h, j)
            outgoing = complex_.block(h, j)
            incoming = complex_.block(h - 1, j)
        cycles = kernel(outgoing)
        boundaries = image(incoming)
        return HomologyBlock(complex_.ring, h, j, indices, cycles, boundaries)

    def blocks(self, complex_: GradedComplex) -> dict[tuple[int, Optional[int]], HomologyBlock]:
        """
        Every homology block of a complex: per bigrading for the Khovanov flavor,
        per homological grading for the Bar-Natan flavor.
        """
        out: dict[tuple[int, Optional[int]], HomologyBlock] = {}
        if complex_.flavor == Flavor.KHOVANOV:
            for h, j in complex_.bigradings():
                out[h, j] = self.block(complex_, h, j)
        else:
            for h in complex_.degrees:
                out[h, None] = self.block(complex_, h)
        return out

    def khovanov_block(self, diagram: PlanarDiagram, ring: Ring, h: int, j: int) -> HomologyBlock:
        key = (diagram, ring.name)
        cache = self._khovanov_blocks.setdefault(key, {})
        if (h, j) not in cache:
            cache[h, j] = self.block(self.khovanov_window(diagram, ring, h), h, j)
        return cache[h, j]

    def khovanov_window(self, diagram: PlanarDiagram, ring: Ring, h: int) -> GradedComplex:
        """A Khovanov complex containing C^{h-1}, C^h and C^{h+1}, in canonical order."""
        full = self._complexes.get((diagram, Flavor.KHOVANOV, ring.name))
        if full is not None:
            return full
        key = (diagram, ring.name, h)
        if key not in self._windows:
            self._windows[key] = self.complex_service.build(
                diagram, Flavor.KHOVANOV, ring, degrees=(h - 1, h, h + 1)
            )
        return self._windows[key]

    def field_homology(self, complex_: GradedComplex, simplify: Optional[bool] = None) -> HomologyTable:
        """
        Ranks over a field. With `simplify`, ranks are read off the Gaussian-eliminated
        complex, which gives the same numbers without canonical bases.
        """
        started = time.monotonic()
        simplify = self.simplify if simplify is None else simplify
        source = gaussian_eliminate(complex_) if simplify else complex_
        ranks: dict[tuple[int, Optional[int]], int] = {}
        if complex_.flavor == Flavor.KHOVANOV:
            for h, j in complex_.bigradings():
                ranks[h, j] = self._rank(source, h, j)
        else:
            for h in complex_.degrees:
                ranks[h, None] = self._rank(source, h, None)
        table = self._table(complex_, ranks, {})
        self.log.info(
            "Computed homology",
            diagram=complex_.diagram.name,
            ring=complex_.ring.name,
            flavor=complex_.flavor.value,
            total_rank=table.total_rank,
            simplified=simplify,
            elapsed=round(time.monotonic() - started, 3),
        )
        return table

    def _rank(self, complex_: GradedComplex, h: int, j: Optional[int]) -> int:
        if j is None:
            dimension = complex_.dimension(h)
            outgoing = complex_.differential(h)
            incoming = complex_.differential(h - 1)
        else:
            dimension = len(complex_.block_indices(h, j))
            outgoing = complex_.block(h, j)
            incoming = complex_.block(h - 1, j)
        return dimension - outgoing.rank() - incoming.rank()

    # Homology over the integers

    def integral_homology(self, complex_: GradedComplex) -> HomologyTable:
        """Free ranks and torsion (as prime powers) from invariant factors of the differentials."""
        if complex_.ring.is_field:
            raise ValueError(f"Integral homology needs a complex over z, got {complex_.ring.name}")
        started = time.monotonic()
        source = gaussian_eliminate(complex_) if self.simplify else complex_
        ranks: dict[tuple[int, Optional[int]], int] = {}
        torsion: dict[tuple[int, Optional[int]], list[int]] = {}
        keys = (
            complex_.bigradings()
            if complex_.flavor == Flavor.KHOVANOV
            else [(h, None) for h in complex_.degrees]
        )
        factors_cache: dict[tuple[int, Optional[int]], list[int]] = {}

        def factors(h: int, j: Optional[int]) -> list[int]:
            if (h, j) not in factors_cache:
                matrix = source.differential(h) if j is None else source.block(h, j)
                factors_cache[h, j] = invariant_factors(matrix)
            return factors_cache[h, j]

        for h, j in keys:
            dimension = source.dimension(h) if j is None else len(source.block_indices(h, j))
            ranks[h, j] = dimension - len(factors(h, j)) - len(factors(h - 1, j))
            torsion[h, j] = elementary_divisors(factors(h - 1, j))
        table = self._table(complex_, ranks, torsion)
        self.log.info(
            "Computed integral homology",
            diagram=complex_.diagram.name,
            flavor=complex_.flavor.value,
            elapsed=round(time.monotonic() - started, 3),
        )
        return table

    def _table(
        self,
        complex_: GradedComplex,
        ranks: dict[tuple[int, Optional[int]], int],
        torsion: dict[tuple[int, Optional[int]], list[int]],
    ) -> HomologyTable:
        cells = [
            HomologyCell(i=h, j=j, rank=ranks[h, j], torsion=torsion.get((h, j), []))
            for h, j in sorted(ranks, key=lambda k: (k[0], k[1] if k[1] is not None else 0))
            if ranks[h, j] or torsion.get((h, j))
        ]
        euler: dict[int, int] = {}
        polynomial = None
        if complex_.flavor == Flavor.KHOVANOV:
            for (h, j), rank in ranks.items():
                euler[j] = euler.get(j, 0) + (-1) ** (h % 2) * rank  # type: ignore
            euler = {j: v for j, v in sorted(euler.items()) if v}
            polynomial = self.poincare_polynomial(ranks)
        return HomologyTable(
            diagram=complex_.diagram.name,
            ring=complex_.ring.name,
            flavor=complex_.flavor.value,
            cells=cells,
            euler_characteristic=euler,
            poincare_polynomial=polynomial,
        )

    @staticmethod
    def poincare_polynomial(ranks: dict[tuple[int, Optional[int]], int]) -> str:
        """Σ rank · t^i q^j as a Laurent polynomial."""
        t, q = sympy.symbols("t q")
        expression = sympy.Integer(0)
        for (h, j), rank in ranks.items():
            if rank:
                expression += rank * t ** h * q ** (j or 0)
        return str(sympy.expand(expression))

    # Filtration maps

    def filtration_maps(self, diagram: PlanarDiagram, field: Ring) -> FiltrationMaps:
        """
        i_*: H_0(F_q) -> H_0(C) and p_*: H_0(F_q) -> Kh^{0,q} for every odd q in
        [j_min - 2, j_max + 2].

        C^0 is put in filtration order, sorted by (j, canonical index), so that F_q
        is a suffix of coordinates. H_0(F_q) is then spanned by the canonical cycles
        of C^0 whose pivot lies in F_q, modulo the images of the generators of C^{-1}
        with j >= q.
        """
        self._require_knot(diagram, field)
        key = (diagram, field.name)
        if key in self._filtration_maps:
            return self._filtration_maps[key]
        started = time.monotonic()
        bn = self.complex_service.build(diagram, Flavor.BAR_NATAN, field, degrees=(-1, 0, 1))

        order, positions, _ = bn.filtration_order(0)
        gradings = [bn.quantum_gradings(0)[i] for i in order]
        _, positions_next, _ = bn.filtration_order(1)
        previous_order, positions_previous, _ = bn.filtration_order(-1)
        previous_gradings = [bn.quantum_gradings(-1)[i] for i in previous_order]

        d0 = bn.differential(0).permuted(positions, positions_next)
        d_prev = bn.differential(-1).permuted(positions_previous, positions)
        n0 = bn.dimension(0)

        cycles = kernel(d0)
        all_boundaries = Subspace.span(field, n0, d_prev.rows)
        total = HomologyBlock(field, 0, None, order, cycles, all_boundaries)

        j_min, j_max = bn.j_range
        maps = FiltrationMaps(
            complex=bn,
            order=order,
            gradings=gradings,
            total_homology=total,
            khovanov_blocks={},
        )

        # Descending q: boundaries of F_q only grow
        boundary_echelon = Echelon(field)
        next_boundary = len(previous_gradings)
        for q in range(j_max + 2, j_min - 3, -2):
            start = bisect.bisect_left(gradings, q)
            stop = bisect.bisect_left(gradings, q + 2)
            first_previous = bisect.bisect_left(previous_gradings, q)
            while next_boundary > first_previous:
                next_boundary -= 1
                boundary_echelon.insert(d_prev.rows[next_boundary])

            level_cycles = [z for z in cycles.basis if field.leading(z) >= start]
            reduced = [boundary_echelon.full_reduce(z)[0] for z in level_cycles]
            basis = list(Subspace.span(field, n0, reduced).basis)

            inclusion = FieldMatrix(field, len(basis), total.rank, [
                field.vector(enumerate(total.coordinates(z))) for z in basis
            ])
            kh_block = self.khovanov_block(diagram, field, 0, q)
            maps.khovanov_blocks[q] = kh_block
            projection = FieldMatrix(field, len(basis), kh_block.rank, [
                field.vector(enumerate(kh_block.coordinates(field.window(z, start, stop)))) for z in basis
            ])
            maps.levels[q] = LevelMaps(
                level=FiltrationLevel(q=q, start=start),
                cycles=basis,
                inclusion=inclusion,
                projection=projection,
            )
        self.log.info(
            "Computed filtration maps",
            diagram=diagram.name,
            field=field.name,
            levels=len(maps.levels),
            homology=total.rank,
            elapsed=round(time.monotonic() - started, 3),
        )
        self._filtration_maps[key] = maps
        return maps

    def filtration_ranks(self, diagram: PlanarDiagram, field: Ring) -> FiltrationRanks:
        """
        rank i_*: H_0(F_q) -> H_0(C) for every odd q in [j_min - 2, j_max + 2].

        With `simplify`, the truncated Bar-Natan complex is Gaussian-eliminated first.
        Only pairs of equal j are cancelled, so the result is filtered homotopy
        equivalent to the input and every rank of i_* is unchanged; no canonical
        bases are kept, which is all s needs.
        """
        self._require_knot(diagram, field)
        if not self.simplify:
            return self.filtration_maps(diagram, field).ranks()
        key = (diagram, field.name)
        if key in self._filtration_ranks:
            return self._filtration_ranks[key]
        started = time.monotonic()
        bn = self.complex_service.build(diagram, Flavor.BAR_NATAN, field, degrees=(-1, 0, 1))
        j_min, j_max = bn.j_range
        reduced = gaussian_eliminate(bn)

        order, positions, _ = reduced.filtration_order(0)
        gradings = [reduced.quantum_gradings(0)[i] for i in order]
        _, positions_next, _ = reduced.filtration_order(1)
        _, positions_previous, _ = reduced.filtration_order(-1)
        d0 = reduced.differential(0).permuted(positions, positions_next)
        d_prev = reduced.differential(-1).permuted(positions_previous, positions)

        echelon = Echelon(field)
        for row in d_prev.rows:
            echelon.insert(row)
        boundary_rank = echelon.rank
        # Highest pivot first: cycles enter as F_q grows
        cycles = sorted(kernel(d0).basis, key=field.leading, reverse=True)
        ranks: dict[int, int] = {}
        for q in range(j_max + 2, j_min - 3, -2):
            start = bisect.bisect_left(gradings, q)
            while cycles and field.leading(cycles[0]) >= start:
                echelon.insert(cycles.pop(0))
            ranks[q] = echelon.rank - boundary_rank
        result = FiltrationRanks(ranks=ranks, total=echelon.rank - boundary_rank)
        self.log.info(
            "Computed filtration ranks",
            diagram=diagram.name,
            field=field.name,
            generators=bn.dimension(0),
            remaining=reduced.dimension(0),
            homology=result.total,
            elapsed=round(time.monotonic() - started, 3),
        )
        self._filtration_ranks[key] = result
        return result

    @staticmethod
    def _require_knot(diagram: PlanarDiagram, field: Ring) -> None:
        if not field.is_field:
            raise ValueError(f"Filtration maps need a field, got {field.name}")
        if not diagram.is_knot:
            raise NotAKnotError(
                f"{diagram.name or 'Diagram'} has {diagram.component_count} components, expected a knot",
                components=diagram.component_count,
            )

    def integral_filtration_cokernels(self, diagram: PlanarDiagram):
        """
        H_0(C; Z) / i_* H_0(F_q; Z) for every odd q in [j_min - 2, j_max + 2], highest q first.

        The cycle lattice Z_0 is saturated in C^0, so the cokernel has free rank
        rank Z_0 - rank L_q and the torsion of Z^n / L_q, where L_q is spanned by all
        boundaries and the cycles supported in F_q.
        """
        if not diagram.is_knot:
            raise NotAKnotError(
                f"{diagram.name or 'Diagram'} has {diagram.component_count} components, expected a knot",
                components=diagram.component_count,
            )
        ring = IntegerRing()
        bn = self.complex_service.build(diagram, Flavor.BAR_NATAN, ring, degrees=(-1, 0, 1))
        order, positions, _ = bn.filtration_order(0)
        gradings = [bn.quantum_gradings(0)[i] for i in order]
        _, positions_next, _ = bn.filtration_order(1)
        d0 = bn.differential(0).permuted(positions, positions_next)
        boundaries = [
            ring.permute(row, positions) for row in bn.differential(-1).rows if not ring.is_zero(row)
        ]

        cycle_echelon = IntegerEchelon()
        for z in integer_kernel(d0):
            cycle_echelon.insert(z)
        cycle_rank = cycle_echelon.rank
        n0 = bn.dimension(0)

        j_min, j_max = bn.j_range
        out = []
        for q in range(j_max + 2, j_min - 3, -2):
            start = bisect.bisect_left(gradings, q)
            generators = boundaries + cycle_echelon.rows_from(start)
            factors = invariant_factors(make_matrix(ring, len(generators), n0, generators))
            group = AbelianGroup(
                free_rank=cycle_rank - len(factors),
                torsion=tuple(d for d in factors if d > 1),
            )
            out.append((q, group))
        return out
