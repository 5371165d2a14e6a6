import random
from collections import deque
from typing import Optional

import structlog

from khrefine.algebra.matrices import FieldMatrix, Matrix, make_matrix
from khrefine.errors import DimensionMismatch, InvalidSignAssignment
from khrefine.models.cube import (
    CircleMove,
    FrobeniusFlavor,
    GaugedSignAssignment,
    GaugeTransformation,
    SignAssignment,
    StandardSignAssignment,
)
from khrefine.models.diagram import PlanarDiagram, ResolvedState


class CubeService:
    """
    Sign assignments and gauge transformations on the resolution cube, and the
    Frobenius maps along its edges.
    """

    def __init__(self):
        self.log = structlog.get_logger(service="cube")

    def standard_signs(self, crossing_count: int) -> StandardSignAssignment:
        return StandardSignAssignment(crossing_count)

    def face_violations(self, signs: SignAssignment) -> list[tuple[int, int, int]]:
        """Faces (u, i, k) whose four edge signs multiply to +1."""
        n = signs.crossing_count
        bad = []
        for u in range(1 << n):
            for i in range(n):
                if (u >> i) & 1:
                    continue
                for k in range(i + 1, n):
                    if (u >> k) & 1:
                        continue
                    product = (
                        signs.sign(u, i)
                        * signs.sign(u | (1 << i), k)
                        * signs.sign(u, k)
                        * signs.sign(u | (1 << k), i)
                    )
                    if product != -1:
                        bad.append((u, i, k))
        return bad

    def check_signs(self, signs: SignAssignment):
        bad = self.face_violations(signs)
        if bad:
            u, i, k = bad[0]
            raise InvalidSignAssignment(
                f"Face at vertex {u} spanned by crossings {i} and {k} commutes",
                vertex=u,
                crossings=(i, k),
                violations=len(bad),
            )

    def gauge_transform(self, first: SignAssignment, second: SignAssignment) -> GaugeTransformation:
        """
        The gauge transformation t with t(0) = +1 carrying `first` to `second`.

        The only other one is its negation.
        """
        if first.crossing_count != second.crossing_count:
            raise InvalidSignAssignment(
                "Sign assignments live on cubes of different dimension",
                first=first.crossing_count,
                second=second.crossing_count,
            )
        self.check_signs(first)
        self.check_signs(second)

        n = first.crossing_count
        values: list[Optional[int]] = [None] * (1 << n)
        values[0] = 1
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for i in range(n):
                if (u >> i) & 1:
                    continue
                w = u | (1 << i)
                if values[w] is None:
                    values[w] = values[u] * first.sign(u, i) * second.sign(u, i)  # type: ignore
                    queue.append(w)

        gauge = GaugeTransformation(n, tuple(v for v in values))  # type: ignore
        for u, i in first.edges():
            w = u | (1 << i)
            if gauge(u) * gauge(w) * first.sign(u, i) != second.sign(u, i):
                raise InvalidSignAssignment(
                    f"No gauge transformation matches the edge from vertex {u} along crossing {i}",
                    vertex=u,
                    crossing=i,
                )
        return gauge

    def random_signs(self, crossing_count: int, seed: int) -> GaugedSignAssignment:
        """A valid sign assignment: the standard one conjugated by a random gauge."""
        rng = random.Random(seed)
        gauge = GaugeTransformation(
            crossing_count,
            tuple(rng.choice((1, -1)) for _ in range(1 << crossing_count)),
        )
        return GaugedSignAssignment(self.standard_signs(crossing_count), gauge)

    def circle_move(self, diagram: PlanarDiagram, before: ResolvedState, after: ResolvedState) -> CircleMove:
        """Classify the cube edge between two resolutions differing at one crossing."""
        flipped = before.vertex ^ after.vertex
        if flipped == 0 or flipped & (flipped - 1) or after.vertex < before.vertex:
            raise DimensionMismatch(
                f"Vertices {before.vertex} and {after.vertex} are not joined by a cube edge",
                before=before.vertex,
                after=after.vertex,
            )
        crossing = flipped.bit_length() - 1
        a, b, c, d = diagram.crossings[crossing]
        if before.circle_of[a] != before.circle_of[c]:
            sources = (before.circle_of[a], before.circle_of[c])
            targets = (after.circle_of[a],)
            kind = "merge"
        else:
            sources = (before.circle_of[a],)
            targets = (after.circle_of[a], after.circle_of[b])
            kind = "split"
        positions = tuple(
            -1 if index in sources else after.circle_of[circle[0]]
            for index, circle in enumerate(before.circles)
        )
        return CircleMove(kind=kind, sources=sources, targets=targets, positions=positions)

    def edge_frobenius_block(
        self,
        frobenius: FrobeniusFlavor,
        diagram: PlanarDiagram,
        before: ResolvedState,
        after: ResolvedState,
        signs: Optional[SignAssignment] = None,
    ) -> Matrix:
        """
        The edge map on labelings, one row per labeling of `before`.

        Labelings are bit masks over circles in canonical order, bit 1 meaning x_-.
        """
        move = self.circle_move(diagram, before, after)
        crossing = (before.vertex ^ after.vertex).bit_length() - 1
        sign = 1 if signs is None else signs.sign(before.vertex, crossing)
        ring = frobenius.ring
        rows = [
            ring.vector((target, sign * coefficient) for target, coefficient in move.images(labeling, frobenius))
            for labeling in range(1 << before.circle_count)
        ]
        return make_matrix(ring, 1 << before.circle_count, 1 << after.circle_count, rows)

    def diagonalized_merge_split(self, frobenius: FrobeniusFlavor) -> tuple[FieldMatrix, FieldMatrix]:
        """
        Merge (4x2) and split (2x4) on one or two circles in the basis x_∇ = x_+ - x_-, x_-.

        Tensor basis order is (first circle, second circle) with the labeling
        bit of the first circle lowest, matching canonical labelings.
        """
        ring = frobenius.ring
        # Change of basis: rows express x_∇, x_- in x_+, x_-
        to_std = FieldMatrix.from_dense(ring, [[1, -1], [0, 1]])
        to_new = FieldMatrix.from_dense(ring, [[1, 1], [0, 1]])

        def tensor(m: FieldMatrix) -> FieldMatrix:
            dense = m.to_dense()
            entries = []
            for i1 in range(2):
                for i2 in range(2):
                    for j1 in range(2):
                        for j2 in range(2):
                            entries.append((i1 | (i2 << 1), j1 | (j2 << 1), dense[i1][j1] * dense[i2][j2]))
            return FieldMatrix.from_entries(ring, 4, 4, entries)

        merge_rows = []
        for labeling in range(4):
            merge_rows.append(ring.vector(frobenius.merge(labeling & 1, labeling >> 1)))
        merge = FieldMatrix(ring, 4, 2, merge_rows)
        split_rows = []
        for label in range(2):
            split_rows.append(ring.vector((x | (y << 1), c) for x, y, c in frobenius.split(label)))
        split = FieldMatrix(ring, 2, 4, split_rows)

        return tensor(to_std) @ merge @ to_new, to_std @ split @ tensor(to_new)
