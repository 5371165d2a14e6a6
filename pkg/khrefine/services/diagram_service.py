from collections import deque
from typing import Optional, Sequence, Union

import pydantic
import structlog

from khrefine.errors import (
    DimensionMismatch,
    EdgeLabelError,
    InvalidMoveError,
    OrientationError,
    PlanarityError,
)
from khrefine.models.diagram import Crossing, PlanarDiagram, ResolvedState
from khrefine.utils.bits import from_bit_tuple
from khrefine.utils.pd_parser import parse_pd_text

Slot = tuple[int, int]


class Reconnection(pydantic.BaseModel):
    """
    The result of a cup, cap or saddle on a diagram.

    `edge_map` sends surviving edge labels of the source to labels of the target.
    `attach` names target labels lying on the circles the move touches: the new
    loop for a cup, and for a saddle the two labels on the merged circle (equal) or
    on the two circles of a split.
    """
    kind: str
    source: PlanarDiagram
    target: PlanarDiagram
    edge_map: dict[int, int]
    site: tuple[int, ...] = ()
    attach: tuple[int, ...] = ()


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def classes(self) -> list[list]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(g) for g in sorted(groups.values(), key=min)]


class DiagramService:
    """
    Parses, validates and transforms oriented link diagrams, and resolves cube vertices.
    """

    def __init__(self):
        self.log = structlog.get_logger(service="diagram")

    def parse_pd(self, text: str, name: Optional[str] = None) -> PlanarDiagram:
        parsed = parse_pd_text(text)
        return self.build(
            crossings=parsed.crossings,
            loops=parsed.loops,
            over_in=parsed.over_in,
            name=name if name is not None else parsed.name,
        )

    def build(
        self,
        crossings: Sequence[Sequence[int]],
        loops: Sequence[int] = (),
        over_in: Optional[Sequence[int]] = None,
        name: Optional[str] = None,
    ) -> PlanarDiagram:
        """
        Validate raw PD data and compute orientation, signs and components.

        Parameters
        ----------
        crossings: Sequence[Sequence[int]]
            4-tuples of edge labels, counterclockwise from the incoming under-strand
        loops: Sequence[int]
            edge labels of crossing-free components
        over_in: Sequence[int], optional
            indices of crossings whose over-strand enters at b. When given it must
            agree with the orientation forced by the under-strands; when omitted,
            over-strands not reached from any under-strand follow label order
        """
        crossings = [tuple(int(x) for x in crossing) for crossing in crossings]
        loops = [int(x) for x in loops]
        self._check_labels(crossings, loops)

        direction = self._orient(crossings, over_in)
        final_over_in = tuple(x for x in range(len(crossings)) if direction[x, 1])
        if over_in is not None:
            for x in range(len(crossings)):
                if (x in set(over_in)) != direction[x, 1]:
                    raise OrientationError(
                        f"Orientation hint for crossing {x} contradicts the under-strand orientation",
                        crossing=x,
                    )

        self._check_planarity(crossings)

        signs = tuple(-1 if direction[x, 1] else 1 for x in range(len(crossings)))
        components = _UnionFind(sorted({e for c in crossings for e in c} | set(loops)))
        for a, b, c, d in crossings:
            components.union(a, c)
            components.union(b, d)

        diagram = PlanarDiagram(
            name=name,
            crossings=tuple(crossings),  # type: ignore
            loops=tuple(loops),
            over_in=final_over_in,
            signs=signs,
            component_count=len(components.classes()),
        )
        self.log.debug("Built diagram", **diagram.describe())
        return diagram

    def _check_labels(self, crossings: list[Crossing], loops: list[int]):
        occurrences: dict[int, list[int]] = {}
        for x, crossing in enumerate(crossings):
            for label in crossing:
                if label < 1:
                    raise EdgeLabelError(f"Edge label {label} in crossing {x} is not positive", edge=label, crossing=x)
                occurrences.setdefault(label, []).append(x)
        for label, where in sorted(occurrences.items()):
            if len(where) != 2:
                raise EdgeLabelError(
                    f"Edge label {label} appears {'once' if len(where) == 1 else f'{len(where)} times'}"
                    f" (crossing {where[0]}); every edge label must appear exactly twice",
                    edge=label,
                    crossing=where[0],
                    count=len(where),
                )
        seen_loops = set()
        for label in loops:
            if label < 1 or label in occurrences or label in seen_loops:
                raise EdgeLabelError(f"Loop label {label} is reused or not positive", edge=label)
            seen_loops.add(label)
        labels = set(occurrences) | seen_loops
        if labels:
            missing = sorted(set(range(1, max(labels) + 1)) - labels)
            if missing:
                raise EdgeLabelError(
                    f"Edge label {missing[0]} is missing; labels must run from 1 to {max(labels)}",
                    edge=missing[0],
                )

    def _orient(self, crossings: list[Crossing], over_in: Optional[Sequence[int]]) -> dict[Slot, bool]:
        """Map every slot to True when its edge points into the crossing."""
        ends: dict[int, list[Slot]] = {}
        for x, crossing in enumerate(crossings):
            for s, label in enumerate(crossing):
                ends.setdefault(label, []).append((x, s))

        def neighbours(slot: Slot) -> list[tuple[Slot, bool]]:
            x, s = slot
            label = crossings[x][s]
            first, second = ends[label]
            other = second if first == slot else first
            out = [(other, True)]
            if s in (1, 3):
                out.append(((x, 4 - s), True))
            return out

        direction: dict[Slot, bool] = {}

        def propagate(seed: Slot, value: bool):
            queue = deque([(seed, value)])
            while queue:
                slot, incoming = queue.popleft()
                known = direction.get(slot)
                if known is not None:
                    if known != incoming:
                        x, s = slot
                        raise OrientationError(
                            f"Edge {crossings[x][s]} at crossing {x} is oriented both ways",
                            crossing=x,
                            edge=crossings[x][s],
                        )
                    continue
                direction[slot] = incoming
                for other, flips in neighbours(slot):
                    queue.append((other, not incoming if flips else incoming))

        for x in range(len(crossings)):
            propagate((x, 0), True)
            propagate((x, 2), False)

        hints = set(over_in) if over_in is not None else None
        for x, (a, b, c, d) in enumerate(crossings):
            if (x, 1) in direction:
                continue
            if hints is not None:
                b_in = x in hints
            else:
                # Components lying entirely over others follow label order
                b_in = not (b == d + 1 or b < d - 1)
            self.log.debug("Orienting over-only strand", crossing=x, b_incoming=b_in)
            propagate((x, 1), b_in)
        return direction

    def faces(self, diagram_or_crossings: Union[PlanarDiagram, Sequence[Crossing]]) -> list[list[Slot]]:
        """
        Faces of the diagram's 4-valent graph as cycles of darts.

        A dart (x, s) leaves crossing x along the edge at slot s; the face continues
        from the far end (x', s') through slot s' - 1.
        """
        if isinstance(diagram_or_crossings, PlanarDiagram):
            crossings = list(diagram_or_crossings.crossings)
        else:
            crossings = list(diagram_or_crossings)
        ends: dict[int, list[Slot]] = {}
        for x, crossing in enumerate(crossings):
            for s, label in enumerate(crossing):
                ends.setdefault(label, []).append((x, s))

        seen: set[Slot] = set()
        faces = []
        for x in range(len(crossings)):
            for s in range(4):
                if (x, s) in seen:
                    continue
                face = []
                dart = (x, s)
                while dart not in seen:
                    seen.add(dart)
                    face.append(dart)
                    first, second = ends[crossings[dart[0]][dart[1]]]
                    far = second if first == dart else first
                    dart = (far[0], (far[1] - 1) % 4)
                faces.append(face)
        return faces

    def _pieces(self, crossings: Sequence[Crossing]) -> _UnionFind:
        pieces = _UnionFind(range(len(crossings)))
        first_seen: dict[int, int] = {}
        for x, crossing in enumerate(crossings):
            for label in crossing:
                if label in first_seen:
                    pieces.union(first_seen[label], x)
                else:
                    first_seen[label] = x
        return pieces

    def _check_planarity(self, crossings: list[Crossing]):
        if not crossings:
            return
        face_count = len(self.faces(crossings))
        piece_count = len(self._pieces(crossings).classes())
        expected = len(crossings) + 2 * piece_count
        if face_count != expected:
            raise PlanarityError(
                f"Diagram has {face_count} faces, a planar diagram with {len(crossings)} crossings"
                f" in {piece_count} pieces has {expected}",
                faces=face_count,
                expected=expected,
            )

    def resolve(self, diagram: PlanarDiagram, vertex: Union[int, Sequence[int]]) -> ResolvedState:
        """
        Replace each crossing by its 0- or 1-smoothing and collect the circles.

        The 0-smoothing of X[a, b, c, d] joins a with b and c with d; the 1-smoothing
        joins a with d and b with c.
        """
        n = diagram.crossing_count
        if isinstance(vertex, int):
            if vertex < 0 or vertex >> n:
                raise DimensionMismatch(f"Vertex {vertex} does not fit {n} crossings", crossings=n)
            mask = vertex
        else:
            if len(vertex) != n:
                raise DimensionMismatch(
                    f"Vertex has length {len(vertex)}, the diagram has {n} crossings",
                    expected=n,
                    actual=len(vertex),
                )
            mask = from_bit_tuple(vertex)

        edge_count = diagram.edge_count
        parent = list(range(edge_count + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                if ry < rx:
                    rx, ry = ry, rx
                parent[ry] = rx

        for i, (a, b, c, d) in enumerate(diagram.crossings):
            if (mask >> i) & 1:
                union(a, d)
                union(b, c)
            else:
                union(a, b)
                union(c, d)

        # Roots are minimum labels, so sorting roots orders circles canonically
        circle_of = [0] * (edge_count + 1)
        members: dict[int, list[int]] = {}
        for label in range(1, edge_count + 1):
            members.setdefault(find(label), []).append(label)
        roots = sorted(members)
        for index, root in enumerate(roots):
            for label in members[root]:
                circle_of[label] = index
        return ResolvedState(
            vertex=mask,
            crossing_count=n,
            circles=tuple(tuple(members[root]) for root in roots),
            circle_of=tuple(circle_of),
        )

    def mirror(self, diagram: PlanarDiagram) -> PlanarDiagram:
        """Swap over and under at every crossing, rotating the PD tuple by one slot."""
        crossings = []
        for x, (a, b, c, d) in enumerate(diagram.crossings):
            if diagram.signs[x] > 0:
                crossings.append((d, a, b, c))
            else:
                crossings.append((b, c, d, a))
        over_in = [x for x in range(diagram.crossing_count) if diagram.signs[x] > 0]
        return self.build(crossings, diagram.loops, over_in=over_in, name=_mirror_name(diagram.name))

    def disjoint_union(self, first: PlanarDiagram, second: PlanarDiagram) -> PlanarDiagram:
        offset = first.edge_count
        shift = first.crossing_count
        crossings = list(first.crossings) + [
            tuple(label + offset for label in crossing) for crossing in second.crossings
        ]
        loops = list(first.loops) + [label + offset for label in second.loops]
        over_in = list(first.over_in) + [x + shift for x in second.over_in]
        return self.build(crossings, loops, over_in=over_in, name=_join_names(first.name, second.name, " ⊔ "))

    def connected_sum(self, first: PlanarDiagram, e1: int, second: PlanarDiagram, e2: int) -> PlanarDiagram:
        self._check_edge(first, e1)
        self._check_edge(second, e2)
        union = self.disjoint_union(first, second)
        joined = self.saddle(union, e1, e2 + first.edge_count).target
        return joined.copy(update={"name": _join_names(first.name, second.name, "#")})

    def _check_edge(self, diagram: PlanarDiagram, edge: int):
        if not 1 <= edge <= diagram.edge_count:
            raise InvalidMoveError(
                f"Edge {edge} is not a label of {diagram.name or 'the diagram'}",
                edge=edge,
            )

    def saddle_sites(self, diagram: PlanarDiagram) -> list[tuple[int, int]]:
        """All edge pairs (e1 <= e2) where an oriented saddle can be attached."""
        sites = set()
        for face in self.faces(diagram):
            forward: dict[bool, set[int]] = {True: set(), False: set()}
            for x, s in face:
                forward[not diagram.slot_incoming(x, s)].add(diagram.crossings[x][s])
            for group in forward.values():
                ordered = sorted(group)
                for i, e1 in enumerate(ordered):
                    for e2 in ordered[i + 1:]:
                        sites.add((e1, e2))

        piece_of = self._piece_of_edge(diagram)
        labels = sorted(piece_of)
        for i, e1 in enumerate(labels):
            for e2 in labels[i + 1:]:
                if piece_of[e1] != piece_of[e2]:
                    sites.add((e1, e2))
        for loop in diagram.loops:
            sites.add((loop, loop))
        return sorted(sites)

    def _piece_of_edge(self, diagram: PlanarDiagram) -> dict[int, object]:
        pieces = self._pieces(diagram.crossings)
        piece_of: dict[int, object] = {}
        for x, crossing in enumerate(diagram.crossings):
            for label in crossing:
                piece_of[label] = ("crossings", pieces.find(x))
        for label in diagram.loops:
            piece_of[label] = ("loop", label)
        return piece_of

    def saddle(self, diagram: PlanarDiagram, e1: int, e2: int) -> Reconnection:
        """
        Attach an oriented band between edges e1 and e2.

        Two crossing edges are cut and their head ends exchanged, so the band joins
        e1's tail to e2's head and e2's tail to e1's head. A loop banded to another
        component is absorbed into it; a loop banded to itself splits in two.
        """
        self._check_edge(diagram, e1)
        self._check_edge(diagram, e2)
        e1, e2 = min(e1, e2), max(e1, e2)
        if (e1, e2) not in set(self.saddle_sites(diagram)):
            raise InvalidMoveError(
                f"Edges {e1} and {e2} do not share a face with matching orientation",
                edges=(e1, e2),
            )
        loops = list(diagram.loops)
        crossings = [list(crossing) for crossing in diagram.crossings]

        if e1 == e2:
            # A loop split in two by a band
            new_label = diagram.edge_count + 1
            loops.append(new_label)
            edge_map, target = self._relabelled(diagram, crossings, loops, "saddle")
            attach = (edge_map[e1], edge_map[new_label])
        elif e1 in diagram.loops or e2 in diagram.loops:
            absorbed = e1 if e1 in diagram.loops else e2
            keeper = e2 if absorbed == e1 else e1
            loops.remove(absorbed)
            edge_map, target = self._relabelled(diagram, crossings, loops, "saddle")
            attach = (edge_map[keeper], edge_map[keeper])
        else:
            head1 = self._head(diagram, e1)
            head2 = self._head(diagram, e2)
            crossings[head1[0]][head1[1]] = e2
            crossings[head2[0]][head2[1]] = e1
            edge_map, target = self._relabelled(diagram, crossings, loops, "saddle")
            attach = (edge_map[e1], edge_map[e2])

        self.log.debug("Attached saddle", edges=(e1, e2), components=target.component_count)
        return Reconnection(
            kind="saddle",
            source=diagram,
            target=target,
            edge_map=edge_map,
            site=(e1, e2),
            attach=attach,
        )

    def cup(self, diagram: PlanarDiagram) -> Reconnection:
        """Add a distant crossing-free unknot carrying the largest label."""
        new_label = diagram.edge_count + 1
        target = self.build(
            diagram.crossings,
            list(diagram.loops) + [new_label],
            over_in=diagram.over_in,
            name=diagram.name,
        )
        return Reconnection(
            kind="cup",
            source=diagram,
            target=target,
            edge_map={label: label for label in range(1, new_label)},
            site=(),
            attach=(new_label,),
        )

    def cap(self, diagram: PlanarDiagram, loop: int) -> Reconnection:
        if loop not in diagram.loops:
            raise InvalidMoveError(
                f"Edge {loop} is not a crossing-free component",
                edge=loop,
            )
        loops = [label for label in diagram.loops if label != loop]
        edge_map, target = self._relabelled(diagram, [list(c) for c in diagram.crossings], loops, "cap")
        return Reconnection(
            kind="cap",
            source=diagram,
            target=target,
            edge_map=edge_map,
            site=(loop,),
            attach=(),
        )

    def _head(self, diagram: PlanarDiagram, edge: int) -> Slot:
        for x, crossing in enumerate(diagram.crossings):
            for s, label in enumerate(crossing):
                if label == edge and diagram.slot_incoming(x, s):
                    return x, s
        raise InvalidMoveError(f"Edge {edge} has no head", edge=edge)

    def _relabelled(
        self,
        diagram: PlanarDiagram,
        crossings: list[list[int]],
        loops: list[int],
        reason: str,
    ) -> tuple[dict[int, int], PlanarDiagram]:
        """
        Relabel edges consecutively along the orientation of each component.

        Slot directions are unchanged by the moves, so the old orientation data
        still describes the new crossings.
        """
        tail_of: dict[int, Slot] = {}
        for x, crossing in enumerate(crossings):
            for s, label in enumerate(crossing):
                if not diagram.slot_incoming(x, s):
                    tail_of[label] = (x, s)

        def successor(label: int) -> int:
            for x, crossing in enumerate(crossings):
                for s, other in enumerate(crossing):
                    if other == label and diagram.slot_incoming(x, s):
                        return crossing[(s + 2) % 4]
            raise InvalidMoveError(f"Edge {label} has no head after {reason}", edge=label)

        edge_map: dict[int, int] = {}
        counter = 0
        for start in sorted(set(tail_of) | set(loops)):
            if start in edge_map:
                continue
            label = start
            while label not in edge_map:
                counter += 1
                edge_map[label] = counter
                if label in loops:
                    break
                label = successor(label)

        new_crossings = [tuple(edge_map[label] for label in crossing) for crossing in crossings]
        new_loops = [edge_map[label] for label in loops]
        target = self.build(new_crossings, new_loops, over_in=diagram.over_in, name=diagram.name)
        return edge_map, target


def _mirror_name(name: Optional[str]) -> Optional[str]:
    if name is None:
        return None
    if name.startswith("m(") and name.endswith(")"):
        return name[2:-1]
    return f"m({name})"


def _join_names(first: Optional[str], second: Optional[str], joiner: str) -> Optional[str]:
    if first is None and second is None:
        return None
    return f"{first or '?'}{joiner}{second or '?'}"
