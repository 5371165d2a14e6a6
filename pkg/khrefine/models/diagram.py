from dataclasses import dataclass
from typing import Any, Optional

import pydantic

Crossing = tuple[int, int, int, int]


class PlanarDiagram(pydantic.BaseModel):
    """
    An oriented link diagram in PD notation.

    Each crossing X[a, b, c, d] lists its four edge labels counterclockwise, starting
    from the incoming under-strand, so the under-strand runs a -> c. The over-strand
    enters either at b or at d; `over_in` holds the indices of the crossings where it
    enters at b. A crossing is positive when its over-strand enters at d.

    Crossing-free components are listed in `loops`, one edge label each.

    Build instances through `DiagramService`, which validates labels, orientation and
    planarity and fills in the derived `signs` and `component_count`.
    """

    name: Optional[str] = None
    crossings: tuple[Crossing, ...] = ()
    loops: tuple[int, ...] = ()
    over_in: tuple[int, ...] = ()
    signs: tuple[int, ...] = ()
    component_count: int = 0

    class Config:
        frozen = True

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.signs if s > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    @property
    def writhe(self) -> int:
        return sum(self.signs)

    @property
    def edge_count(self) -> int:
        labels = [label for crossing in self.crossings for label in crossing] + list(self.loops)
        return max(labels, default=0)

    @property
    def is_knot(self) -> bool:
        return self.component_count == 1

    def slot_incoming(self, crossing: int, slot: int) -> bool:
        """Whether the edge at the given slot of a crossing points into it."""
        if slot == 0:
            return True
        if slot == 2:
            return False
        b_in = crossing in self.over_in
        return b_in if slot == 1 else not b_in

    def to_pd_text(self) -> str:
        items = [f"X[{a},{b},{c},{d}]" for a, b, c, d in self.crossings]
        items += [f"Loop[{label}]" for label in self.loops]
        return f"PD[{','.join(items)}]"

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "pd": [list(crossing) for crossing in self.crossings],
            "loops": list(self.loops),
            "over_in": list(self.over_in),
        }

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "crossings": self.crossing_count,
            "components": self.component_count,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "writhe": self.writhe,
        }


@dataclass(frozen=True)
class ResolvedState:
    """
    The circles of one cube vertex.

    Edge labels double as arc identifiers: smoothing a crossing joins its four edge
    ends in pairs, so each circle is a set of edge labels. Circles are ordered by
    their minimum label, which is also their canonical identity.
    """
    vertex: int
    crossing_count: int
    circles: tuple[tuple[int, ...], ...]
    #: circle index of each edge label; index 0 is unused
    circle_of: tuple[int, ...]

    @property
    def weight(self) -> int:
        return bin(self.vertex).count("1")

    @property
    def circle_count(self) -> int:
        return len(self.circles)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.vertex >> i) & 1 for i in range(self.crossing_count))
