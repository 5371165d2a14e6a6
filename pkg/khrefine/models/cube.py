from dataclasses import dataclass
from enum import Enum

from khrefine.algebra.rings import Ring

# Circle labels: 0 is x_+ (degree +1), 1 is x_- (degree -1)
X_PLUS = 0
X_MINUS = 1


class Flavor(str, Enum):
    KHOVANOV = "kh"
    BAR_NATAN = "bn"


@dataclass(frozen=True)
class FrobeniusFlavor:
    """
    Multiplication and comultiplication of the Frobenius algebra behind a complex.

    The Bar-Natan flavor adds x_- ⊗ x_- -> x_- to the multiplication and
    -x_+ ⊗ x_+ to the comultiplication of x_+; both raise quantum degree by 2.
    Coefficients are plain integers, converted into the ring on assembly.
    """
    flavor: Flavor
    ring: Ring

    @property
    def deformed(self) -> bool:
        return self.flavor == Flavor.BAR_NATAN

    def merge(self, a: int, b: int) -> list[tuple[int, int]]:
        if a == X_PLUS and b == X_PLUS:
            return [(X_PLUS, 1)]
        if a != b:
            return [(X_MINUS, 1)]
        return [(X_MINUS, 1)] if self.deformed else []

    def split(self, a: int) -> list[tuple[int, int, int]]:
        if a == X_MINUS:
            return [(X_MINUS, X_MINUS, 1)]
        terms = [(X_PLUS, X_MINUS, 1), (X_MINUS, X_PLUS, 1)]
        if self.deformed:
            terms.append((X_PLUS, X_PLUS, -1))
        return terms

    def unit(self) -> int:
        return X_PLUS

    def counit(self, a: int) -> int:
        return 1 if a == X_MINUS else 0


@dataclass(frozen=True)
class CircleMove:
    """
    How the circles of one resolution turn into the circles of another when a single
    merge or split happens and every other circle survives.

    `positions[c]` is the new index of source circle c, or -1 for circles taking
    part in the merge or split.
    """
    kind: str
    sources: tuple[int, ...]
    targets: tuple[int, ...]
    positions: tuple[int, ...]

    @property
    def is_merge(self) -> bool:
        return self.kind == "merge"

    def images(self, labeling: int, frobenius: FrobeniusFlavor) -> list[tuple[int, int]]:
        base = 0
        for index, position in enumerate(self.positions):
            if position >= 0 and (labeling >> index) & 1:
                base |= 1 << position
        if self.is_merge:
            a, b = self.sources
            (c,) = self.targets
            return [
                (base | (x << c), coefficient)
                for x, coefficient in frobenius.merge((labeling >> a) & 1, (labeling >> b) & 1)
            ]
        (a,) = self.sources
        c1, c2 = self.targets
        return [
            (base | (x << c1) | (y << c2), coefficient)
            for x, y, coefficient in frobenius.split((labeling >> a) & 1)
        ]


class SignAssignment:
    """
    A sign for every cube edge u -> u + e_i, such that every square face anticommutes.
    """

    def __init__(self, crossing_count: int):
        self.crossing_count = crossing_count

    def sign(self, vertex: int, crossing: int) -> int:
        raise NotImplementedError

    def edges(self):
        n = self.crossing_count
        for u in range(1 << n):
            for i in range(n):
                if not (u >> i) & 1:
                    yield u, i


class StandardSignAssignment(SignAssignment):
    """(-1) to the number of 1-bits below the flipped coordinate."""

    def sign(self, vertex: int, crossing: int) -> int:
        return -1 if bin(vertex & ((1 << crossing) - 1)).count("1") % 2 else 1


class TableSignAssignment(SignAssignment):
    def __init__(self, crossing_count: int, table: dict[tuple[int, int], int]):
        super().__init__(crossing_count)
        self.table = dict(table)

    def sign(self, vertex: int, crossing: int) -> int:
        return self.table[vertex, crossing]


@dataclass(frozen=True)
class GaugeTransformation:
    """A sign per cube vertex; it carries s to the assignment t(u)·t(w)·s(u -> w)."""
    crossing_count: int
    values: tuple[int, ...]

    def __call__(self, vertex: int) -> int:
        return self.values[vertex]

    def negate(self) -> 'GaugeTransformation':
        return GaugeTransformation(self.crossing_count, tuple(-v for v in self.values))

    def apply(self, signs: SignAssignment) -> 'GaugedSignAssignment':
        return GaugedSignAssignment(signs, self)


class GaugedSignAssignment(SignAssignment):
    def __init__(self, base: SignAssignment, gauge: GaugeTransformation):
        super().__init__(base.crossing_count)
        self.base = base
        self.gauge = gauge

    def sign(self, vertex: int, crossing: int) -> int:
        return self.gauge(vertex) * self.gauge(vertex | (1 << crossing)) * self.base.sign(vertex, crossing)
