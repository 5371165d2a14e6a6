from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import pydantic

from khrefine.algebra.matrices import Matrix, make_matrix
from khrefine.models.complexes import GradedComplex


class MorseMove(pydantic.BaseModel):
    """
    An elementary cobordism between two diagrams.
    """
    move: str

    @property
    def chi(self) -> int:
        raise NotImplementedError


class CupMove(MorseMove):
    """Birth of a crossing-free unknot, far from the rest of the diagram."""
    move: Literal['cup'] = 'cup'

    @property
    def chi(self) -> int:
        return 1


class CapMove(MorseMove):
    """Death of the crossing-free component carrying edge label `loop`."""
    move: Literal['cap'] = 'cap'
    loop: int

    @property
    def chi(self) -> int:
        return 1


class SaddleMove(MorseMove):
    """An oriented band between two edges (a loop may be banded to itself)."""
    move: Literal['saddle'] = 'saddle'
    edges: tuple[int, int]

    @property
    def chi(self) -> int:
        return -1


MoveUnion = Union[CupMove, CapMove, SaddleMove]


class Movie(pydantic.BaseModel):
    """An ordered list of Morse moves, as read from a movie JSON file."""
    moves: list[MoveUnion] = pydantic.Field(default_factory=list)

    @classmethod
    def parse_moves(cls, data) -> 'Movie':
        if isinstance(data, list):
            data = {"moves": data}
        return cls.parse_obj(data)

    @property
    def chi(self) -> int:
        return sum(move.chi for move in self.moves)


@dataclass
class MovieMap:
    """
    A chain map between the complexes of two diagrams, one matrix per homological
    grading of the source. `chi` is the declared filtered degree: every image
    component has quantum grading at least that of its source plus `chi`.
    """
    source: GradedComplex
    target: GradedComplex
    chi: int
    matrices: dict[int, Matrix]
    moves: list[MoveUnion] = field(default_factory=list)
    label: Optional[str] = None

    def matrix(self, h: int) -> Matrix:
        m = self.matrices.get(h)
        if m is None:
            return make_matrix(self.source.ring, self.source.dimension(h), self.target.dimension(h))
        return m
