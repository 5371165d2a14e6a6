from typing import Any, Optional

import pydantic
from typing_extensions import TypeAlias

#: A chain written out as [vertex, labeling, value] triples.
StateEntries: TypeAlias = list[list[Any]]


class Artifact(pydantic.BaseModel):
    """
    A JSON document produced by a command. Every artifact carries `"schema": 1`.
    """
    schema_version: int = pydantic.Field(1, alias="schema")

    class Config:
        allow_population_by_field_name = True

    def to_json(self, **kwargs) -> str:
        return self.json(by_alias=True, **kwargs)

    def to_dict(self) -> dict[str, Any]:
        return self.dict(by_alias=True)


class HomologyCell(pydantic.BaseModel):
    i: int
    j: Optional[int] = None
    rank: int
    torsion: list[int] = pydantic.Field(default_factory=list)


class HomologyTable(Artifact):
    diagram: Optional[str] = None
    ring: str
    flavor: str
    cells: list[HomologyCell] = pydantic.Field(default_factory=list)
    euler_characteristic: dict[int, int] = pydantic.Field(default_factory=dict)
    poincare_polynomial: Optional[str] = None

    def rank(self, i: int, j: Optional[int] = None) -> int:
        return sum(cell.rank for cell in self.cells if cell.i == i and (j is None or cell.j == j))

    def torsion(self, i: int, j: Optional[int] = None) -> list[int]:
        out = []
        for cell in self.cells:
            if cell.i == i and (j is None or cell.j == j):
                out.extend(cell.torsion)
        return sorted(out)

    @property
    def total_rank(self) -> int:
        return sum(cell.rank for cell in self.cells)

    def ranks(self) -> dict[tuple[int, Optional[int]], int]:
        return {(cell.i, cell.j): cell.rank for cell in self.cells if cell.rank}


class BasisBlock(pydantic.BaseModel):
    i: int
    j: int
    vectors: list[StateEntries]


class BasisManifest(Artifact):
    """Canonical cocycle representatives of Khovanov homology, and the hash that pins them."""
    diagram: Optional[str] = None
    field: str
    pd: list[list[int]]
    loops: list[int] = pydantic.Field(default_factory=list)
    blocks: list[BasisBlock]
    fingerprint: str

    def block(self, i: int, j: int) -> Optional[BasisBlock]:
        for block in self.blocks:
            if block.i == i and block.j == j:
                return block
        return None


class OperationBlock(pydantic.BaseModel):
    """
    Kh^{i,j} -> Kh^{i+degree,j}. Row r holds the image of basis element r, so
    `entries` lists [row, col, value].
    """
    i: int
    j: int
    rows: int
    cols: int
    entries: list[list[Any]] = pydantic.Field(default_factory=list)

    @pydantic.validator("entries")
    def entries_are_triples(cls, v):
        for entry in v:
            if len(entry) != 3:
                raise ValueError("Operation matrix entries must be [row, col, value] triples")
        return v


class OperationMatrix(Artifact):
    degree: int
    field: str
    basis_fingerprint: str
    blocks: list[OperationBlock] = pydantic.Field(default_factory=list)
    name: Optional[str] = None

    @pydantic.validator("degree")
    def degree_is_positive(cls, v):
        if v < 1:
            raise ValueError("Operation degree must be at least 1")
        return v

    def block(self, i: int, j: int) -> Optional[OperationBlock]:
        for block in self.blocks:
            if block.i == i and block.j == j:
                return block
        return None


class WitnessElement(pydantic.BaseModel):
    """
    a: a cocycle of F_q in C^0; a_bar: its class in H_0(C); a_tilde: a Khovanov
    cocycle whose α-image is p_*(a), absent when p_*(a) = 0.
    """
    a: StateEntries
    a_bar: list[Any]
    a_tilde: Optional[StateEntries] = None


class Witness(pydantic.BaseModel):
    q: int
    kind: str
    elements: list[WitnessElement]


class InvariantBounds(pydantic.BaseModel):
    """Where r_+ and s_+ can land, and what the vanishing of α's blocks forces."""
    r_plus: list[int]
    s_plus: list[int]
    r_plus_forced: Optional[int] = None
    s_plus_forced: Optional[int] = None


class RefinedInvariants(Artifact):
    diagram: Optional[str] = None
    field: str
    operation: str
    s_min: int
    s_max: int
    s: int
    r_plus: int
    s_plus: int
    r_minus: int
    s_minus: int
    witnesses: dict[str, Witness] = pydantic.Field(default_factory=dict)
    bounds: Optional[InvariantBounds] = None


class SResult(Artifact):
    diagram: Optional[str] = None
    field: str
    s_min: int
    s_max: int
    s: int
    inclusion_ranks: dict[int, int] = pydantic.Field(default_factory=dict)


class SIntegralResult(Artifact):
    diagram: Optional[str] = None
    m: int
    s_min: int
    s_max: int
    s_min_plus_one: int
    s_max_minus_one: int


class MovieStep(pydantic.BaseModel):
    move: str
    chi: int
    source: str
    target: str


class CobordismResult(Artifact):
    """How a movie of Morse moves acts on the complexes it connects."""
    source: Optional[str] = None
    target: Optional[str] = None
    field: str
    flavor: str
    chi: int
    steps: list[MovieStep] = pydantic.Field(default_factory=list)
    chain_map: bool
    filtered: bool
    #: rank of the induced map on homology in each homological grading
    induced_ranks: dict[int, int] = pydantic.Field(default_factory=dict)
    #: the scalar a closed surface evaluates to, when source and target are empty
    evaluation: Optional[Any] = None


class ErrorDetail(pydantic.BaseModel):
    type: str
    message: str
    context: dict[str, Any] = pydantic.Field(default_factory=dict)


class ErrorReport(Artifact):
    error: ErrorDetail


class BatchRow(pydantic.BaseModel):
    name: str
    result: Optional[dict[str, Any]] = None
    error: Optional[ErrorDetail] = None


class BatchResult(Artifact):
    command: str
    rows: list[BatchRow]
