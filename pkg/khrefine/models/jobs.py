from typing import Literal, Optional

import pydantic


class OperationSource(pydantic.BaseModel):
    """
    Where a cohomology operation comes from: the internal Bockstein, the zero
    operation, or an operation-matrix file (with its counterpart for the mirror).
    """
    kind: Literal['sq1', 'zero', 'file'] = 'sq1'
    path: Optional[str] = None
    mirror_path: Optional[str] = None
    #: degree of the zero operation
    degree: int = 1

    @pydantic.root_validator
    def file_needs_path(cls, values):
        if values.get('kind') == 'file' and not values.get('path'):
            raise ValueError("An operation file source needs a path")
        return values

    @property
    def label(self) -> str:
        if self.kind == 'file':
            return f"file:{self.path}"
        if self.kind == 'zero':
            return f"zero:{self.degree}"
        return self.kind


class JobSpec(pydantic.BaseModel):
    """One invocation: a single command with its input and options."""
    command: str
    pd: Optional[str] = None
    pd_path: Optional[str] = None
    corpus_path: Optional[str] = None
    name: Optional[str] = None
    field: str = 'f2'
    ring: Optional[str] = None
    modulus: Optional[int] = None
    operation: OperationSource = pydantic.Field(default_factory=OperationSource)
    movie_path: Optional[str] = None
    flavor: Literal['kh', 'bn'] = 'bn'
    batch_command: Optional[str] = None
    sign_seed: Optional[int] = None
    output: Optional[str] = None

    @pydantic.root_validator
    def one_input(cls, values):
        sources = [k for k in ('pd', 'pd_path', 'corpus_path') if values.get(k)]
        if len(sources) > 1:
            raise ValueError(f"Give exactly one input, got {', '.join(sources)}")
        return values

    def with_pd(self, pd: str, name: Optional[str]) -> 'JobSpec':
        return self.copy(update={
            'pd': pd,
            'pd_path': None,
            'corpus_path': None,
            'name': name,
            'command': self.batch_command or self.command,
            'batch_command': None,
            'output': None,
        })
