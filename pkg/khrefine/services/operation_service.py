import hashlib
import json
from typing import Optional

import pydantic
import structlog

from khrefine.algebra.matrices import FieldMatrix
from khrefine.algebra.rings import F2Ring, IntegerRing, Ring
from khrefine.errors import (
    FingerprintMismatch,
    MissingMirrorOperation,
    OperationDimensionError,
    OperationFileError,
    PreconditionError,
)
from khrefine.models.artifacts import BasisBlock, BasisManifest, OperationBlock, OperationMatrix
from khrefine.models.cube import Flavor
from khrefine.models.diagram import PlanarDiagram
from khrefine.models.jobs import OperationSource
from khrefine.services.homology_service import HomologyService


class OperationService:
    """
    Stable cohomology operations on Khovanov homology as block matrices in the
    canonical homology bases: the internal Bockstein Sq¹, the zero operation, and
    operations imported from files pinned to a basis fingerprint.
    """

    def __init__(self, homology_service: Optional[HomologyService] = None):
        self.homology_service = homology_service or HomologyService()
        self.log = structlog.get_logger(service="operation")
        self._manifests: dict[tuple[PlanarDiagram, str], BasisManifest] = {}

    def export_basis(self, diagram: PlanarDiagram, field: Ring) -> BasisManifest:
        """
        The canonical cocycle representatives of every nonzero Kh^{i,j}, and their
        fingerprint: the sha256 of the canonical JSON of the field, the PD code and
        the representatives.
        """
        key = (diagram, field.name)
        if key in self._manifests:
            return self._manifests[key]
        complex_ = self.homology_service.complex(diagram, Flavor.KHOVANOV, field)
        blocks = []
        for h, j in complex_.bigradings():
            block = self.homology_service.khovanov_block(diagram, field, h, j)
            if block.rank:
                blocks.append(BasisBlock(
                    i=h,
                    j=j,
                    vectors=[block.state_entries(complex_, v) for v in block.basis],
                ))
        content = {
            "field": field.name,
            "pd": [list(crossing) for crossing in diagram.crossings],
            "loops": list(diagram.loops),
            "blocks": [block.dict() for block in blocks],
        }
        digest = hashlib.sha256(
            json.dumps(content, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()
        manifest = BasisManifest(
            diagram=diagram.name,
            field=field.name,
            pd=content["pd"],
            loops=content["loops"],
            blocks=blocks,
            fingerprint=digest,
        )
        self._manifests[key] = manifest
        return manifest

    def homology_rank(self, diagram: PlanarDiagram, field: Ring, i: int, j: int) -> int:
        return self.homology_service.khovanov_block(diagram, field, i, j).rank

    def bockstein_sq1(self, diagram: PlanarDiagram) -> OperationMatrix:
        """
        Sq¹: lift each F2 basis cocycle to a 0/1 integral cochain, apply the integral
        differential, halve and reduce mod 2, and read off the class in Kh^{i+1,j}.
        """
        f2 = F2Ring()
        z = IntegerRing()
        integral = self.homology_service.complex(diagram, Flavor.KHOVANOV, z)
        complex_ = self.homology_service.complex(diagram, Flavor.KHOVANOV, f2)
        blocks = []
        for h, j in complex_.bigradings():
            source = self.homology_service.khovanov_block(diagram, f2, h, j)
            if not source.rank:
                continue
            target = self.homology_service.khovanov_block(diagram, f2, h + 1, j)
            if not target.rank:
                continue
            differential = integral.block(h, j)
            entries = []
            for row, cocycle in enumerate(source.basis):
                lift = z.vector((i, 1) for i, _ in f2.items(cocycle))
                image = differential.apply(lift)
                odd = [i for i, c in z.items(image) if c % 2]
                if odd:
                    raise RuntimeError(f"Lift of a mod 2 cocycle in Kh^{{{h},{j}}} has odd coboundary")
                halved = f2.vector((i, c // 2) for i, c in z.items(image))
                for col, value in enumerate(target.coordinates(halved)):
                    if value:
                        entries.append([row, col, 1])
            if entries:
                blocks.append(OperationBlock(i=h, j=j, rows=source.rank, cols=target.rank, entries=entries))
        self.log.info("Computed Bockstein", diagram=diagram.name, nonzero_blocks=len(blocks))
        return OperationMatrix(
            degree=1,
            field=f2.name,
            basis_fingerprint=self.export_basis(diagram, f2).fingerprint,
            blocks=blocks,
            name="sq1",
        )

    def zero_operation(self, diagram: PlanarDiagram, field: Ring, degree: int = 1) -> OperationMatrix:
        return OperationMatrix(
            degree=degree,
            field=field.name,
            basis_fingerprint=self.export_basis(diagram, field).fingerprint,
            blocks=[],
            name="zero",
        )

    def load_operation(self, path: str, diagram: PlanarDiagram, field: Ring) -> OperationMatrix:
        """Read an operation-matrix file and check it against the diagram's canonical bases."""
        try:
            operation = OperationMatrix.parse_file(path)
        except (pydantic.ValidationError, ValueError) as e:
            raise OperationFileError(f"Malformed operation file {path}: {e}", path=path)
        except OSError as e:
            raise OperationFileError(f"Cannot read operation file {path}: {e.strerror}", path=path)
        return self.validate(operation, diagram, field, source=path)

    def validate(
        self,
        operation: OperationMatrix,
        diagram: PlanarDiagram,
        field: Ring,
        source: str = "<memory>",
    ) -> OperationMatrix:
        if operation.field != field.name:
            raise OperationFileError(
                f"Operation is over {operation.field}, expected {field.name}",
                path=source,
                field=operation.field,
            )
        expected = self.export_basis(diagram, field).fingerprint
        if operation.basis_fingerprint != expected:
            raise FingerprintMismatch(
                f"Operation was computed against basis {operation.basis_fingerprint[:12]}...,"
                f" the diagram's canonical basis is {expected[:12]}...",
                path=source,
                expected=expected,
                actual=operation.basis_fingerprint,
            )
        blocks = []
        for block in operation.blocks:
            rows = self.homology_rank(diagram, field, block.i, block.j)
            cols = self.homology_rank(diagram, field, block.i + operation.degree, block.j)
            if (block.rows, block.cols) != (rows, cols):
                raise OperationDimensionError(
                    f"Block ({block.i},{block.j}) is {block.rows}x{block.cols},"
                    f" Kh^{{{block.i},{block.j}}} -> Kh^{{{block.i + operation.degree},{block.j}}} is {rows}x{cols}",
                    path=source,
                    i=block.i,
                    j=block.j,
                )
            entries = []
            for r, c, value in block.entries:
                if not (0 <= r < rows and 0 <= c < cols):
                    raise OperationDimensionError(
                        f"Entry ({r},{c}) lies outside block ({block.i},{block.j})",
                        path=source,
                        i=block.i,
                        j=block.j,
                    )
                value = field.element(value)
                if value:
                    entries.append([r, c, field.to_json(value)])
            blocks.append(block.copy(update={"entries": entries}))
        self.log.debug("Loaded operation", source=source, degree=operation.degree, blocks=len(blocks))
        return operation.copy(update={"blocks": blocks})

    def resolve(
        self,
        source: OperationSource,
        diagram: PlanarDiagram,
        field: Ring,
        mirror: bool = False,
    ) -> OperationMatrix:
        """The operation a job asks for, on the diagram itself or on its mirror."""
        if source.kind == 'sq1':
            if field.characteristic != 2:
                raise PreconditionError(f"Sq1 is computed over f2, not {field.name}", field=field.name)
            return self.bockstein_sq1(diagram)
        if source.kind == 'zero':
            return self.zero_operation(diagram, field, source.degree)
        path = source.mirror_path if mirror else source.path
        if path is None:
            raise MissingMirrorOperation(
                "An imported operation needs a mirror operation file to compute r_- and s_-",
                path=source.path,
            )
        return self.load_operation(path, diagram, field)

    def block_matrix(
        self,
        operation: OperationMatrix,
        diagram: PlanarDiagram,
        field: Ring,
        i: int,
        j: int,
    ) -> FieldMatrix:
        """The block Kh^{i,j} -> Kh^{i+n,j}; a missing block is zero."""
        rows = self.homology_rank(diagram, field, i, j)
        cols = self.homology_rank(diagram, field, i + operation.degree, j)
        block = operation.block(i, j)
        entries = block.entries if block is not None else []
        return FieldMatrix.from_entries(field, rows, cols, [(r, c, v) for r, c, v in entries])

    def compose(
        self,
        first: OperationMatrix,
        second: OperationMatrix,
        diagram: PlanarDiagram,
        field: Ring,
    ) -> OperationMatrix:
        """`second ∘ first`: apply `first`, then `second`."""
        if first.basis_fingerprint != second.basis_fingerprint:
            raise FingerprintMismatch(
                "Cannot compose operations over different bases",
                expected=first.basis_fingerprint,
                actual=second.basis_fingerprint,
            )
        blocks = []
        for block in first.blocks:
            a = self.block_matrix(first, diagram, field, block.i, block.j)
            b = self.block_matrix(second, diagram, field, block.i + first.degree, block.j)
            product = a @ b
            entries = [[r, c, field.to_json(v)] for r, c, v in product.entries()]
            if entries:
                blocks.append(OperationBlock(
                    i=block.i, j=block.j, rows=product.nrows, cols=product.ncols, entries=entries,
                ))
        return OperationMatrix(
            degree=first.degree + second.degree,
            field=field.name,
            basis_fingerprint=first.basis_fingerprint,
            blocks=blocks,
            name=f"{second.name or '?'}∘{first.name or '?'}",
        )

    def rank(self, operation: OperationMatrix, diagram: PlanarDiagram, field: Ring, i: int, j: int) -> int:
        return self.block_matrix(operation, diagram, field, i, j).rank()
