import json

import pydantic
import pytest

from khrefine.algebra.rings import F2Ring, PrimeFieldRing
from khrefine.commands.base import ServiceBundle
from khrefine.errors import (
    FingerprintMismatch,
    MissingMirrorOperation,
    OperationDimensionError,
    OperationFileError,
    PreconditionError,
)
from khrefine.models.artifacts import OperationBlock, OperationMatrix
from khrefine.models.jobs import OperationSource
from khrefine.tests.conftest import CORPUS, UNKNOT

F2 = F2Ring()


def write(path, operation: OperationMatrix) -> str:
    path.write_text(operation.to_json(), encoding='utf-8')
    return str(path)


def test_sq1_vanishes_on_unknot(services, parse):
    assert services.operation_service.bockstein_sq1(parse(UNKNOT)).blocks == []


def test_sq1_on_trefoil(services, knot):
    sq1 = services.operation_service.bockstein_sq1(knot("3_1"))
    assert sq1.degree == 1
    assert sq1.name == "sq1"
    assert [(b.i, b.j, b.rows, b.cols, b.entries) for b in sq1.blocks] == [(-3, -7, 1, 1, [[0, 0, 1]])]
    assert services.operation_service.rank(sq1, knot("3_1"), F2, -3, -7) == 1
    assert services.operation_service.rank(sq1, knot("3_1"), F2, 0, -1) == 0


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_1", "6_2", "m(7_3)"])
def test_sq1_squares_to_zero(services, knot, name):
    ops = services.operation_service
    sq1 = ops.bockstein_sq1(knot(name))
    twice = ops.compose(sq1, sq1, knot(name), F2)
    assert twice.degree == 2
    assert twice.blocks == []


def test_export_basis(services, parse, knot):
    ops = services.operation_service
    manifest = ops.export_basis(parse(UNKNOT), F2)
    assert [(b.i, b.j) for b in manifest.blocks] == [(0, -1), (0, 1)]
    assert manifest.block(0, 1).vectors == [[[0, 0, 1]]]
    assert manifest.block(0, 3) is None
    assert len(manifest.fingerprint) == 64

    trefoil = ops.export_basis(knot("3_1"), F2)
    assert sum(len(b.vectors) for b in trefoil.blocks) == 6
    assert trefoil.pd == [list(c) for c in knot("3_1").crossings]


def test_fingerprint_is_deterministic(services, parse):
    first = services.operation_service.export_basis(parse(CORPUS["3_1"]), F2).fingerprint
    second = ServiceBundle.create().operation_service.export_basis(parse(CORPUS["3_1"]), F2).fingerprint
    assert first == second
    permuted = parse("PD[X[3,6,4,1],X[5,2,6,3],X[1,4,2,5]]")
    assert services.operation_service.export_basis(permuted, F2).fingerprint != first
    assert services.operation_service.export_basis(parse(CORPUS["3_1"]), PrimeFieldRing(3)).fingerprint != first


def test_load_round_trip(services, knot, tmp_path):
    ops = services.operation_service
    sq1 = ops.bockstein_sq1(knot("3_1"))
    loaded = ops.load_operation(write(tmp_path / "sq1.json", sq1), knot("3_1"), F2)
    assert loaded.dict() == sq1.dict()
    assert json.loads(sq1.to_json())["schema"] == 1


def test_load_errors(services, knot, tmp_path):
    ops = services.operation_service
    trefoil = knot("3_1")
    sq1 = ops.bockstein_sq1(trefoil)
    path = write(tmp_path / "sq1.json", sq1)

    with pytest.raises(FingerprintMismatch) as info:
        ops.load_operation(path, knot("4_1"), F2)
    assert info.value.exit_code == 4
    assert info.value.context["actual"] == sq1.basis_fingerprint

    with pytest.raises(OperationFileError):
        ops.load_operation(path, trefoil, PrimeFieldRing(3))

    wrong_shape = sq1.copy(update={"blocks": [OperationBlock(i=-3, j=-7, rows=2, cols=1)]})
    with pytest.raises(OperationDimensionError) as info:
        ops.load_operation(write(tmp_path / "shape.json", wrong_shape), trefoil, F2)
    assert (info.value.context["i"], info.value.context["j"]) == (-3, -7)

    outside = sq1.copy(update={"blocks": [OperationBlock(i=-3, j=-7, rows=1, cols=1, entries=[[0, 1, 1]])]})
    with pytest.raises(OperationDimensionError):
        ops.load_operation(write(tmp_path / "outside.json", outside), trefoil, F2)

    malformed = tmp_path / "malformed.json"
    malformed.write_text("{not json", encoding='utf-8')
    with pytest.raises(OperationFileError):
        ops.load_operation(str(malformed), trefoil, F2)

    zero_degree = tmp_path / "zero_degree.json"
    zero_degree.write_text(json.dumps({**json.loads(sq1.to_json()), "degree": 0}), encoding='utf-8')
    with pytest.raises(OperationFileError):
        ops.load_operation(str(zero_degree), trefoil, F2)

    with pytest.raises(OperationFileError):
        ops.load_operation(str(tmp_path / "missing.json"), trefoil, F2)


def test_entries_are_reduced_into_the_field(services, knot, tmp_path):
    ops = services.operation_service
    sq1 = ops.bockstein_sq1(knot("3_1"))
    doubled = sq1.copy(update={"blocks": [OperationBlock(i=-3, j=-7, rows=1, cols=1, entries=[[0, 0, 2]])]})
    loaded = ops.load_operation(write(tmp_path / "doubled.json", doubled), knot("3_1"), F2)
    assert loaded.blocks[0].entries == []


def test_operation_models():
    with pytest.raises(pydantic.ValidationError):
        OperationMatrix(degree=0, field="f2", basis_fingerprint="x")
    with pytest.raises(pydantic.ValidationError):
        OperationBlock(i=0, j=0, rows=1, cols=1, entries=[[0, 0]])
    with pytest.raises(pydantic.ValidationError):
        OperationSource(kind="file")


def test_fake_operation_on_9_42(services, knot, operation_files):
    ops = services.operation_service
    diagram = knot("9_42")
    fake = ops.load_operation(operation_files[0], diagram, F2)
    assert fake.degree == 2
    assert ops.rank(fake, diagram, F2, -2, -1) == 1
    assert ops.block_matrix(fake, diagram, F2, -2, -1).to_dense() == [[1]]
    assert ops.block_matrix(fake, diagram, F2, -1, 1).is_zero()
    mirror = ops.load_operation(operation_files[1], knot("m(9_42)"), F2)
    assert mirror.blocks == []
    with pytest.raises(FingerprintMismatch):
        ops.compose(fake, mirror, diagram, F2)


def test_resolve(services, knot, operation_files):
    ops = services.operation_service
    diagram = knot("9_42")
    assert ops.resolve(OperationSource(kind="sq1"), diagram, F2).name == "sq1"
    assert ops.resolve(OperationSource(kind="zero", degree=3), diagram, F2).degree == 3
    with pytest.raises(PreconditionError):
        ops.resolve(OperationSource(kind="sq1"), diagram, PrimeFieldRing(3))
    source = OperationSource(kind="file", path=operation_files[0])
    assert ops.resolve(source, diagram, F2).name == "fake"
    with pytest.raises(MissingMirrorOperation):
        ops.resolve(source, diagram, F2, mirror=True)
