import os

import pytest

from khrefine.algebra.rings import F2Ring
from khrefine.commands.base import ServiceBundle
from khrefine.models.artifacts import OperationBlock, OperationMatrix
from khrefine.models.diagram import PlanarDiagram
from khrefine.utils.pd_parser import parse_corpus_text

RESOURCES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'resources')

UNKNOT = "PD[Loop[1]]"
UNKNOT_1 = "PD[X[1,1,2,2]]"
EMPTY = "PD[]"
UNLINK_2 = "PD[Loop[1],Loop[2]]"
TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
FIGURE_EIGHT = "PD[X[4,2,5,1],X[8,6,1,5],X[6,3,7,4],X[2,7,3,8]]"


def resource(*parts: str) -> str:
    return os.path.join(RESOURCES, *parts)


def load_corpus(filename: str = 'corpus.pdlist') -> dict[str, str]:
    with open(resource(filename), encoding='utf-8') as f:
        return dict(parse_corpus_text(f.read()))


CORPUS = load_corpus()


@pytest.fixture(scope='session')
def services() -> ServiceBundle:
    """One set of services for the whole run, so complexes and homology blocks are cached."""
    return ServiceBundle.create()


@pytest.fixture
def fresh_services() -> ServiceBundle:
    return ServiceBundle.create(check_d_squared=True)


@pytest.fixture(scope='session')
def parse(services):
    def parse_pd(text: str, name=None) -> PlanarDiagram:
        return services.diagram_service.parse_pd(text, name=name)
    return parse_pd


@pytest.fixture(scope='session')
def knot(services):
    """Corpus knots by name; `m(name)` gives the mirror."""
    def get(name: str) -> PlanarDiagram:
        if name.startswith('m(') and name.endswith(')'):
            return services.diagram_service.mirror(get(name[2:-1]))
        return services.diagram_service.parse_pd(CORPUS[name], name=name)
    return get


@pytest.fixture
def operation_files(services, knot, tmp_path) -> tuple[str, str]:
    """
    A degree-2 operation on 9_42 sending the generator of Kh^{-2,-1} to that of
    Kh^{0,-1}, and the zero operation on the mirror, written as operation files.
    """
    ops = services.operation_service
    f2 = F2Ring()
    fake = OperationMatrix(
        degree=2,
        field=f2.name,
        basis_fingerprint=ops.export_basis(knot("9_42"), f2).fingerprint,
        blocks=[OperationBlock(i=-2, j=-1, rows=1, cols=1, entries=[[0, 0, 1]])],
        name="fake",
    )
    zero = ops.zero_operation(knot("m(9_42)"), f2, degree=2)
    paths = tmp_path / "op.json", tmp_path / "mirror_op.json"
    for path, operation in zip(paths, (fake, zero)):
        path.write_text(operation.to_json(), encoding='utf-8')
    return str(paths[0]), str(paths[1])
