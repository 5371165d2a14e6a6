"""
End-to-end checks against values published for small knots: the unknot in every
supported field, the 9_42 homology and invariants, the table1.pdlist knots run
through `batch`, K14n19265, where Sq¹ refines s^{F2}, and connected sums.
"""
import json
import time

import pytest

from khrefine.algebra.rings import F2Ring, IntegerRing, PrimeFieldRing, RationalRing
from khrefine.cli import run
from khrefine.models.cube import Flavor
from khrefine.models.jobs import OperationSource
from khrefine.tests.conftest import UNKNOT, UNKNOT_1, load_corpus, resource
from khrefine.tests.test_homology import KH_9_42_F2

UNKNOT_FIELDS = [F2Ring(), PrimeFieldRing(3), PrimeFieldRing(5), RationalRing()]

TABLE1 = load_corpus("table1.pdlist")

# name: (s^{F2}, s_+ and s_- of Sq²) as published
TABLE1_VALUES = {
    "9_42": (0, 2, 0),
    "10_132": (-2, 0, -2),
    "10_136": (0, 2, 0),
    "K11n12": (2, 2, 0),
    "K11n19": (-2, -2, -4),
    "K11n20": (0, 0, -2),
    "K11n24": (0, 2, 0),
    "K11n70": (2, 4, 2),
    "K11n79": (0, 2, 0),
    "K11n92": (0, 0, -2),
    "K11n96": (0, 2, 0),
    "K11n138": (0, 2, 0),
}

# Kh^{i,j}(K14n19265; Z) as (free rank, torsion coefficients)
KH_K14N19265 = {
    (6, 9): (1, []),
    (6, 7): (0, [2]),
    (4, 5): (1, []),
    (5, 5): (1, []),
    (2, 3): (1, []),
    (3, 3): (1, []),
    (4, 3): (0, [2]),
    (0, 1): (1, []),
    (2, 1): (0, [2]),
    (3, 1): (1, [2]),
    (0, -1): (1, [2, 2]),
    (1, -1): (2, []),
    (2, -1): (1, []),
    (-2, -3): (2, []),
    (-1, -3): (1, [2]),
    (0, -3): (0, [2, 2]),
    (1, -3): (0, [2]),
    (-3, -5): (1, []),
    (-2, -5): (0, [2, 2, 2]),
    (-1, -5): (0, [2, 2]),
    (0, -5): (1, []),
    (-4, -7): (1, []),
    (-3, -7): (2, [2, 2, 2]),
    (-2, -7): (1, [2]),
    (-5, -9): (2, []),
    (-4, -9): (1, [2, 2]),
    (-3, -9): (0, [2, 2]),
    (-6, -11): (1, []),
    (-5, -11): (1, [2, 2]),
    (-4, -11): (0, [2]),
    (-7, -13): (1, []),
    (-6, -13): (2, [2]),
    (-7, -15): (1, [2]),
    (-8, -17): (1, []),
}


@pytest.fixture(scope="module")
def k14n19265(services):
    with open(resource("K14n19265.pd"), encoding="utf-8") as f:
        return services.diagram_service.parse_pd(f.read(), name="K14n19265")


@pytest.mark.parametrize("field", UNKNOT_FIELDS, ids=lambda f: f.name)
@pytest.mark.parametrize("text", [UNKNOT, UNKNOT_1])
def test_unknot(services, parse, field, text):
    diagram = parse(text)
    hs = services.homology_service
    assert hs.field_homology(hs.complex(diagram, Flavor.KHOVANOV, field)).ranks() == {(0, 1): 1, (0, -1): 1}
    assert hs.field_homology(hs.complex(diagram, Flavor.BAR_NATAN, field)).ranks() == {(0, None): 2}
    result = services.invariant_service.s_field(diagram, field)
    assert (result.s_min, result.s_max, result.s) == (-1, 1, 0)


def test_unknot_refined(services, parse):
    for text in (UNKNOT, UNKNOT_1):
        result = services.invariant_service.refined_invariants(parse(text), F2Ring(), OperationSource(kind="sq1"))
        assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (0, 0, 0, 0)


def test_9_42(services, knot, operation_files):
    diagram = knot("9_42")
    hs = services.homology_service
    assert hs.field_homology(hs.complex(diagram, Flavor.KHOVANOV, F2Ring())).ranks() == KH_9_42_F2

    invariants = services.invariant_service
    for field in (F2Ring(), RationalRing()):
        assert invariants.s_field(diagram, field).s == 0

    path, mirror_path = operation_files
    result = invariants.refined_invariants(
        diagram, F2Ring(), OperationSource(kind="file", path=path, mirror_path=mirror_path)
    )
    assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (0, 2, 0, 0)


def test_table1_lists_every_knot():
    assert list(TABLE1) == list(TABLE1_VALUES)


@pytest.mark.slow
@pytest.mark.parametrize("name", list(TABLE1_VALUES))
def test_table1_s(services, name):
    s, s_plus, s_minus = TABLE1_VALUES[name]
    diagram = services.diagram_service.parse_pd(TABLE1[name], name=name)
    result = services.invariant_service.s_field(diagram, F2Ring())
    assert result.s == s
    assert (result.s_min, result.s_max) == (s - 1, s + 1)
    # the published Sq² refinements sit where s allows them
    assert s_plus in (result.s, result.s + 2)
    assert s_minus in (result.s - 2, result.s)


@pytest.mark.slow
def test_table1_batch(capsys):
    started = time.monotonic()
    corpus = resource("table1.pdlist")
    assert run(["batch", "--corpus", corpus, "--cmd", "s", "--field", "f2", "--threads", "1"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert [row["name"] for row in result["rows"]] == list(TABLE1_VALUES)
    assert {row["name"]: row["result"]["s"] for row in result["rows"]} == {
        name: values[0] for name, values in TABLE1_VALUES.items()
    }
    assert time.monotonic() - started < 5 * 60


@pytest.mark.slow
def test_k14n19265_integral_homology(services, k14n19265):
    hs = services.homology_service
    table = hs.integral_homology(hs.complex(k14n19265, Flavor.KHOVANOV, IntegerRing()))
    cells = {(cell.i, cell.j) for cell in table.cells if cell.rank or cell.torsion}
    assert cells == set(KH_K14N19265)
    for (i, j), (rank, torsion) in KH_K14N19265.items():
        assert (table.rank(i, j), table.torsion(i, j)) == (rank, torsion), (i, j)


@pytest.mark.slow
def test_k14n19265_s(services, k14n19265):
    invariants = services.invariant_service
    started = time.monotonic()
    assert invariants.s_field(k14n19265, F2Ring()).s == -2
    assert time.monotonic() - started < 15 * 60
    assert invariants.s_field(k14n19265, RationalRing()).s == 0


@pytest.mark.slow
def test_k14n19265_sq1(services, k14n19265):
    f2 = F2Ring()
    ops = services.operation_service
    hs = services.homology_service
    sq1 = ops.bockstein_sq1(k14n19265)
    assert hs.khovanov_block(k14n19265, f2, 0, -3).rank == 3
    assert ops.rank(sq1, k14n19265, f2, -1, -3) == 2
    assert ops.rank(sq1, k14n19265, f2, 0, -3) == 1

    invariants = services.invariant_service
    maps = hs.filtration_maps(k14n19265, f2)
    full, witness = invariants.is_full(maps, sq1, -3)
    assert full
    assert witness.q == -3
    assert len(witness.elements) == 2

    result = invariants.refined_invariants(k14n19265, f2, OperationSource(kind="sq1"))
    assert result.s == -2
    assert result.s_plus == 0


@pytest.mark.parametrize("second, s", [("3_1", -4), ("m(3_1)", 0)])
def test_trefoil_connected_sums(services, knot, second, s):
    total = services.diagram_service.connected_sum(knot("3_1"), 1, knot(second), 1)
    assert total.component_count == 1
    for field in (F2Ring(), RationalRing()):
        result = services.invariant_service.s_field(total, field)
        assert result.s == s
        assert result.s_max == result.s_min + 2


@pytest.mark.slow
def test_fourteen_crossing_connected_sum(services, knot):
    total = services.diagram_service.connected_sum(knot("7_1"), 1, knot("7_2"), 1)
    assert len(total.crossings) == 14
    started = time.monotonic()
    assert services.invariant_service.s_field(total, F2Ring()).s == -8
    assert time.monotonic() - started < 15 * 60
