import pytest

from khrefine.algebra.rings import F2Ring, IntegerRing, PrimeFieldRing, RationalRing
from khrefine.models.cube import Flavor
from khrefine.models.jobs import OperationSource
from khrefine.tests.conftest import CORPUS

pytestmark = pytest.mark.slow

F2 = F2Ring()
FIELDS = [F2, PrimeFieldRing(3), RationalRing()]
KNOTS = sorted(CORPUS) + [f"m({name})" for name in sorted(CORPUS)]
SMALL_KNOTS = [name for name in KNOTS if CORPUS[name.removeprefix("m(").removesuffix(")")].count("X[") <= 8]

# Signed s of the knots read from KnotInfo PD codes, in their chirality
KNOTINFO_S_VALUES = {
    "8_1": 0,
    "8_5": 4,
    "8_19": 6,
    "8_20": 0,
    "8_21": 2,
    "9_1": 8,
    "9_46": 0,
    "10_124": 8,
    "10_139": 8,
    "10_145": -4,
    "10_161": 6,
}


def mirror_name(name: str) -> str:
    return name[2:-1] if name.startswith("m(") else f"m({name})"


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.name)
@pytest.mark.parametrize("name", KNOTS)
def test_s_max_is_s_min_plus_two(services, knot, field, name):
    result = services.invariant_service.s_field(knot(name), field)
    assert result.s_max == result.s_min + 2
    assert result.s % 2 == 0
    assert services.invariant_service.s_field(knot(mirror_name(name)), field).s == -result.s


@pytest.mark.parametrize("name", KNOTS)
def test_refined_invariants_mirror(services, knot, name):
    invariants = services.invariant_service
    result = invariants.refined_invariants(knot(name), F2, OperationSource(kind="sq1"))
    mirrored = invariants.refined_invariants(knot(mirror_name(name)), F2, OperationSource(kind="sq1"))
    assert (mirrored.r_plus, mirrored.s_plus) == (-result.r_minus, -result.s_minus)
    assert (mirrored.r_minus, mirrored.s_minus) == (-result.r_plus, -result.s_plus)


@pytest.mark.parametrize("kind", ["sq1", "zero"])
@pytest.mark.parametrize("name", KNOTS)
def test_refined_invariants_are_sandwiched(services, knot, name, kind):
    result = services.invariant_service.refined_invariants(knot(name), F2, OperationSource(kind=kind))
    s = result.s
    assert result.r_plus in (s, s + 2)
    assert result.s_plus in (s, s + 2)
    assert result.r_minus in (s, s - 2)
    assert result.s_minus in (s, s - 2)
    if kind == "zero":
        assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (s, s, s, s)


@pytest.mark.parametrize("name", KNOTS)
def test_fullness_profile_is_monotone(services, knot, name):
    diagram = knot(name)
    maps = services.homology_service.filtration_maps(diagram, F2)
    profile = services.invariant_service.fullness_profile(maps, services.operation_service.bockstein_sq1(diagram))
    # q_values run from high to low filtration, so fullness can only switch on
    seen_half = seen_full = False
    for q in maps.q_values:
        half, full = profile[q]
        assert half or not full
        assert half or not seen_half
        assert full or not seen_full
        seen_half, seen_full = half, full


@pytest.mark.parametrize("name", KNOTS)
def test_sq1_squares_to_zero(services, knot, name):
    ops = services.operation_service
    sq1 = ops.bockstein_sq1(knot(name))
    assert ops.compose(sq1, sq1, knot(name), F2).blocks == []


@pytest.mark.parametrize("name", SMALL_KNOTS)
def test_sq1_rank_counts_order_two_torsion(services, knot, name):
    hs = services.homology_service
    diagram = knot(name)
    sq1 = services.operation_service.bockstein_sq1(diagram)
    integral = hs.integral_homology(hs.complex(diagram, Flavor.KHOVANOV, IntegerRing()))
    for cell in hs.field_homology(hs.complex(diagram, Flavor.KHOVANOV, F2)).cells:
        order_two = sum(1 for d in integral.torsion(cell.i + 1, cell.j) if d % 4 == 2)
        assert services.operation_service.rank(sq1, diagram, F2, cell.i, cell.j) == order_two, (cell.i, cell.j)


@pytest.mark.parametrize("first, second", [("3_1", "4_1"), ("3_1", "5_2"), ("m(3_1)", "5_1"), ("4_1", "6_1")])
def test_s_is_additive_under_connected_sum(services, knot, first, second):
    invariants = services.invariant_service
    total = services.diagram_service.connected_sum(knot(first), 1, knot(second), 1)
    expected = invariants.s_field(knot(first), F2).s + invariants.s_field(knot(second), F2).s
    assert invariants.s_field(total, F2).s == expected


@pytest.mark.parametrize("name, s", sorted(KNOTINFO_S_VALUES.items()))
def test_knotinfo_s(services, knot, name, s):
    invariants = services.invariant_service
    assert invariants.s_field(knot(name), F2).s == s
    assert invariants.s_field(knot(name), RationalRing()).s == s
    assert invariants.s_field(knot(f"m({name})"), F2).s == -s
