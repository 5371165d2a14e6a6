import pytest

from khrefine.algebra.rings import F2Ring, PrimeFieldRing, RationalRing
from khrefine.errors import NotAKnotError, ParityError, PreconditionError, UnsupportedModulus
from khrefine.models.jobs import OperationSource
from khrefine.tests.conftest import UNKNOT, UNLINK_2

F2 = F2Ring()
FIELDS = [F2, PrimeFieldRing(3), RationalRing()]

S_VALUES = {
    "3_1": -2,
    "4_1": 0,
    "5_1": -4,
    "5_2": -2,
    "6_1": 0,
    "6_2": -2,
    "6_3": 0,
    "7_1": -6,
    "7_2": -2,
    "7_3": 4,
    "9_42": 0,
}


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.name)
@pytest.mark.parametrize("name, s", sorted(S_VALUES.items()))
def test_s(services, knot, field, name, s):
    result = services.invariant_service.s_field(knot(name), field)
    assert result.s == s
    assert (result.s_min, result.s_max) == (s - 1, s + 1)
    assert services.invariant_service.s_field(knot(f"m({name})"), field).s == -s


def test_unknot_s(services, parse):
    result = services.invariant_service.s_field(parse(UNKNOT), F2)
    assert (result.s_min, result.s_max, result.s) == (-1, 1, 0)
    assert result.inclusion_ranks == {3: 0, 1: 1, -1: 2, -3: 2}
    with pytest.raises(NotAKnotError):
        services.invariant_service.s_field(parse(UNLINK_2), F2)


def test_unknot_integral_s(services, parse):
    invariants = services.invariant_service
    for m in (1, 2, 3):
        result = invariants.s_integral(parse(UNKNOT), m)
        assert result.s_min_plus_one == 0
        assert result.s_max_minus_one == 0
    with pytest.raises(UnsupportedModulus):
        invariants.s_integral(parse(UNKNOT), 0)
    with pytest.raises(UnsupportedModulus):
        invariants.s_integral(parse(UNKNOT), -2)
    with pytest.raises(NotAKnotError):
        invariants.s_integral(parse(UNLINK_2), 2)


@pytest.mark.parametrize("name", ["3_1", "m(3_1)", "4_1", "5_2"])
def test_integral_s_against_rational(services, knot, name):
    invariants = services.invariant_service
    rational = invariants.s_field(knot(name), RationalRing())
    assert invariants.s_integral(knot(name), 1).s_min <= rational.s_min
    for m in (1, 2, 3):
        result = invariants.s_integral(knot(name), m)
        assert result.s_max <= rational.s_max
        assert result.s_min <= result.s_max


@pytest.mark.parametrize("kind", ["zero", "sq1"])
def test_unknot_refined(services, parse, kind):
    result = services.invariant_service.refined_invariants(parse(UNKNOT), F2, OperationSource(kind=kind))
    assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (0, 0, 0, 0)
    assert result.operation == kind


def test_trefoil_sq1(services, knot):
    result = services.invariant_service.refined_invariants(knot("3_1"), F2, OperationSource(kind="sq1"))
    assert result.s == -2
    assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (-2, -2, -2, -2)
    assert result.bounds.r_plus_forced == -2
    assert result.bounds.s_plus_forced == -2
    assert set(result.witnesses) == {"r_plus", "s_plus", "r_minus", "s_minus"}


def test_refine_9_42(services, knot, operation_files):
    path, mirror_path = operation_files
    source = OperationSource(kind="file", path=path, mirror_path=mirror_path)
    result = services.invariant_service.refined_invariants(knot("9_42"), F2, source)
    assert (result.s_min, result.s_max, result.s) == (-1, 1, 0)
    assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (0, 2, 0, 0)
    assert result.operation == "fake"
    assert result.bounds.r_plus == [0, 2]
    assert result.bounds.r_plus_forced == 0
    assert result.bounds.s_plus_forced is None

    witness = result.witnesses["s_plus"]
    assert (witness.q, witness.kind) == (-1, "full")
    assert len(witness.elements) == 2
    assert any(element.a_tilde is not None for element in witness.elements)
    assert result.witnesses["r_plus"].q == -1


def test_refine_preconditions(services, knot, parse, operation_files):
    invariants = services.invariant_service
    with pytest.raises(PreconditionError):
        invariants.refined_invariants(knot("3_1"), PrimeFieldRing(3), OperationSource(kind="sq1"))
    with pytest.raises(NotAKnotError):
        invariants.refined_invariants(parse(UNLINK_2), F2, OperationSource(kind="zero"))
    with pytest.raises(PreconditionError):
        invariants.refined_invariants(knot("9_42"), F2, OperationSource(kind="file", path=operation_files[0]))


def test_fullness_on_unknot(services, parse):
    invariants = services.invariant_service
    unknot = parse(UNKNOT)
    maps = services.homology_service.filtration_maps(unknot, F2)
    zero = services.operation_service.zero_operation(unknot, F2)

    assert invariants.is_half_full(maps, zero, 1) == (False, None)
    found, witness = invariants.is_half_full(maps, zero, -1)
    assert found
    assert (witness.q, witness.kind) == (-1, "half_full")
    assert witness.elements[0].a_tilde is None

    assert invariants.is_full(maps, zero, -1) == (False, None)
    found, witness = invariants.is_full(maps, zero, -3)
    assert found
    assert len(witness.elements) == 2

    with pytest.raises(ParityError):
        invariants.is_full(maps, zero, 2)
    with pytest.raises(ParityError):
        invariants.is_half_full(maps, zero, 0)


@pytest.mark.parametrize("name", ["3_1", "m(3_1)", "5_2", "6_2"])
def test_fullness_is_monotone(services, knot, name):
    diagram = knot(name)
    maps = services.homology_service.filtration_maps(diagram, F2)
    for operation in (
        services.operation_service.bockstein_sq1(diagram),
        services.operation_service.zero_operation(diagram, F2, degree=2),
    ):
        profile = services.invariant_service.fullness_profile(maps, operation)
        seen_half = seen_full = False
        for q in maps.q_values:
            half, full = profile[q]
            assert half or not full
            assert half or not seen_half
            assert full or not seen_full
            seen_half, seen_full = half, full


@pytest.mark.parametrize("name", ["3_1", "m(3_1)", "5_2", "m(6_2)", "7_3"])
def test_refined_invariants_are_sandwiched(services, knot, name):
    for kind in ("sq1", "zero"):
        result = services.invariant_service.refined_invariants(knot(name), F2, OperationSource(kind=kind))
        s = result.s
        assert result.r_plus in (s, s + 2)
        assert result.s_plus in (s, s + 2)
        assert result.r_minus in (s, s - 2)
        assert result.s_minus in (s, s - 2)
        if kind == "zero":
            assert (result.r_plus, result.s_plus, result.r_minus, result.s_minus) == (s, s, s, s)
        forced = result.bounds
        if forced.r_plus_forced is not None:
            assert result.r_plus == forced.r_plus_forced
        if forced.s_plus_forced is not None:
            assert result.s_plus == forced.s_plus_forced
