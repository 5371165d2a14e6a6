import json

import pydantic
import pytest
import yaml

from khrefine.algebra.rings import F2Ring, IntegerRing, PrimeFieldRing, RationalRing
from khrefine.errors import InvalidMoveError
from khrefine.models.cube import Flavor
from khrefine.models.diagram import PlanarDiagram
from khrefine.models.jobs import OperationSource
from khrefine.models.moves import Movie
from khrefine.tests.conftest import EMPTY, UNKNOT, UNLINK_2, resource

F2 = F2Ring()
Q = RationalRing()


def load_movie(name: str) -> Movie:
    with open(resource("movies", name), encoding='utf-8') as f:
        data = yaml.safe_load(f) if name.endswith(".yaml") else json.load(f)
    return Movie.parse_moves(data)


@pytest.mark.parametrize("flavor", list(Flavor), ids=lambda f: f.value)
def test_closed_surfaces(services, parse, flavor):
    cobordisms = services.cobordism_service
    empty = parse(EMPTY)
    sphere = cobordisms.evaluate_movie(empty, load_movie("sphere.json"), flavor, Q)
    assert sphere.chi == 2
    assert sphere.evaluation == 0
    torus = cobordisms.evaluate_movie(empty, load_movie("torus.json"), flavor, Q)
    assert torus.chi == 0
    assert torus.evaluation == 2
    assert torus.chain_map and torus.filtered
    assert [step.move for step in torus.steps] == ["cup", "saddle", "saddle", "cap"]
    assert torus.steps[1].target == "PD[Loop[1],Loop[2]]"
    assert cobordisms.evaluate_movie(empty, load_movie("torus.json"), flavor, F2).evaluation == 0


def test_empty_movie_is_identity(services, knot):
    cobordisms = services.cobordism_service
    trefoil = knot("3_1")
    identity = cobordisms.compose_movie(trefoil, Movie(), Flavor.BAR_NATAN, Q)
    assert identity.chi == 0
    assert identity.target.diagram == trefoil
    complex_ = identity.source
    for h in complex_.degrees:
        assert identity.matrix(h).to_dense() == [
            [int(r == c) for c in range(complex_.dimension(h))] for r in range(complex_.dimension(h))
        ]
    assert cobordisms.evaluation(identity) is None


def test_cup_and_cap(services, knot):
    cobordisms = services.cobordism_service
    trefoil = knot("3_1")
    cup = cobordisms.cup_map(trefoil, Flavor.KHOVANOV, Q)
    assert cup.chi == 1
    assert cobordisms.is_chain_map(cup)
    assert cobordisms.filtration_violations(cup) == []
    for h, matrix in cup.matrices.items():
        assert matrix.nnz() == cup.source.dimension(h)
        for r, c, _ in matrix.entries():
            assert cup.target.quantum_gradings(h)[c] == cup.source.quantum_gradings(h)[r] + 1
    assert cobordisms.induced_ranks(cup) == {-3: 1, -2: 1, -1: 0, 0: 2}

    cap = cobordisms.cap_map(cup.target.diagram, 7, Flavor.KHOVANOV, Q)
    assert cap.target.diagram.crossings == trefoil.crossings
    assert cobordisms.is_chain_map(cap)
    # Cap after cup is zero: the counit vanishes on x_+
    assert all(m.is_zero() for m in cobordisms.compose(cup, cap).matrices.values())

    with pytest.raises(InvalidMoveError):
        cobordisms.cap_map(trefoil, 3, Flavor.KHOVANOV, Q)
    with pytest.raises(InvalidMoveError):
        cobordisms.compose(cup, cup)


def test_saddle_matrices(services, parse):
    cobordisms = services.cobordism_service
    merge = cobordisms.saddle_map(parse(UNLINK_2), 1, 2, Flavor.KHOVANOV, Q)
    assert merge.chi == -1
    assert merge.matrix(0).to_dense() == [[1, 0], [0, 1], [0, 1], [0, 0]]
    split = cobordisms.saddle_map(parse(UNKNOT), 1, 1, Flavor.KHOVANOV, Q)
    assert split.matrix(0).to_dense() == [[0, 1, 1, 0], [0, 0, 0, 1]]
    bn_split = cobordisms.saddle_map(parse(UNKNOT), 1, 1, Flavor.BAR_NATAN, Q)
    assert bn_split.matrix(0).to_dense() == [[-1, 1, 1, 0], [0, 0, 0, 1]]
    assert cobordisms.is_filtered(bn_split)


@pytest.mark.parametrize("flavor", list(Flavor), ids=lambda f: f.value)
@pytest.mark.parametrize("ring", [F2, PrimeFieldRing(3), IntegerRing()], ids=lambda r: r.name)
def test_trefoil_saddles_are_filtered_chain_maps(services, knot, flavor, ring):
    cobordisms = services.cobordism_service
    trefoil = knot("3_1")
    sites = services.diagram_service.saddle_sites(trefoil)
    assert sites
    for e1, e2 in sites:
        saddle = cobordisms.saddle_map(trefoil, e1, e2, flavor, ring)
        assert cobordisms.is_chain_map(saddle), (e1, e2)
        assert cobordisms.is_filtered(saddle), (e1, e2)


def test_tube(services, knot):
    cobordisms = services.cobordism_service
    trefoil = knot("3_1")
    movie = load_movie("tube_3_1.yaml")
    result = cobordisms.evaluate_movie(trefoil, movie, Flavor.BAR_NATAN, Q)
    assert result.chi == 0
    assert result.chain_map and result.filtered
    assert result.target == trefoil.to_pd_text()
    assert result.induced_ranks[0] == 2
    tube = cobordisms.compose_movie(trefoil, movie, Flavor.BAR_NATAN, Q)
    assert tube.target.diagram.crossings == trefoil.crossings
    assert tube.target.diagram.loops == ()


def saddle_sites_of_kind(services, diagram, kind):
    """Saddle sites that split one component in two, or merge two into one."""
    change = 1 if kind == "split" else -1
    out = []
    for e1, e2 in services.diagram_service.saddle_sites(diagram):
        target = services.diagram_service.saddle(diagram, e1, e2).target
        if target.component_count == diagram.component_count + change:
            out.append((e1, e2))
    return out


@pytest.mark.parametrize("kind", ["split", "merge"])
@pytest.mark.parametrize("name", ["3_1", pytest.param("5_2", marks=pytest.mark.slow)])
def test_sq1_commutes_with_saddles(services, knot, name, kind):
    cobordisms = services.cobordism_service
    ops = services.operation_service
    source = knot(name)
    if kind == "merge":
        # the knot next to a distant unknot, banded back together
        source = services.diagram_service.cup(source).target
    sites = saddle_sites_of_kind(services, source, kind)
    assert sites
    sq1_source = ops.bockstein_sq1(source)
    complex_ = services.homology_service.complex(source, Flavor.KHOVANOV, F2)
    j_min, j_max = complex_.j_range
    for e1, e2 in sites:
        saddle = cobordisms.saddle_map(source, e1, e2, Flavor.KHOVANOV, F2)
        target = saddle.target.diagram
        sq1_target = ops.bockstein_sq1(target)
        for h in complex_.degrees:
            for j in range(j_min, j_max + 1, 2):
                left = ops.block_matrix(sq1_source, source, F2, h, j) @ cobordisms.induced_block(saddle, h + 1, j)
                right = cobordisms.induced_block(saddle, h, j) @ ops.block_matrix(sq1_target, target, F2, h, j - 1)
                assert left == right, (e1, e2, h, j)


def genus_one_movies(services, diagram, limit=3) -> list[tuple[Movie, PlanarDiagram]]:
    """Split the knot with one band and rejoin it with another: movies and the knots they end on."""
    out = []
    for split in saddle_sites_of_kind(services, diagram, "split"):
        link = services.diagram_service.saddle(diagram, *split).target
        for merge in saddle_sites_of_kind(services, link, "merge"):
            movie = Movie.parse_moves([{"move": "saddle", "edges": list(split)}, {"move": "saddle", "edges": list(merge)}])
            out.append((movie, services.diagram_service.saddle(link, *merge).target))
            if len(out) == limit:
                return out
    return out


@pytest.mark.parametrize("name", ["3_1", "m(3_1)", pytest.param("5_2", marks=pytest.mark.slow)])
def test_invariants_bound_genus_of_band_movies(services, knot, name):
    cobordisms = services.cobordism_service
    invariants = services.invariant_service
    source = knot(name)
    sq1 = OperationSource(kind="sq1")
    before = invariants.refined_invariants(source, F2, sq1)
    movies = genus_one_movies(services, source)
    assert movies
    for movie, target in movies:
        result = cobordisms.evaluate_movie(source, movie, Flavor.BAR_NATAN, F2)
        assert result.target == target.to_pd_text()
        assert result.chi == movie.chi == -2
        assert result.chain_map and result.filtered
        # a connected cobordism between knots is a quasi-isomorphism
        assert result.induced_ranks[0] == 2
        assert target.is_knot
        for field in (F2, Q):
            s_before = invariants.s_field(source, field).s
            s_after = invariants.s_field(target, field).s
            assert abs(s_before - s_after) <= -movie.chi, (movie, field.name)
        after = invariants.refined_invariants(target, F2, sq1)
        for attribute in ("r_plus", "s_plus", "r_minus", "s_minus"):
            assert abs(getattr(before, attribute) - getattr(after, attribute)) <= -movie.chi, (movie, attribute)


def test_induced_map_preconditions(services, knot):
    cobordisms = services.cobordism_service
    cup_z = cobordisms.cup_map(knot("3_1"), Flavor.KHOVANOV, IntegerRing())
    with pytest.raises(ValueError):
        cobordisms.induced_rank(cup_z, 0)
    cup_bn = cobordisms.cup_map(knot("3_1"), Flavor.BAR_NATAN, F2)
    with pytest.raises(ValueError):
        cobordisms.induced_block(cup_bn, 0, -1)


def test_movie_parsing():
    movie = Movie.parse_moves([{"move": "cup"}, {"move": "saddle", "edges": [1, 2]}, {"move": "cap", "loop": 1}])
    assert movie.chi == 1
    assert Movie.parse_moves({"moves": []}).moves == []
    with pytest.raises(pydantic.ValidationError):
        Movie.parse_moves([{"move": "twist"}])
    with pytest.raises(pydantic.ValidationError):
        Movie.parse_moves([{"move": "cap"}])
