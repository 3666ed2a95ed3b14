"""Rational-map layer: evaluation, composition, degrees, fibers, chains."""

from fractions import Fraction

import numpy as np
import pytest

from merotower.maps import (
    AlgebraicPointSet,
    DegenerateMapError,
    OrbitUndefined,
    ProjPoint,
    RationalMap,
    fs_uniform_point,
    orbit,
)
from merotower.polynomials import parse_poly

ZWT = ("z", "w", "t")


def mk(*components: str) -> RationalMap:
    return RationalMap([parse_poly(c, ZWT, homogeneous=True) for c in components])


@pytest.fixture()
def guedj() -> RationalMap:
    return mk("z^2", "w*t + t^2", "t^2")


@pytest.fixture()
def squaring() -> RationalMap:
    return mk("z^2", "w^2", "t^2")


# -- construction ---------------------------------------------------------------


def test_new_map_cancels_common_factor():
    m = mk("z*t", "w*t", "t^2")
    assert m == RationalMap.identity()
    assert m.degree == 1


def test_new_map_keeps_coprime_components(guedj):
    names = ZWT
    assert [c.to_string(names) for c in guedj.components] == ["z^2", "w*t + t^2", "t^2"]


def test_new_map_rejects_proportional_components():
    with pytest.raises(DegenerateMapError):
        mk("z^2", "z^2", "z^2")


def test_new_map_rejects_nondominant():
    # Image lies on the conic zw = t^2: Jacobian determinant vanishes.
    with pytest.raises(DegenerateMapError):
        mk("z^2", "w^2", "z*w")


def test_new_map_rejects_degree_mismatch():
    with pytest.raises(ValueError, match="different degrees"):
        mk("z", "w^2", "t^2")


# -- evaluation ------------------------------------------------------------------


def test_evaluate_hand_values(guedj):
    image = guedj.evaluate(ProjPoint([1, 1, 1]))
    assert image.close_to(ProjPoint([Fraction(1, 2), 1, Fraction(1, 2)]))
    assert guedj.evaluate(ProjPoint([0, 1, 0])) is None
    fixed = guedj.evaluate(ProjPoint([1, 0, 0]))
    assert fixed.close_to(ProjPoint([1, 0, 0]))


def test_orbit_raises_with_step(guedj):
    with pytest.raises(OrbitUndefined) as info:
        orbit(guedj, ProjPoint([0, 1, 0]), 3)
    assert info.value.step == 1


# -- composition -----------------------------------------------------------------


def test_compose_with_identity(guedj):
    ident = RationalMap.identity()
    assert guedj.compose(ident) == guedj
    assert ident.compose(guedj) == guedj


def test_compose_guedj_square(guedj):
    square = guedj.compose(guedj)
    assert square.degree == 4
    assert square == mk("z^4", "w*t^3 + 2*t^4", "t^4")


def test_compose_monomial(squaring):
    assert squaring.compose(squaring) == mk("z^4", "w^4", "t^4")


def test_compose_evaluate_commute(guedj, squaring):
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 60:
        x = fs_uniform_point(rng)
        fx = guedj.evaluate(x)
        if fx is None:
            continue
        gfx = squaring.evaluate(fx)
        if gfx is None:
            continue
        combined = squaring.compose(guedj).evaluate(x)
        assert combined is not None
        assert combined.fs_distance(gfx) < 1e-8
        checked += 1


def test_degree_multiplicativity_branches():
    # No cancellation: degrees multiply exactly.
    f = mk("z^2", "w^2", "t^2")
    g = mk("z^2 + w*t", "w^2", "t^2")
    assert f.compose(g).degree == f.degree * g.degree
    # The plane involution [wt : zt : zw] squares to the identity: the common
    # factor zwt cancels and the degree collapses from 4 to 1.
    cremona = mk("w*t", "z*t", "z*w")
    assert cremona.compose(cremona).degree == 1
    assert cremona.compose(cremona) == RationalMap.identity()


# -- degree growth -----------------------------------------------------------------


def test_degree_sequences(guedj, squaring):
    assert guedj.degree_sequence(4) == [2, 4, 8, 16]
    assert RationalMap.identity().degree_sequence(3) == [1, 1, 1]
    assert squaring.degree_sequence(3) == [2, 4, 8]


def test_degree_sequence_matches_fold_direction(guedj):
    # Left fold f∘(f∘f) and right fold (f∘f)∘f agree degree by degree.
    left = guedj
    right = guedj
    for n in range(2, 5):
        left = guedj.compose(left)
        right = right.compose(guedj)
        assert left.degree == right.degree == guedj.degree_sequence(n)[-1]


def test_d1_estimates(guedj, squaring):
    assert guedj.d1_estimate(6) == 2.0
    assert RationalMap.identity().d1_estimate(4) == 1.0
    assert squaring.d1_estimate(4) == 2.0


# -- indeterminacy ------------------------------------------------------------------


def test_indeterminacy_guedj(guedj):
    locus = guedj.indeterminacy_locus()
    assert len(locus) == 1
    assert locus.contains(ProjPoint([0, 1, 0]))
    assert not locus.positive_dimensional


def test_indeterminacy_monomial_empty(squaring):
    assert len(squaring.indeterminacy_locus()) == 0


def test_indeterminacy_after_cancellation():
    m = mk("z^2", "z*w", "z*t")
    assert m == RationalMap.identity()
    assert len(m.indeterminacy_locus()) == 0


def test_indeterminacy_points_evaluate_small(guedj):
    for rec in guedj.indeterminacy_locus():
        values = rec.point.coords
        assert all(abs(c.eval_complex(values)) < 1e-10 for c in guedj.components)


# -- fibers ------------------------------------------------------------------------


def test_preimage_guedj_generic(guedj):
    fiber = guedj.preimage_points(ProjPoint([1, 1, 1]))
    clean = fiber.unflagged_points()
    assert len(clean) == 2
    expected = [ProjPoint([1, 0, 1]), ProjPoint([-1, 0, 1])]
    for e in expected:
        assert any(p.close_to(e) for p in clean)
    flagged = [r.point for r in fiber if r.via_indeterminacy]
    assert len(flagged) == 1 and flagged[0].close_to(ProjPoint([0, 1, 0]))


def test_preimage_identity():
    fiber = RationalMap.identity().preimage_points(ProjPoint([1, 2, 3]))
    assert len(fiber) == 1
    assert fiber.points[0].close_to(ProjPoint([1, 2, 3]))


def test_preimage_of_indeterminacy_point(guedj):
    fiber = guedj.preimage_points(ProjPoint([0, 1, 0]))
    assert len(fiber) == 1
    rec = fiber.records[0]
    assert rec.point.close_to(ProjPoint([0, 1, 0]))
    assert rec.via_indeterminacy


def test_preimage_numeric_target_path(guedj):
    # An irrational target forces the numeric elimination path.
    start = ProjPoint([np.sqrt(2.0), 1.0, np.pi / 3])
    target = guedj.evaluate(start)
    assert target.rational_coords() is None
    fiber = guedj.preimage_points(target)
    assert any(p.close_to(start, 1e-6) for p in fiber.unflagged_points())
    for p in fiber.unflagged_points():
        assert guedj.evaluate(p).fs_distance(target) < 1e-8


def test_preimage_points_verify(guedj):
    rng = np.random.default_rng(77)
    for _ in range(5):
        target = ProjPoint(
            [Fraction(int(rng.integers(-10, 11)), int(rng.integers(1, 8))) for _ in range(3)]
        )
        fiber = guedj.preimage_points(target)
        for p in fiber.unflagged_points():
            assert guedj.evaluate(p).fs_distance(target) < 1e-8


def test_topological_degrees(guedj, squaring):
    assert guedj.topological_degree(trials=5, seed=41) == 2
    assert RationalMap.identity().topological_degree(trials=5, seed=41) == 1
    # Bezout-style oracle for the squaring map: two choices of square root
    # per affine coordinate gives 2 x 2 fiber points.
    assert squaring.topological_degree(trials=5, seed=41) == 4


# -- chains and disjointness ----------------------------------------------------------


def test_backward_chain_trivial_cases(guedj):
    base = AlgebraicPointSet()
    base.add(ProjPoint([0, 1, 0]))
    same = guedj.backward_chain_set(base, 0)
    assert len(same) == 1
    ident = RationalMap.identity()
    pt = AlgebraicPointSet()
    pt.add(ProjPoint([1, 5, 7]))
    assert ident.backward_chain_set(pt, 5).points[0].close_to(ProjPoint([1, 5, 7]))


def test_backward_chain_guedj_indeterminacy(guedj):
    base = AlgebraicPointSet()
    base.add(ProjPoint([0, 1, 0]))
    once = guedj.backward_chain_set(base, 1)
    assert len(once) == 1
    assert once.points[0].close_to(ProjPoint([0, 1, 0]))


def test_disjointness_guedj_fails(guedj):
    report = guedj.disjointness_check(2)
    assert report.verdict == "FAILS"
    assert (0, 1) in report.intersecting_pairs


def test_disjointness_holomorphic_holds(squaring):
    assert squaring.disjointness_check(3).verdict == "HOLDS"
    swapped = mk("w^2", "z^2", "t^2")
    assert swapped.disjointness_check(2).verdict == "HOLDS"


# -- serialization ----------------------------------------------------------------------


def test_map_json_roundtrip(guedj):
    payload = guedj.to_json()
    assert payload["components"] == ["z^2", "w*t + t^2", "t^2"]
    assert RationalMap.from_json(payload) == guedj


def test_map_json_error_names_field():
    with pytest.raises(ValueError, match="component 1"):
        RationalMap.from_json({"dim": 2, "components": ["z^2", "q^2", "t^2"]})
    with pytest.raises(ValueError, match="dim"):
        RationalMap.from_json({"components": ["z", "w", "t"]})


# -- additional coverage: multi-point loci, numeric-path chains -----------------


def test_indeterminacy_three_coordinate_points():
    # The plane involution [wt : zt : zw] is undefined exactly at the three
    # coordinate points; the pairwise components share factors, so this
    # exercises the gcd-splitting branch of the locus solver.
    crem = mk("w*t", "z*t", "z*w")
    locus = crem.indeterminacy_locus()
    assert len(locus) == 3
    for coords in ([1, 0, 0], [0, 1, 0], [0, 0, 1]):
        assert locus.contains(ProjPoint(coords))
    assert not locus.positive_dimensional


def test_backward_chain_through_irrational_points(guedj):
    # Preimages of [2:1:1] are irrational, so the second chain step must take
    # the numeric elimination path; every unflagged point has to map forward
    # onto the target in two steps.
    start = AlgebraicPointSet()
    target = ProjPoint([2, 1, 1])
    start.add(target)
    depth1 = guedj.backward_chain_set(start, 1)
    assert len(depth1.unflagged_points()) == 2
    depth2 = guedj.backward_chain_set(start, 2)
    clean = depth2.unflagged_points()
    assert len(clean) == 4
    for p in clean:
        image = guedj.evaluate(guedj.evaluate(p))
        assert image.fs_distance(target) < 1e-8
    flagged = [r.point for r in depth2 if r.via_indeterminacy]
    assert len(flagged) == 1 and flagged[0].close_to(ProjPoint([0, 1, 0]))


def test_identity_preimage_of_numeric_target():
    ident = RationalMap.identity()
    target = ProjPoint([np.pi, 1.0, np.exp(1.0)])
    fiber = ident.preimage_points(target)
    assert len(fiber) == 1
    assert fiber.points[0].close_to(target)
