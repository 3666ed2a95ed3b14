"""Entropy estimator: Bowen distances, greedy packings, growth-rate fits."""

import math

import numpy as np
import pytest

from merotower.entropy import (
    BowenParams,
    bowen_dist,
    build_orbits,
    entropy_rate,
    entropy_report,
    fit_growth_rate,
    greedy_separated_set,
    separated_lift_check,
    verify_maximal,
    verify_separated,
)
from merotower.maps import OrbitUndefined, ProjPoint, RationalMap
from merotower.scenarios import build_guedj_tower, build_toy_tower, guedj_map
from merotower.systems import (
    CircleDoublingSystem,
    ExceptionalCircleSystem,
    PlaneMapSystem,
    TorusDoublingSystem,
    TowerShiftSystem,
)

LOG2 = math.log(2.0)


def brute_force_greedy(ensemble, params, order):
    """Independent quadratic-time packing in an arbitrary feed order."""
    emb = ensemble.embeddings
    system = ensemble.system
    kept = []
    for idx in order:
        ok = True
        for j in kept:
            d = 0.0
            for l in range(params.m):
                d = max(d, float(system.dist_embedded(emb[idx, l], emb[j, l], l)))
                if d >= params.epsilon:
                    break
            if d < params.epsilon:
                ok = False
                break
        if ok:
            kept.append(idx)
    return kept


# -- Bowen distance ------------------------------------------------------------


def test_bowen_zero_on_diagonal():
    sys = CircleDoublingSystem()
    x = complex(np.cos(0.7), np.sin(0.7))
    assert bowen_dist(sys, x, x, 5) == 0.0


def test_bowen_doubling_hand_orbit():
    # Oracle: walk both orbits explicitly and take the max step distance.
    sys = CircleDoublingSystem()
    x = 1.0 + 0j
    y = complex(np.cos(2 * np.pi / 8), np.sin(2 * np.pi / 8))
    expected = 0.0
    a, b = x, y
    for _ in range(3):
        expected = max(expected, sys.dist(a, b))
        a, b = a * a, b * b
    got = bowen_dist(sys, x, y, 3)
    assert got == pytest.approx(expected)
    # The angle gap doubles each step: 1/8 -> 1/4 -> 1/2 of the circle, so the
    # last step is antipodal and the normalized-angle metric tops out at 1/2.
    assert got == pytest.approx(0.5, abs=1e-12)


def test_bowen_m1_is_plain_distance():
    sys = CircleDoublingSystem()
    x, y = 1.0 + 0j, 1j
    assert bowen_dist(sys, x, y, 1) == pytest.approx(sys.dist(x, y))


def test_bowen_reports_offending_step():
    sys = PlaneMapSystem(guedj_map())
    # Starting at the indeterminacy point, the first iterate does not exist.
    with pytest.raises(OrbitUndefined) as info:
        bowen_dist(sys, ProjPoint([0, 1, 0]), ProjPoint([1, 1, 1]), 3)
    assert info.value.step == 1


# -- greedy packing --------------------------------------------------------------


def test_greedy_single_point_when_radius_huge():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(256, seed=1)
    ens = build_orbits(sys, pts, 4)
    kept = greedy_separated_set(ens, BowenParams(4, 10.0))
    assert len(kept) == 1


def test_greedy_keeps_all_when_radius_tiny():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(512, seed=2)
    ens = build_orbits(sys, pts, 3)
    kept = greedy_separated_set(ens, BowenParams(3, 1e-15))
    assert len(kept) == 512


def test_greedy_matches_bruteforce_same_order():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(1024, seed=3)
    ens = build_orbits(sys, pts, 6)
    params = BowenParams(6, 0.03)
    kept = greedy_separated_set(ens, params)
    oracle = brute_force_greedy(ens, params, list(range(1024)))
    assert kept == oracle


def test_greedy_count_matches_independent_oracles():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(4096, seed=5)
    ens = build_orbits(sys, pts, 8)
    params = BowenParams(8, 0.05)
    kept = greedy_separated_set(ens, params)
    # Exhaustive quadratic packing in the reversed feed order.
    reverse = brute_force_greedy(ens, params, list(range(4095, -1, -1)))
    assert abs(len(kept) - len(reverse)) <= 0.10 * len(reverse)
    # Random orders pack less densely (sequential-packing effect), but stay
    # within the same growth class.
    rng = np.random.default_rng(11)
    shuffled = brute_force_greedy(ens, params, list(rng.permutation(4096)))
    assert abs(len(kept) - len(shuffled)) <= 0.35 * len(shuffled)
    assert verify_separated(ens, kept, params)
    assert verify_maximal(ens, kept, params)


def test_greedy_count_matches_arc_counting_oracle():
    # With a dense enough sample the packing matches the arc-counting bound:
    # points separate once some angle-gap iterate reaches eps, i.e. at gap
    # eps*2^(1-m) of a turn, giving about 2^(m-1)/eps points on the circle.
    sys = CircleDoublingSystem()
    pts = sys.sample_points(2**14, seed=5)
    ens = build_orbits(sys, pts, 8)
    params = BowenParams(8, 0.05)
    kept = greedy_separated_set(ens, params)
    theory = 2 ** (params.m - 1) / params.epsilon
    assert abs(len(kept) - theory) <= 0.10 * theory


def test_greedy_feed_first_is_kept_entirely():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(2048, seed=7)
    ens = build_orbits(sys, pts, 6)
    short = greedy_separated_set(ens, BowenParams(4, 0.04))
    longer = greedy_separated_set(ens, BowenParams(6, 0.04), feed_first=short)
    assert set(short) <= set(longer)
    assert len(longer) >= len(short)


# -- growth-rate fit ---------------------------------------------------------------


def test_fit_recovers_exact_doubling_law():
    counts = {m: 7 * 2**m for m in range(4, 11)}
    fit = fit_growth_rate(counts, admissible=10**9, epsilon=0.01)
    assert fit.slope == pytest.approx(LOG2, abs=1e-9)
    assert not fit.saturated


def test_fit_excludes_saturated_tail():
    counts = {4: 100, 5: 200, 6: 400, 7: 512, 8: 512}
    fit = fit_growth_rate(counts, admissible=2048, epsilon=0.1)
    assert fit.m_used == [4, 5, 6]
    assert fit.saturated and fit.lower_bound_only
    assert fit.slope == pytest.approx(LOG2, abs=1e-9)


def test_fit_needs_two_usable_points():
    counts = {4: 900, 5: 1000, 6: 1000}
    fit = fit_growth_rate(counts, admissible=1000, epsilon=0.1)
    assert fit.slope is None
    assert fit.saturated


# -- rates on concrete systems --------------------------------------------------------


def test_circle_doubling_rate_hits_log2():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(2**14, seed=20)
    fit = entropy_rate(sys, pts, range(6, 13), 0.02)
    assert fit.slope is not None
    assert 0.62 <= fit.slope <= 0.76


def test_identity_map_rate_is_flat():
    sys = PlaneMapSystem(RationalMap.identity(), name="identity")
    pts = sys.sample_points(4096, seed=21)
    fit = entropy_rate(sys, pts, range(2, 7), 0.3)
    assert fit.slope is not None
    assert abs(fit.slope) < 0.02


def test_torus_squaring_rate_near_two_log2():
    sys = TorusDoublingSystem()
    pts = sys.sample_points(4096, seed=22)
    fit = entropy_rate(sys, pts, range(2, 7), 0.5)
    assert fit.slope is not None
    assert abs(fit.slope - 2 * LOG2) < 0.15


def test_exceptional_circle_system_matches_doubling(tmp_path):
    bundle = build_guedj_tower()
    sys = ExceptionalCircleSystem(bundle.induced)
    pts = sys.sample_points(64, seed=3)
    # One honest induced-map step doubles the angle.
    for p in pts[:8]:
        q = sys.step(p)
        expected = p.coords[1] ** 2
        assert abs(q.coords[1] - expected) < 1e-12
    ens = build_orbits(sys, pts, 5)
    assert ens.discards == 0


def test_entropy_report_asserts_monotonicity():
    sys = CircleDoublingSystem()
    pts = sys.sample_points(4096, seed=30)
    report = entropy_report(sys, pts, range(4, 9), [0.02, 0.05])
    for eps in report.epsilons:
        table = report.counts[eps]
        ms = sorted(table)
        assert all(table[a] <= table[b] for a, b in zip(ms, ms[1:]))
    assert all(
        report.counts[0.05][m] <= report.counts[0.02][m] for m in report.m_values
    )
    text = report.csv_text()
    assert text.splitlines()[0] == "m,epsilon,separated_count,discards"
    payload = report.to_json()
    assert payload["sample_size"] == 4096


# -- lifiting separated sets ------------------------------------------------------------


def test_lift_check_identity_tower_preserves():
    tower = build_toy_tower(depth=3)
    rng = np.random.default_rng(40)
    from merotower.maps import fs_uniform_point

    base = [fs_uniform_point(rng) for _ in range(64)]
    report = separated_lift_check(tower, base, BowenParams(3, 0.1))
    assert report.cardinality_preserved
    assert report.violations == []


def test_lift_check_guedj_tower_preserves():
    bundle = build_guedj_tower()
    rng = np.random.default_rng(41)
    from merotower.maps import fs_uniform_point

    base = [fs_uniform_point(rng) for _ in range(48)]
    report = separated_lift_check(bundle.tower, base, BowenParams(3, 0.08))
    assert report.downstairs_count >= 2
    assert report.cardinality_preserved
    assert report.violations == []


def test_lift_check_singleton():
    tower = build_toy_tower(depth=2)
    report = separated_lift_check(tower, [ProjPoint([1, 2, 3])], BowenParams(2, 0.3))
    assert report.downstairs_count == 1
    assert report.cardinality_preserved


# -- tower shift system ------------------------------------------------------------------


def test_shift_system_distances_match_tower_delta():
    tower = build_toy_tower(depth=4)
    sys = TowerShiftSystem(tower)
    rng = np.random.default_rng(50)
    from merotower.maps import fs_uniform_point

    for _ in range(20):
        x = tower.lift_point(fs_uniform_point(rng))
        y = tower.lift_point(fs_uniform_point(rng))
        emb_d = float(sys.dist_embedded(sys.embed(x), sys.embed(y), 0))
        assert emb_d == pytest.approx(tower.delta(x, y), rel=1e-10)


def test_shift_system_orbits_consume_depth():
    tower = build_toy_tower(depth=4)
    sys = TowerShiftSystem(tower)
    rng = np.random.default_rng(51)
    from merotower.maps import fs_uniform_point

    pts = sys.lift_samples([fs_uniform_point(rng) for _ in range(16)])
    ens = build_orbits(sys, pts, 4)
    assert ens.discards == 0
    with pytest.raises(OrbitUndefined):
        x = pts[0]
        for _ in range(5):
            x = sys.step(x)
