"""End-to-end scenario bundles: goldens, tower wiring, demo determinism."""

import json

import pytest

from merotower.maps import ProjPoint
from merotower.scenarios import (
    GuedjDemoConfig,
    ToyDemoConfig,
    build_guedj_tower,
    golden_formulas,
    guedj_map,
    run_guedj_demo,
    run_toy_tower_demo,
    squaring_map,
)

GOLDEN_LINES = [
    "map: [z^2 : w*t + t^2 : t^2]",
    "indeterminacy: [0 : 1 : 0]",
    "lift through first blow-down, chart z_beta('z', 'beta'): [z : beta + z*beta^2 : z*beta^2]",
    "lift through first blow-down, chart t_alpha('t', 'alpha'): [t*alpha^2 : 1 + t : t]",
    "residual indeterminacy after first blow-up: chart z_beta at (0, 0)",
    "lift through both blow-downs, chart z_v('z', 'v'): [1 : v + z^2*v^2 : z^2*v^2]",
    "lift through both blow-downs, chart beta_u('beta', 'u'): [u : 1 + beta^2*u : beta^2*u]",
    "induced self-map on chart t_alpha('t', 'alpha'): (t / (1 + t), alpha^2)",
]


def test_guedj_map_basics():
    f = guedj_map()
    assert f.degree == 2
    locus = f.indeterminacy_locus()
    assert len(locus) == 1 and locus.contains(ProjPoint([0, 1, 0]))
    assert f.degree_sequence(4) == [2, 4, 8, 16]
    assert f.topological_degree(trials=5, seed=5) == 2


def test_golden_formulas_exact():
    assert golden_formulas() == GOLDEN_LINES


def test_guedj_tower_resolved_map_strings():
    bundle = build_guedj_tower()
    strings = {
        cid: bundle.lifted[cid].component_strings(bundle.atlas.charts[cid].var_names)
        for cid in ("z_v", "beta_u")
    }
    assert strings["z_v"] == ["1", "v + z^2*v^2", "z^2*v^2"]
    assert strings["beta_u"] == ["u", "1 + beta^2*u", "beta^2*u"]
    assert all(local.holomorphic for local in bundle.lifted.values())


def test_guedj_tower_projection_contracts_exceptional():
    from merotower.blowup import SurfPoint

    bundle = build_guedj_tower()
    pi1 = bundle.tower.levels[1].pi
    for chart, coords in (("z_v", (0.0, 0.7)), ("beta_u", (0.0, -0.4)), ("t_alpha", (0.0, 1j))):
        image = pi1(SurfPoint.of(chart, *coords))
        assert image.close_to(ProjPoint([0, 1, 0]))


def test_guedj_demo_bundle(tmp_path):
    config = GuedjDemoConfig(
        seed=5, samples=2048, m_values=(4, 5, 6, 7), epsilons=(0.05, 0.1), trials=5
    )
    out = tmp_path / "demo"
    summary = run_guedj_demo(out, config)
    for name in ("summary.json", "entropy.csv", "degrees.csv", "formulas.txt", "verdicts.json"):
        assert (out / name).exists(), name
    assert (out / "figures" / "entropy.png").exists()
    assert (out / "figures" / "degrees.png").exists()
    assert (out / "formulas.txt").read_text().splitlines() == GOLDEN_LINES
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["chain_preimage_disjointness"]["verdict"] == "FAILS"
    assert [0, 1] in verdicts["chain_preimage_disjointness"]["intersecting_pairs"]
    assert not verdicts["variational_hypothesis_met"]
    assert verdicts["degrees"]["d1_estimate"] == 2.0
    assert verdicts["degrees"]["topological_degree"] == 2
    assert summary["degrees"]["rows"][0] == [1, 2, 2.0]


def test_guedj_demo_deterministic(tmp_path):
    config = GuedjDemoConfig(seed=9, samples=512, m_values=(3, 4, 5), epsilons=(0.1,), trials=3)
    run_guedj_demo(tmp_path / "a", config)
    run_guedj_demo(tmp_path / "b", config)
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    assert (tmp_path / "a" / "verdicts.json").read_bytes() == (tmp_path / "b" / "verdicts.json").read_bytes()


def test_toy_demo_bundle(tmp_path):
    config = ToyDemoConfig(seed=3, depth=5, samples=1024, m_values=(2, 3, 4, 5), epsilon=0.4, probe_samples=120)
    out = tmp_path / "toy"
    summary = run_toy_tower_demo(out, config)
    for name in ("summary.json", "entropy.csv", "degrees.csv", "formulas.txt", "verdicts.json"):
        assert (out / name).exists(), name
    verdicts = summary["verdicts"]
    assert verdicts["commutation_max_discrepancy"] == 0.0
    assert verdicts["delta_closed_form_max_error"] < 1e-12
    assert summary["tower"]["levels"] == 6


def test_toy_demo_deterministic(tmp_path):
    config = ToyDemoConfig(seed=4, depth=4, samples=576, m_values=(2, 3, 4, 5), epsilon=0.4, probe_samples=60)
    run_toy_tower_demo(tmp_path / "a", config)
    run_toy_tower_demo(tmp_path / "b", config)
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()


def test_demo_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config field"):
        GuedjDemoConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError, match="unknown config field"):
        ToyDemoConfig.from_dict({"bogus": 1})


def test_squaring_map_basics():
    f = squaring_map()
    assert len(f.indeterminacy_locus()) == 0
    assert f.degree_sequence(3) == [2, 4, 8]
