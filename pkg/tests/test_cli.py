"""Command-line surface: outputs, exit codes, seeds, determinism."""

import json

import pytest

from merotower.cli import main

GUEDJ_JSON = {"dim": 2, "degree": 2, "components": ["z^2", "w*t + t^2", "t^2"]}
IDENTITY_JSON = {"dim": 2, "degree": 1, "components": ["z", "w", "t"]}
SQUARING_JSON = {"dim": 2, "degree": 2, "components": ["z^2", "w^2", "t^2"]}


@pytest.fixture()
def guedj_file(tmp_path):
    path = tmp_path / "guedj.json"
    path.write_text(json.dumps(GUEDJ_JSON))
    return str(path)


def test_degrees_guedj_rows(guedj_file, capsys):
    assert main(["degrees", guedj_file, "--n", "4", "--seed", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,degree,ratio"
    assert out[1:5] == ["1,2,2", "2,4,2", "3,8,2", "4,16,2"]
    assert "# d1_estimate=2" in out
    assert "# topological_degree=2" in out


def test_degrees_identity_all_ones(tmp_path, capsys):
    path = tmp_path / "id.json"
    path.write_text(json.dumps(IDENTITY_JSON))
    assert main(["degrees", str(path), "--n", "3", "--seed", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1:4] == ["1,1,1", "2,1,1", "3,1,1"]


def test_degrees_malformed_json_exit2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "components": ["z^2", "q^2", "t^2"]}')
    assert main(["degrees", str(path), "--seed", "1"]) == 2
    err = capsys.readouterr().err
    assert "component 1" in err


def test_degrees_requires_seed(guedj_file, capsys, monkeypatch):
    monkeypatch.delenv("MEROTOWER_SEED", raising=False)
    assert main(["degrees", guedj_file]) == 2
    assert "seed" in capsys.readouterr().err


def test_seed_env_fallback(guedj_file, capsys, monkeypatch):
    monkeypatch.setenv("MEROTOWER_SEED", "11")
    assert main(["degrees", guedj_file, "--n", "2"]) == 0


def test_indeterminacy_guedj(guedj_file, capsys):
    assert main(["indeterminacy", guedj_file]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["points"]) == 1
    coords = payload["points"][0]
    assert coords[0] == [0.0, 0.0] and coords[1] == [1.0, 0.0] and coords[2] == [0.0, 0.0]
    assert payload["positive_dimensional_part"] is False


def test_indeterminacy_monomial_empty(tmp_path, capsys):
    path = tmp_path / "sq.json"
    path.write_text(json.dumps(SQUARING_JSON))
    assert main(["indeterminacy", str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["points"] == []


def test_indeterminacy_wrong_dimension_exit3(tmp_path, capsys):
    path = tmp_path / "p1.json"
    path.write_text(json.dumps({"dim": 1, "components": ["x^2", "y^2"]}))
    assert main(["indeterminacy", str(path)]) == 3
    assert "P^2" in capsys.readouterr().err


def test_entropy_torus_small(tmp_path, capsys):
    out = tmp_path / "report"
    code = main(
        [
            "entropy",
            "torus-squaring",
            "--m-range",
            "2:5",
            "--eps",
            "0.4,0.6",
            "--samples",
            "1024",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert (out / "entropy.csv").exists()
    assert (out / "entropy.json").exists()
    assert (out / "entropy.png").exists()
    payload = json.loads((out / "entropy.json").read_text())
    assert "saturation_warning" in payload
    header = (out / "entropy.csv").read_text().splitlines()[0]
    assert header == "m,epsilon,separated_count,discards"


def test_entropy_zero_samples_exit2(capsys):
    code = main(
        ["entropy", "torus-squaring", "--m-range", "2:5", "--eps", "0.4", "--samples", "0", "--seed", "1", "--out", "x"]
    )
    assert code == 2


def test_entropy_unknown_system_exit2(capsys):
    code = main(
        ["entropy", "no-such-thing", "--m-range", "2:5", "--eps", "0.4", "--samples", "8", "--seed", "1", "--out", "x"]
    )
    assert code == 2
    assert "unknown system" in capsys.readouterr().err


def test_entropy_map_file_system(tmp_path, guedj_file):
    out = tmp_path / "maprep"
    code = main(
        [
            "entropy",
            guedj_file,
            "--m-range",
            "2:5",
            "--eps",
            "0.5",
            "--samples",
            "256",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads((out / "entropy.json").read_text())
    assert payload["system"] == "guedj"


def test_entropy_tower_descriptor(tmp_path):
    desc = tmp_path / "tower.json"
    desc.write_text(json.dumps({"type": "identity", "depth": 4, "map": SQUARING_JSON}))
    out = tmp_path / "towrep"
    code = main(
        [
            "entropy",
            f"tower:{desc}",
            "--m-range",
            "2:5",
            "--eps",
            "0.8",
            "--samples",
            "512",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads((out / "entropy.json").read_text())
    assert payload["system"].startswith("shift-")


def test_entropy_tower_descriptor_rejects_meromorphic(tmp_path, capsys):
    desc = tmp_path / "tower.json"
    desc.write_text(json.dumps({"type": "identity", "depth": 3, "map": GUEDJ_JSON}))
    code = main(
        ["entropy", f"tower:{desc}", "--m-range", "2:5", "--eps", "0.5", "--samples", "64", "--seed", "2", "--out", "x"]
    )
    assert code == 2
    assert "holomorphic" in capsys.readouterr().err


def test_demo_guedj_small(tmp_path):
    out = tmp_path / "bundle"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 512, "m_values": [3, 4, 5], "epsilons": [0.1], "trials": 3}))
    code = main(["demo", "guedj", "--out", str(out), "--seed", "9", "--config", str(cfg)])
    assert code == 0
    names = {p.name for p in out.iterdir() if p.is_file()}
    assert names == {"summary.json", "entropy.csv", "degrees.csv", "formulas.txt", "verdicts.json"}
    assert (out / "figures").is_dir()


def test_demo_rerun_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 512, "m_values": [3, 4, 5], "epsilons": [0.1], "trials": 3}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["demo", "guedj", "--out", str(a), "--seed", "9", "--config", str(cfg)]) == 0
    assert main(["demo", "guedj", "--out", str(b), "--seed", "9", "--config", str(cfg)]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


def test_demo_toy_verdict(tmp_path):
    out = tmp_path / "toy"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps({"depth": 5, "samples": 1024, "m_values": [2, 3, 4, 5], "epsilon": 0.4, "probe_samples": 60})
    )
    code = main(["demo", "toy", "--out", str(out), "--seed", "3", "--config", str(cfg)])
    assert code == 0
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["commutation_max_discrepancy"] == 0.0


def test_demo_bad_config_exit2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": True}))
    code = main(["demo", "toy", "--out", str(tmp_path / "x"), "--seed", "3", "--config", str(cfg)])
    assert code == 2
    assert "unknown config field" in capsys.readouterr().err


def test_entropy_guedj_circle_small(tmp_path):
    out = tmp_path / "circle"
    code = main(
        [
            "entropy",
            "guedj-circle",
            "--m-range",
            "4:7",
            "--eps",
            "0.05",
            "--samples",
            "2048",
            "--seed",
            "6",
            "--threads",
            "2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads((out / "entropy.json").read_text())
    assert payload["system"] == "guedj-circle"
    slope = payload["slopes"]["0.05"]["slope"]
    assert slope is not None and 0.5 < slope < 0.9


def test_entropy_saturation_warning_set(tmp_path):
    # Tiny sample with a tiny radius saturates immediately.
    out = tmp_path / "sat"
    code = main(
        [
            "entropy",
            "guedj-circle",
            "--m-range",
            "6:9",
            "--eps",
            "0.001",
            "--samples",
            "128",
            "--seed",
            "6",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    payload = json.loads((out / "entropy.json").read_text())
    assert payload["saturation_warning"] is True
    assert payload["slopes"]["0.001"]["lower_bound_only"] is True
