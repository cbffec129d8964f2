import configparser
import json

import pytest

import discord_recall.run as run


@pytest.fixture
def config(tmp_path):
    """INI with a coarse grid so the CLI tests stay fast."""
    path = tmp_path / "config.ini"
    cp = configparser.ConfigParser()
    cp["analysis"] = {"theta_points": "13", "phi_points": "24"}
    cp["games"] = {"grid_steps": "101"}
    with open(path, "w") as f:
        cp.write(f)
    return str(path)


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_reproduce_passes(config, capsys):
    assert run.main(["--config", config, "reproduce", "--format", "json"]) == run.EXIT_OK
    data = _json(capsys)
    assert data["passed"] is True
    assert [d["key"] for d in data["discrepancies"]] == ["nonzero_discord", "behavioral_optimum"]


def test_reproduce_table(config, capsys):
    assert run.main(["--config", config, "reproduce", "--variant", "single-infoset"]) == 0
    out = capsys.readouterr().out
    assert "DISCREPANCY" in out
    assert "behavioral_stage_aware" not in out


def test_reproduce_mismatch(config, monkeypatch, capsys):
    from discord_recall.engine import report

    monkeypatch.setattr(report, "expected_quantum_payoff", lambda *a: 0.5)
    assert run.main(["--config", config, "reproduce"]) == run.EXIT_MISMATCH
    assert "result: FAIL" in capsys.readouterr().out


def test_analyze_discordant_state(config, data_path, capsys):
    assert run.main(["--config", config, "analyze", data_path("discordant_state.json"),
                     "--format", "json"]) == 0
    data = _json(capsys)
    assert data["I"] == pytest.approx(1.0, abs=1e-9)
    assert data["negativity"] == pytest.approx(0.0, abs=1e-9)
    assert data["optimized"]["A|B"]["D"] == pytest.approx(0.0, abs=1e-6)


def test_analyze_bell_state(config, data_path, capsys):
    assert run.main(["--config", config, "analyze", data_path("bell_state.json"),
                     "--measure", "A", "--basis", "comp", "--format", "json"]) == 0
    data = _json(capsys)
    assert data["negativity"] == pytest.approx(0.5, abs=1e-9)
    assert set(data["optimized"]) == {"B|A"}
    assert [f["basis"] for f in data["fixed"]] == ["comp"]


@pytest.mark.parametrize(
    "name, code",
    [
        ("malformed.json", run.EXIT_PARSE),
        ("invalid_state.json", run.EXIT_VALIDATION),
        ("missing.json", run.EXIT_PARSE),
    ],
)
def test_analyze_error_codes(config, data_path, name, code):
    assert run.main(["--config", config, "analyze", data_path(name)]) == code


@pytest.mark.parametrize("basis", ["y-ish", "4,0", "y"])
def test_analyze_bad_basis_is_usage_error(config, data_path, basis):
    with pytest.raises(SystemExit) as exc:
        run.main(["--config", config, "analyze", data_path("bell_state.json"), "--basis", basis])
    assert exc.value.code == 2


def test_simulate_support(config, capsys):
    assert run.main(["--config", config, "simulate", "--seed", "1", "--n", "100000",
                     "--format", "json"]) == 0
    data = _json(capsys)
    assert data["counts"]["LL"] == 0
    assert data["counts"]["RR"] == 0
    assert data["counts"]["LR"] + data["counts"]["RL"] == 100000
    assert data["chi_square"]["passed"] is True


def test_simulate_is_reproducible(config, capsys):
    argv = ["--config", config, "simulate", "--seed", "1", "--n", "2000"]
    run.main(argv)
    first = capsys.readouterr().out
    run.main(argv)
    assert capsys.readouterr().out == first


def test_simulate_single_play(config, capsys):
    assert run.main(["--config", config, "simulate", "--n", "1", "--format", "json"]) == 0
    assert sum(_json(capsys)["counts"].values()) == 1


def test_simulate_swap_stage2(config, capsys):
    run.main(["--config", config, "simulate", "--n", "1000", "--swap-stage2", "--format", "json"])
    data = _json(capsys)
    assert data["counts"]["LR"] == data["counts"]["RL"] == 0


@pytest.mark.parametrize("flag, value", [("--n", "0"), ("--streams", "0"), ("--seed", "-1")])
def test_simulate_rejects_bad_arguments(config, flag, value):
    with pytest.raises(SystemExit) as exc:
        run.main(["--config", config, "simulate", flag, value])
    assert exc.value.code == 2


def test_simulate_config_preload(tmp_path, capsys):
    cfg = tmp_path / "plays.ini"
    cp = configparser.ConfigParser()
    cp["simulation"] = {"plays": "7", "seed": "3"}
    with open(cfg, "w") as f:
        cp.write(f)
    run.main(["--config", str(cfg), "simulate", "--format", "json"])
    data = _json(capsys)
    assert data["n"] == 7
    assert data["seed"] == 3


def test_sweep_writes_csv(config, tmp_path, capsys):
    pytest.importorskip("pandas")
    out = tmp_path / "sweep.csv"
    assert run.main(["--config", config, "sweep", "--steps", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("strength,payoff,I")
    assert "payoff first drops below 0.75" in capsys.readouterr().out


def test_sweep_unwritable_path(config, tmp_path):
    pytest.importorskip("pandas")
    out = tmp_path / "no_such_dir" / "sweep.csv"
    assert run.main(["--config", config, "sweep", "--steps", "2", "--out", str(out)]) == run.EXIT_PARSE


@pytest.mark.parametrize("argv", [["--steps", "1"], ["--subsystems", "C"]])
def test_sweep_rejects_bad_arguments(config, argv):
    with pytest.raises(SystemExit) as exc:
        run.main(["--config", config, "sweep"] + argv)
    assert exc.value.code == 2


def test_solve_recall_game(config, data_path, capsys):
    assert run.main(["--config", config, "solve", data_path("recall_game.json"),
                     "--format", "json"]) == 0
    data = _json(capsys)
    assert data["behavioral"]["value"] == pytest.approx(0.5, abs=1e-6)
    assert data["mixed"]["value"] == 1.0
    assert data["quantum"]["value"] == pytest.approx(1.0, abs=1e-12)


def test_solve_malformed_game(config, data_path):
    assert run.main(["--config", config, "solve", data_path("malformed.json")]) == run.EXIT_PARSE


def test_invalid_config_value(tmp_path, data_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[simulation]\nplays = lots\n")
    assert run.main(["--config", str(cfg), "simulate"]) == run.EXIT_PARSE


def test_diagnostics_file(config, data_path, tmp_path):
    diag = tmp_path / "diag.log"
    level = run.diag_logger.level
    run.main(["--config", config, "--diagnostics", str(diag), "analyze",
              data_path("bell_state.json"), "--measure", "A"])
    assert diag.read_text().strip()
    assert run.diag_logger.handlers == []
    assert run.diag_logger.level == level
    assert run.diag_logger.propagate
