"""CLI surface: solve, design, simulate, analyze round trips."""

import json

from click.testing import CliRunner

from coadapt.cli import main
from coadapt.design import spec_to_text
from coadapt.games import CANONICAL_GAME, game_to_text


def test_solve_canonical():
    result = CliRunner().invoke(main, ["solve", "--game", "canonical"])
    assert result.exit_code == 0, result.output
    assert "nash" in result.output
    assert "-0.200000" in result.output
    assert "rse" in result.output


def test_solve_writes_csv(tmp_path):
    out = tmp_path / "report.csv"
    result = CliRunner().invoke(main, ["solve", "--csv", str(out)])
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "name,h,m,L_H,L_M,stability,diagnostic"
    assert len(lines) == 7


def test_solve_game_file(tmp_path):
    path = tmp_path / "game.txt"
    path.write_text(game_to_text(CANONICAL_GAME))
    result = CliRunner().invoke(main, ["solve", "--game", str(path)])
    assert result.exit_code == 0
    assert "stackelberg" in result.output


def test_design_round_trip(tmp_path):
    from coadapt.design import DesignSpec
    from coadapt.games import JointAction

    spec = DesignSpec(JointAction(0.1, 0.7), JointAction(0, 0),
                      JointAction(-0.2, -0.2), JointAction(0.2, 0.2))
    spec_path = tmp_path / "targets.txt"
    spec_path.write_text(spec_to_text(spec))
    out = tmp_path / "designed.txt"
    result = CliRunner().invoke(main, ["design", "--spec", str(spec_path),
                                       "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output
    solve = CliRunner().invoke(main, ["solve", "--game", str(out)])
    assert "-0.200000" in solve.output


def test_simulate_and_analyze(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        "experiment = 2\nseed = 3\n"
        "[machine]\niterations = 2\n"
        "[protocol]\nmode = \"replication\"\nsamples = 300\n")
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    r1 = CliRunner().invoke(main, ["simulate", "--config", str(cfg),
                                   "--out", str(out1)])
    assert r1.exit_code == 0, r1.output
    r2 = CliRunner().invoke(main, ["simulate", "--config", str(cfg),
                                   "--out", str(out2), "--seed", "4"])
    assert r2.exit_code == 0
    assert (out1 / "records.ndjson").exists()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["experiment"] == 2

    analysis = tmp_path / "stats.csv"
    r3 = CliRunner().invoke(main, ["analyze", "--records", str(out1),
                                   "--records", str(out2), "--out", str(analysis)])
    assert r3.exit_code == 0, r3.output
    text = analysis.read_text()
    assert "final L_M vs CCVE" in text


def test_seed_flag_changes_output(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        "experiment = 2\nseed = 3\n"
        "[machine]\niterations = 1\n"
        "[protocol]\ntrial_seconds = 0.2\n")
    a, b = tmp_path / "a", tmp_path / "b"
    CliRunner().invoke(main, ["simulate", "--config", str(cfg), "--out", str(a)])
    CliRunner().invoke(main, ["simulate", "--config", str(cfg), "--out", str(b),
                              "--seed", "99"])
    assert (a / "records.ndjson").read_bytes() != (b / "records.ndjson").read_bytes()
