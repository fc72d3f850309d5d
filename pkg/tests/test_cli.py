"""Command-line contract: exit codes, NDJSON reproducibility, wiring."""

import json
import math
import os
import subprocess
import sys

import pytest

from bellkit.events import stream_from_runs, write_event_stream
from bellkit.lhv import CheaterConfig, simulate_loophole_experiment
from bellkit.polytope import quantum_behavior
from bellkit.quantum import canonical_angles

CLI = [sys.executable, "-m", "bellkit.cli"]
CHALLENGER = [sys.executable, "-m", "bellkit.challengers"]


def run_cli(*args, env_extra=None, stdin_text=None):
    env = dict(os.environ)
    env.pop("BELLKIT_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(CLI + list(args), capture_output=True, text=True,
                          env=env, input=stdin_text, timeout=300)


def records(stdout):
    return [json.loads(line) for line in stdout.splitlines()]


def by_kind(stdout, kind):
    matches = [r for r in records(stdout) if r["record"] == kind]
    assert matches, f"no {kind!r} record in output"
    return matches[-1]


# -- reproducibility ----------------------------------------------------------

def test_rerun_with_echoed_seed_is_byte_identical():
    first = run_cli("--json", "simulate", "--model", "quantum",
                    "--n", "500", "--seed", "77")
    second = run_cli("--json", "simulate", "--model", "quantum",
                     "--n", "500", "--seed", "77")
    assert first.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout.strip()


def test_unseeded_run_echoes_a_reusable_seed():
    first = run_cli("--json", "simulate", "--model", "lhv", "--uniform",
                    "--n", "400")
    seed = by_kind(first.stdout, "config")["seed"]
    replay = run_cli("--json", "simulate", "--model", "lhv", "--uniform",
                     "--n", "400", "--seed", str(seed))
    assert replay.stdout == first.stdout


def test_seed_env_variable_is_the_default():
    out = run_cli("--json", "simulate", "--model", "lhv", "--uniform",
                  "--n", "100", env_extra={"BELLKIT_SEED": "12345"})
    assert by_kind(out.stdout, "config")["seed"] == 12345


def test_qrc_rerun_is_byte_identical():
    args = ("--json", "qrc", "--mode", "spreadsheet", "--trials", "5",
            "--n", "80", "--min-cell", "10", "--seed", "20")
    first, second = run_cli(*args), run_cli(*args)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    verdict = by_kind(first.stdout, "verdict")
    assert verdict["sessions_total"] == 5


# -- simulate -----------------------------------------------------------------

def test_simulate_quantum_canonical_scale():
    out = run_cli("--json", "simulate", "--model", "quantum", "--angles",
                  "canonical", "--n", "15000", "--seed", "7")
    summary = by_kind(out.stdout, "summary")
    assert abs(summary["s"] - 2.0 * math.sqrt(2.0)) <= 3.0 * 0.022
    tail = by_kind(out.stdout, "tail")
    assert 0.0 < tail["probability"] <= 1.0


def test_simulate_lhv_stays_near_local_bound():
    out = run_cli("--json", "simulate", "--model", "lhv", "--uniform",
                  "--n", "10000", "--seed", "3")
    summary = by_kind(out.stdout, "summary")
    assert abs(summary["s"]) <= 2.0 + 6.0 * summary["se"]


def test_simulate_cheater_reports_efficiency_and_verdicts(tmp_path):
    runs_path = tmp_path / "runs.csv"
    out = run_cli("--json", "simulate", "--model", "cheater", "--target",
                  "canonical", "--n", "100000", "--seed", "5",
                  "--runs", str(runs_path))
    assert by_kind(out.stdout, "summary")["s"] == pytest.approx(
        2.0 * math.sqrt(2.0), abs=0.05)
    efficiency = by_kind(out.stdout, "efficiency")
    assert efficiency["gamma_hat"] == pytest.approx(0.5, abs=0.02)
    verdicts = by_kind(out.stdout, "verdicts")
    assert verdicts["naive"] == "violated"
    assert verdicts["detection_adjusted"] == "not violated"
    text = runs_path.read_text()
    assert text.startswith("x,y,a,b\n")
    assert len(text.splitlines()) == 100001


# -- bound --------------------------------------------------------------------

def test_bound_values_match_closed_forms():
    out = run_cli("--json", "bound", "theorem1", "--n", "15000", "--eta", "0.73")
    assert by_kind(out.stdout, "bound")["probability"] < 1e-12

    out = run_cli("--json", "bound", "larsson", "--gamma", "0.5",
                  "--loophole", "detection")
    assert by_kind(out.stdout, "efficiency-bound")["limit"] == pytest.approx(6.0)

    out = run_cli("--json", "bound", "larsson", "--gamma", "1.0",
                  "--loophole", "coincidence")
    assert by_kind(out.stdout, "efficiency-bound")["limit"] == pytest.approx(2.0)

    out = run_cli("--json", "bound", "min-runs", "--eta", "0.5", "--alpha", "0.01")
    n = by_kind(out.stdout, "min-runs")["n"]
    assert n >= 1

    out = run_cli("--json", "bound", "hoeffding", "--n", "100", "--t", "0.1")
    assert by_kind(out.stdout, "bound")["probability"] == pytest.approx(
        math.exp(-2.0 * 100 * 0.01), rel=1e-12)


def test_bound_curve_is_monotone_decreasing():
    out = run_cli("--json", "bound", "larsson-curve", "--from", "0.5",
                  "--to", "1.0", "--step", "0.05")
    points = [r for r in records(out.stdout) if r["record"] == "curve-point"]
    assert len(points) == 11
    limits = [p["detection_limit"] for p in points]
    assert all(a > b for a, b in zip(limits, limits[1:]))
    assert points[-1]["gamma"] == pytest.approx(1.0)
    assert points[-1]["detection_limit"] == pytest.approx(2.0)


# -- analyze ------------------------------------------------------------------

@pytest.fixture(scope="module")
def cheater_stream_text():
    result = simulate_loophole_experiment(
        CheaterConfig(target=quantum_behavior(canonical_angles())), 20000, 11)
    return write_event_stream(stream_from_runs(result.runs))


def test_analyze_reports_three_verdicts(tmp_path, cheater_stream_text):
    path = tmp_path / "stream.ndjson"
    path.write_text(cheater_stream_text)
    out = run_cli("--json", "analyze", str(path), "--window-ns", "10")
    assert out.returncode == 0
    verdicts = by_kind(out.stdout, "verdicts")
    assert verdicts["naive"] == "violated"
    assert verdicts["detection_adjusted"] == "not violated"
    assert verdicts["coincidence_adjusted"] == "not violated"
    assert by_kind(out.stdout, "efficiency")["gamma_hat"] == pytest.approx(
        0.5, abs=0.05)


def test_analyze_reads_stdin_and_lattice_method(cheater_stream_text):
    out = run_cli("--json", "analyze", "-", "--window-ns", "10",
                  "--method", "lattice", stdin_text=cheater_stream_text)
    assert out.returncode == 0
    assert by_kind(out.stdout, "pairing")["method"] == "lattice"


def test_analyze_parse_error_names_the_line(tmp_path):
    path = tmp_path / "bad.ndjson"
    path.write_text('{"t_ns": 0, "wing": "A", "setting": 0, "outcome": 1}\n'
                    'not json\n')
    out = run_cli("analyze", str(path), "--window-ns", "10")
    assert out.returncode == 1
    assert "line 2" in out.stderr


# -- polytope -----------------------------------------------------------------

def test_polytope_builtin_pr_box():
    out = run_cli("--json", "polytope", "classify", "--builtin", "pr-box")
    assert by_kind(out.stdout, "validation")["ok"] is True
    assert by_kind(out.stdout, "facets")["max_value"] == pytest.approx(4.0)
    assert by_kind(out.stdout, "class")["label"] == "no-signalling-superquantum"


def test_polytope_classifies_behavior_file(tmp_path):
    path = tmp_path / "behavior.csv"
    path.write_text(quantum_behavior(canonical_angles()).to_csv())
    out = run_cli("--json", "polytope", "classify", str(path))
    assert out.returncode == 0
    facets = by_kind(out.stdout, "facets")
    assert facets["max_value"] == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-12)
    assert by_kind(out.stdout, "class")["local_mixture"] is False


def test_polytope_without_input_is_an_error():
    out = run_cli("polytope", "classify")
    assert out.returncode == 1


# -- qrc ----------------------------------------------------------------------

def test_qrc_check_passes_the_packaged_challenger():
    out = run_cli("--json", "qrc", "--mode", "check", "--seed", "4",
                  "--n", "40", "--min-cell", "5",
                  "--challenger", " ".join(CHALLENGER + ["spreadsheet"]))
    assert out.returncode == 0
    check = by_kind(out.stdout, "check")
    assert check["deterministic"] is True
    assert check["consistent"] is True


def test_qrc_interactive_native_cheat_in_loophole_mode():
    out = run_cli("--json", "qrc", "--mode", "interactive", "--native", "cheat",
                  "--loophole", "--trials", "1", "--n", "400", "--min-cell", "0",
                  "--seed", "9")
    assert out.returncode == 0
    session = by_kind(out.stdout, "session")
    assert any("coincidences only" in a for a in session["anomalies"])
    assert session["s"] == pytest.approx(2.0 * math.sqrt(2.0), abs=0.5)


def test_qrc_three_node_oracle_self_test():
    out = run_cli("--json", "qrc", "--mode", "three-node", "--oracle",
                  "--n", "2000", "--min-cell", "0", "--trials", "1",
                  "--seed", "2")
    assert out.returncode == 0
    session = by_kind(out.stdout, "session")
    assert session["s"] == pytest.approx(2.0 * math.sqrt(2.0), abs=0.2)


def test_qrc_three_node_external_trio_stays_local():
    out = run_cli("--json", "qrc", "--mode", "three-node",
                  "--source", " ".join(CHALLENGER + ["source", "--seed", "100"]),
                  "--alice", " ".join(CHALLENGER + ["station"]),
                  "--bob", " ".join(CHALLENGER + ["station"]),
                  "--n", "300", "--min-cell", "0", "--trials", "1", "--seed", "19")
    assert out.returncode == 0
    session = by_kind(out.stdout, "session")
    assert abs(session["s"]) < 1.5
    assert session["anomalies"] == []


def test_qrc_transcript_file_replays(tmp_path):
    path = tmp_path / "transcripts.ndjson"
    out = run_cli("--json", "qrc", "--trials", "3", "--n", "80",
                  "--min-cell", "10", "--seed", "20",
                  "--transcript", str(path))
    assert out.returncode == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    for line, session in zip(lines, records(out.stdout)[1:4]):
        stored = json.loads(line)
        assert stored["s"] == session["s"]
        assert len(stored["rows"]) == 80


# -- conjecture ---------------------------------------------------------------

def test_conjecture_constant_table_never_wins(tmp_path):
    path = tmp_path / "const.csv"
    path.write_text("A,Ap,B,Bp\n" + "1,1,1,1\n" * 4)
    out = run_cli("--json", "conjecture", "--table", str(path), "--seed", "1")
    record = by_kind(out.stdout, "conjecture")
    assert record["proportion"] == 0.0
    assert record["mode"] == "exhaustive"


def test_conjecture_random_tables_stay_at_or_below_half():
    out = run_cli("--json", "conjecture", "--random", "20", "--rows", "16",
                  "--trials", "2000", "--seed", "6")
    sweep = by_kind(out.stdout, "sweep")
    assert sweep["tables"] == 20
    # sampling noise stays well below the half ceiling at these sizes
    assert sweep["max_proportion"] <= 0.55


# -- exit codes ---------------------------------------------------------------

def test_usage_error_exits_one():
    out = run_cli("simulate", "--model", "quantum", "--n", "10",
                  "--no-such-flag")
    assert out.returncode == 1

    out = run_cli("bound", "theorem1", "--n", "not-a-number", "--eta", "0.5")
    assert out.returncode == 1


def test_garbage_table_exits_two():
    out = run_cli("qrc", "--trials", "1", "--n", "8", "--min-cell", "0",
                  "--seed", "1", "--challenger",
                  f"{sys.executable} -c \"print('hi')\"")
    assert out.returncode == 2
    assert "malformed table" in out.stderr


def test_crashing_challenger_exits_three():
    out = run_cli("qrc", "--trials", "1", "--n", "8", "--min-cell", "0",
                  "--seed", "1", "--challenger", "/bin/false")
    assert out.returncode == 3


def test_help_exits_zero_everywhere():
    for args in (["--help"], ["simulate", "--help"], ["bound", "--help"],
                 ["qrc", "--help"], ["conjecture", "--help"]):
        assert run_cli(*args).returncode == 0
