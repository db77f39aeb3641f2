"""End-to-end checks of the command line interface via subprocess.

Every invocation goes through ``python -m latticegate.cli`` so the tests
exercise argument parsing, exit codes, and byte-level output stability
exactly as a shell user would see them.
"""

import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG = str(REPO_ROOT / "configs" / "cesium_reference.cfg")


def run_cli(*argv, check=True):
    result = subprocess.run(
        [sys.executable, "-m", "latticegate.cli", *argv],
        capture_output=True,
        text=True,
        cwd=REPO_ROOT,
    )
    if check and result.returncode != 0:
        raise AssertionError(
            f"cli {' '.join(argv)} exited {result.returncode}: {result.stderr}"
        )
    return result


def assert_nine_digit_floats(obj, path="$"):
    """Emitted floats must round-trip through nine significant digits."""
    if isinstance(obj, bool):
        return
    if isinstance(obj, float):
        if math.isfinite(obj):
            assert float(f"{obj:.9g}") == obj, f"{path} = {obj!r} is not 9-digit clean"
    elif isinstance(obj, dict):
        for key, value in obj.items():
            assert_nine_digit_floats(value, f"{path}.{key}")
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            assert_nine_digit_floats(value, f"{path}[{i}]")


# --- kappa ------------------------------------------------------------------

def test_kappa_json_payload():
    result = run_cli("kappa", "--eta-perp", "0.1", "--eta-par", "0.2")
    doc = json.loads(result.stdout)
    assert doc["schema_version"] == 1
    prov = doc["provenance"]
    assert prov["seed"] == 1729
    assert len(prov["config_hash"]) == 16
    int(prov["config_hash"], 16)
    assert doc["kappa"] == pytest.approx(-19.3282636, rel=1e-8)
    assert doc["mean_g"] == pytest.approx(0.984147511, rel=1e-8)
    assert doc["kappa_approx"] > 0
    assert doc["kappa_approx_sign_aligned"] == pytest.approx(doc["kappa"], rel=0.15)
    assert doc["evaluations"] > 0 and doc["err_f"] >= 0
    assert_nine_digit_floats(doc)


def test_kappa_runs_are_byte_identical(tmp_path):
    first = run_cli("kappa", "--eta-perp", "0.13", "--eta-par", "0.21")
    second = run_cli("kappa", "--eta-perp", "0.13", "--eta-par", "0.21")
    assert first.stdout == second.stdout
    out_file = tmp_path / "kappa.json"
    run_cli("kappa", "--eta-perp", "0.13", "--eta-par", "0.21", "--out", str(out_file))
    assert out_file.read_text() == first.stdout


def test_kappa_config_hash_tracks_inputs():
    base = json.loads(run_cli("kappa", "--eta-perp", "0.1", "--eta-par", "0.2").stdout)
    moved = json.loads(run_cli("kappa", "--eta-perp", "0.11", "--eta-par", "0.2").stdout)
    assert base["provenance"]["config_hash"] != moved["provenance"]["config_hash"]


def test_kappa_rejects_bad_geometry():
    result = run_cli("kappa", "--eta-perp", "2.0", "--eta-par", "0.2", check=False)
    assert result.returncode == 2
    assert "error:" in result.stderr


def test_kappa_missing_required_flag_is_usage_error():
    result = run_cli("kappa", "--eta-par", "0.2", check=False)
    assert result.returncode == 2
    assert "error" in result.stderr


def test_kappa_starved_budget_exits_no_convergence():
    result = run_cli(
        "kappa", "--eta-perp", "0.1", "--eta-par", "0.2", "--eval-budget", "100",
        check=False,
    )
    assert result.returncode == 3
    assert "converge" in result.stderr


# --- map --------------------------------------------------------------------

def test_map_output_is_worker_independent(tmp_path):
    argv = (
        "map",
        "--perp-min", "0.1", "--perp-max", "0.2", "--perp-steps", "3",
        "--par-min", "0.1", "--par-max", "0.2", "--par-steps", "3",
    )
    serial = run_cli(*argv, "--jobs", "1")
    threaded = run_cli(*argv, "--jobs", "2")
    assert serial.stdout == threaded.stdout
    header = [line for line in serial.stdout.splitlines() if line.startswith("#")]
    assert len(header) == 5
    assert header[0].startswith("# latticegate ")
    assert header[1] == "# schema_version 1"
    assert header[2].startswith("# config_hash ")
    assert header[3] == "# seed 1729"
    assert header[4] == "# failed_cells 0"


def test_map_single_cell_agrees_with_kappa_command():
    cell = run_cli(
        "map",
        "--perp-min", "0.1", "--perp-max", "0.1", "--perp-steps", "1",
        "--par-min", "0.2", "--par-max", "0.2", "--par-steps", "1",
    )
    rows = [line for line in cell.stdout.splitlines() if not line.startswith("#")]
    assert rows[0] == "eta_perp/eta_par,0.2"
    label, value = rows[1].split(",")
    assert label == "0.1"
    point = json.loads(run_cli("kappa", "--eta-perp", "0.1", "--eta-par", "0.2").stdout)
    assert float(value) == point["kappa"]


def test_map_starved_budget_marks_failed_cells():
    result = run_cli(
        "map",
        "--perp-min", "0.1", "--perp-max", "0.15", "--perp-steps", "2",
        "--par-min", "0.2", "--par-max", "0.2", "--par-steps", "1",
        "--eval-budget", "100",
        check=False,
    )
    assert result.returncode == 3
    assert "# failed_cells 2" in result.stdout
    assert "nan" in result.stdout


# --- budget -----------------------------------------------------------------

def test_budget_reference_numbers():
    result = run_cli("budget", "--config", CONFIG)
    doc = json.loads(result.stdout)
    assert doc["transverse_trap"]["osc_freq_hz"] == pytest.approx(206614.603, rel=1e-6)
    assert doc["longitudinal_trap"]["osc_freq_hz"] == pytest.approx(51612.3112, rel=1e-6)
    assert doc["lattice_scatter"]["rate_over_2pi_hz"] == pytest.approx(4.52754464, rel=1e-6)
    assert doc["catalysis"]["superradiant_rate_over_2pi_hz"] == pytest.approx(258.688524, rel=1e-6)
    assert doc["catalysis"]["intensity_uw_cm2"] == pytest.approx(0.193178117, rel=1e-6)
    assert doc["figure_of_merit"]["kappa"] == pytest.approx(-19.3282636, rel=1e-7)
    assert_nine_digit_floats(doc)
    assert run_cli("budget", "--config", CONFIG).stdout == result.stdout


def test_budget_missing_config_is_usage_error(tmp_path):
    result = run_cli("budget", "--config", str(tmp_path / "nope.cfg"), check=False)
    assert result.returncode == 2
    assert "error:" in result.stderr


# --- gate -------------------------------------------------------------------

def test_gate_reference_operating_point():
    doc = json.loads(run_cli("gate").stdout)
    assert doc["fidelity"]["conditioned_mean"] == pytest.approx(0.967501928, abs=1e-6)
    assert doc["fidelity"]["conditioned_row"]["00"] > 0.999
    assert doc["operating_point"]["pulse_area"] == pytest.approx(math.pi, rel=1e-8)
    assert doc["figure_of_merit"] == pytest.approx(-19.3282636, rel=1e-7)
    assert_nine_digit_floats(doc)


def test_gate_pulse_speed_tradeoff():
    # faster pulse: less time to scatter, higher conditioned fidelity;
    # slower pulse: cooperative decay eats the target rows
    default = json.loads(run_cli("gate").stdout)["fidelity"]["conditioned_mean"]
    fast = json.loads(run_cli("gate", "--rabi-divisor", "2").stdout)
    slow = json.loads(run_cli("gate", "--rabi-divisor", "100").stdout)
    assert fast["fidelity"]["conditioned_mean"] > default
    assert slow["fidelity"]["conditioned_mean"] < default


# --- ensemble ---------------------------------------------------------------

def test_ensemble_subtraction_recovers_gate_row(tmp_path):
    csv_path = tmp_path / "stages.csv"
    result = run_cli(
        "ensemble", "--sites", "100000", "--fill-prob", "0.6",
        "--stages-csv", str(csv_path),
    )
    doc = json.loads(result.stdout)
    target = doc["gate_row"]["11"]
    sigma = doc["corrected_row"]["errors"]["11"]
    assert abs(doc["corrected_fidelity"] - target) <= 3.0 * sigma
    assert doc["apparent_fidelity"] < doc["corrected_fidelity"]
    # pairs count once among p^2 + 2p(1-p) measured units: p / (2 - p)
    assert doc["paired_fraction"] == pytest.approx(0.6 / 1.4, abs=0.02)
    assert_nine_digit_floats(doc)

    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# latticegate ")
    assert lines[3] == "# seed 1729"
    assert lines[4] == "stage,input,p00,p01,p10,p11,leaked,n"
    assert len(lines) == 8


def test_ensemble_is_seed_deterministic():
    argv = ("ensemble", "--sites", "20000")
    first = run_cli(*argv)
    assert run_cli(*argv).stdout == first.stdout
    reseeded = run_cli(*argv, "--seed", "999")
    assert reseeded.stdout != first.stdout
    assert json.loads(reseeded.stdout)["provenance"]["seed"] == 999


def test_ensemble_empty_lattice_is_non_identifiable():
    result = run_cli(
        "ensemble", "--sites", "100", "--fill-prob", "0", check=False
    )
    assert result.returncode == 4
    assert "identifiable" in result.stderr


# --- entry points -----------------------------------------------------------

def test_console_script_is_installed():
    binary = shutil.which("latticegate")
    assert binary, "console script not on PATH"
    result = subprocess.run([binary, "--version"], capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.startswith("latticegate ")


def test_version_flag():
    result = run_cli("--version")
    assert result.stdout.strip() == "latticegate 0.1.0"
