import csv
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kickspin import __version__
from kickspin.cli import main
from kickspin.config import DEFAULT_SEED, RunConfig, parse_real, read_config_text, resolve
from kickspin.errors import InvalidArgument


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main(list(args) + ["--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("4*pi", 4 * math.pi), ("-pi/2", -math.pi / 2), ("1e-4", 1e-4)])
def test_parse_real(text, value):
    assert parse_real(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["__import__('os')", "pi**2", "nan", "1/0", ""])
def test_parse_real_rejects(text):
    with pytest.raises(InvalidArgument):
        parse_real(text)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_parse_real_round_trip(x):
    assert parse_real(repr(x)) == x


def test_config_file_rules():
    vals = read_config_text("# sweep\nsteps = 8  # comment\nlambda_end = 2*pi\n")
    assert vals == {"steps": 8, "lambda_end": 2 * math.pi}
    with pytest.raises(InvalidArgument):
        read_config_text("stpes = 8\n")
    with pytest.raises(InvalidArgument):
        read_config_text("steps = 8\nsteps = 9\n")
    with pytest.raises(InvalidArgument):
        read_config_text("steps 8\n")


def test_resolve_precedence():
    cfg = resolve("spectrum", {"steps": 8, "seed": 5}, {"steps": 16})
    assert cfg.steps == 16 and cfg.seed == 5
    assert RunConfig().seed == DEFAULT_SEED
    with pytest.raises(InvalidArgument):
        resolve("spectrum", {"command": "cycle"}, {})


def test_seeded_rng_reproducible():
    a = RunConfig(seed=42).rng().normal(size=4)
    b = RunConfig(seed=42).rng().normal(size=4)
    assert (a == b).all()


def test_spectrum_four_steps(tmp_path):
    code, out = run(tmp_path, "spectrum", "--lambda-end", "2*pi", "--steps", "4", "--plotdata")
    assert code == 0
    rows = read_csv(out / "spectrum.csv")
    assert list(rows[0]) == ["lambda", "E0_unwrapped", "E1_unwrapped", "E0_mod", "E1_mod"]
    assert len(rows) == 5
    for r in rows:
        assert float(r["E1_unwrapped"]) - float(r["E0_unwrapped"]) == pytest.approx(math.pi, abs=1e-12)
    assert (out / "spectrum_E0.dat").read_text().count("\n") == 5


def test_spectrum_single_point(tmp_path):
    code, out = run(tmp_path, "spectrum", "--lambda-end", "0", "--steps", "1")
    rows = read_csv(out / "spectrum.csv")
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["E0_mod"]) == pytest.approx(-math.pi / 2)
    assert float(rows[0]["E1_mod"]) == pytest.approx(math.pi / 2)


def test_spectrum_unwrapped_over_double_cycle(tmp_path):
    _, out = run(tmp_path, "spectrum", "--lambda-end", "4*pi", "--steps", "8")
    rows = read_csv(out / "spectrum.csv")
    assert float(rows[-1]["E0_unwrapped"]) == pytest.approx(float(rows[0]["E0_unwrapped"]) + 2 * math.pi)


def test_csv_has_round_trip_precision(tmp_path):
    _, out = run(tmp_path, "spectrum", "--steps", "3", "--format", "csv")
    row = read_csv(out / "spectrum.csv")[1]
    assert float(row["lambda"]) == 2 * math.pi / 3
    assert not (out / "spectrum.json").exists()


def test_json_embeds_config_and_version(tmp_path):
    _, out = run(tmp_path, "spectrum", "--steps", "4", "--format", "json", "--seed", "7")
    doc = json.loads((out / "spectrum.json").read_text())
    assert doc["version"] == __version__
    assert doc["config"]["seed"] == 7 and doc["config"]["steps"] == 4
    assert list(doc)[:2] == ["version", "config"]


def test_byte_identical_reruns(tmp_path):
    for name in ("a", "b"):
        assert main(["connection", "--r", "0.5", "--wilson", "false", "--random-models", "1", "--out", str(tmp_path / name)]) == 0
    for f in ("connection.csv", "connection.json"):
        a = (tmp_path / "a" / f).read_bytes()
        b = (tmp_path / "b" / f).read_bytes().replace(str(tmp_path / "b").encode(), str(tmp_path / "a").encode())
        assert a == b


def test_cycle_reports(tmp_path):
    code, out = run(tmp_path, "cycle", "--format", "json")
    doc = json.loads((out / "cycle.json").read_text())
    assert code == 0 and doc["is_swap"] and doc["permutation"] == [1, 0]
    code, out = run(tmp_path, "cycle", "--cycles", "2", "--cycle-steps", "8192", "--format", "json")
    doc = json.loads((out / "cycle.json").read_text())
    assert doc["permutation"] == [0, 1] and doc["branch_signs"] == [-1.0, -1.0]


def test_cycle_too_few_steps(tmp_path, capsys):
    code, _ = run(tmp_path, "cycle", "--cycle-steps", "32")
    assert code == 2
    assert "64" in capsys.readouterr().err


def test_connection_command(tmp_path):
    code, out = run(tmp_path, "connection", "--r-samples", "3", "--wilson-steps", "512")
    assert code == 0
    rows = read_csv(out / "connection.csv")
    real = [r for r in rows if r["gauge"] == "real_gauge"]
    assert all(float(r["A01_im"]) == pytest.approx(-0.25, abs=1e-7) for r in real)
    assert all(float(r["antihermitian_residual"]) < 1e-7 for r in rows)
    doc = json.loads((out / "connection.json").read_text())
    assert doc["wilson"]["distance_to_minus_identity"] < 1e-6


def test_protocol_command(tmp_path):
    code, out = run(tmp_path, "protocol", "--num-kicks", "2", "--fidelity-kicks", "64,128")
    doc = json.loads((out / "protocol.json").read_text())
    assert code == 0
    assert doc["phase_difference"] == pytest.approx(2 * math.pi)
    assert doc["chosen_num_kicks"] == 2
    assert [r["M"] for r in doc["fidelity_table"]] == [64, 128]


def test_protocol_rejects_unnormalised(tmp_path):
    code, _ = run(tmp_path, "protocol", "--initial", "1,1")
    assert code == 2


def test_mobile_command(tmp_path):
    code, out = run(tmp_path, "mobile", "--n-points", "16", "--misaligned-demo")
    doc = json.loads((out / "mobile.json").read_text())
    assert code == 0
    assert doc["comparisons"]["spectral"]["matching_distance"] < 1e-8
    assert doc["comparisons"]["conjugated"]["matching_distance"] < 1e-10
    assert doc["comparisons"]["misaligned"]["flagged"]
    assert len(read_csv(out / "mobile_spectral.csv")) == 32


def test_bad_grid_is_config_error(tmp_path):
    code, _ = run(tmp_path, "mobile", "--n-points", "12")
    assert code == 2


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["spectrum", "--steps", "2", "--out", str(blocker / "sub")]) == 4


def test_missing_config_is_io_error(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "nope.txt")]) == 4


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.txt"
    cfg.write_text("lambda_end = 2*pi\nsteps = 2\nformat = csv\n")
    code, out = run(tmp_path, "spectrum", "--config", str(cfg), "--steps", "4")
    assert code == 0 and len(read_csv(out / "spectrum.csv")) == 5


def test_unknown_flag_and_command():
    assert main(["spectrum", "--bogus", "1"]) == 2
    assert main(["nonsense"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kickspin", "spectrum", "--steps", "2", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "spectrum.csv" in proc.stdout
