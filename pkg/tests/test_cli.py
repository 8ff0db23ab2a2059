import csv
import io
import json
import math
import subprocess
import sys

import pytest

from dbtunnel.cli import RESONANCE_HEADER, SWEEP_HEADER, main

SYSTEM = ["--v0", "2", "--w", "2", "--d", "1.5707963"]
EXACT_SYSTEM = ["--v0", "2", "--w", "2", "--d", repr(math.pi / 2)]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_transmit_constructed_resonance(capsys):
    code, out, _ = run(capsys, "transmit", *SYSTEM, "--energy", "1", "--compare-exact")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == SWEEP_HEADER
    assert row["regime"] == "resonance"
    assert float(row["T2_semiclassical"]) == pytest.approx(1.0, abs=1e-10)
    assert float(row["T2_exact"]) == pytest.approx(1.0, abs=1e-6)


def test_transmit_energy_out_of_range(capsys):
    code, _, err = run(capsys, "transmit", *SYSTEM, "--energy", "3")
    assert code == 2
    assert "energy" in err and "0 < E < V0" in err


def test_transmit_missing_field(capsys):
    code, _, err = run(capsys, "transmit", "--v0", "2", "--w", "2", "--energy", "1")
    assert code == 2 and "--d" in err


def test_transmit_bad_geometry(capsys):
    code, _, err = run(capsys, "transmit", "--v0", "2", "--w", "-1", "--d", "1", "--energy", "1")
    assert code == 2 and "--w" in err


def test_transmit_wkb(capsys):
    code, out, _ = run(capsys, "transmit", "--v0", "2", "--w", "2", "--d", "1", "--energy", "0.4",
                       "--prescription", "wkb")
    assert code == 0
    (row,) = rows(out)
    assert 0 < float(row["T2_semiclassical"]) < 1
    assert row["T2_exact"] == "" and row["abs_err"] == ""


def test_transmit_seventeen_digits(capsys):
    _, out, _ = run(capsys, "transmit", "--v0", "2", "--w", "2", "--d", "1", "--energy", "0.3")
    (row,) = rows(out)
    assert row["k"] == format(math.sqrt(0.3), ".17g")
    assert "\r" not in out


def test_sweep_shape(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", *SYSTEM, "--e-min", "0.1", "--e-max", "1.9", "--points", "1001",
                     "--output", str(path))
    assert code == 0
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(lines) == 1002
    energies = [float(r["E"]) for r in rows(text)]
    assert energies == sorted(energies)


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", *SYSTEM, "--e-min", "0.1", "--e-max", "1.9", "--points", "5",
                       "--format", "json", "--compare-exact")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 5
    assert all(list(item) == SWEEP_HEADER for item in data)


def test_sweep_peak_matches_resonances(capsys):
    _, out, _ = run(capsys, "sweep", *EXACT_SYSTEM, "--e-min", "0.5", "--e-max", "1.5", "--points", "1001",
                    "--compare-exact")
    table = rows(out)
    best = max(table, key=lambda r: float(r["T2_exact"]))
    _, out, _ = run(capsys, "resonances", *EXACT_SYSTEM, "--e-min", "0.5", "--e-max", "1.5")
    (res,) = rows(out)
    assert abs(float(best["E"]) - float(res["E_semiclassical"])) <= 1e-3


def test_sweep_deterministic_across_workers(tmp_path, capsys):
    outputs = []
    for workers in ("1", "4"):
        path = tmp_path / f"w{workers}.csv"
        code, _, _ = run(capsys, "sweep", *SYSTEM, "--e-min", "0.1", "--e-max", "1.9", "--points", "401",
                         "--compare-exact", "--workers", workers, "--output", str(path))
        assert code == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_resonances_constructed(capsys):
    code, out, _ = run(capsys, "resonances", *EXACT_SYSTEM, "--e-min", "0.5", "--e-max", "1.5", "--compare-exact")
    assert code == 0
    assert out.splitlines()[0] == ",".join(RESONANCE_HEADER)
    (row,) = rows(out)
    assert float(row["E_semiclassical"]) == pytest.approx(1.0, abs=1e-10)
    assert abs(float(row["residual"])) < 1e-10


def test_resonance_shift_shrinks_with_width(capsys):
    worst = []
    for w in ("1", "1.5"):
        _, out, _ = run(capsys, "resonances", "--v0", "50", "--w", w, "--d", "1",
                        "--e-min", "5", "--e-max", "45", "--compare-exact")
        worst.append(max(float(r["abs_dE"]) for r in rows(out)))
    assert worst[1] < worst[0]


def test_resonances_empty(capsys):
    code, out, _ = run(capsys, "resonances", *EXACT_SYSTEM, "--e-min", "0.1", "--e-max", "0.5")
    assert code == 0
    assert out.splitlines() == [",".join(RESONANCE_HEADER)]


def sideband_sections(text):
    blocks = text.strip("\n").split("\n\n")
    return [rows(block + "\n") for block in blocks]


def test_sidebands_undriven(capsys):
    code, out, _ = run(capsys, "sidebands", *EXACT_SYSTEM, "--energy", "1", "--v1", "0", "--omega", "0.01")
    assert code == 0
    header, bands, _ = sideband_sections(out)
    assert float(header[0]["gamma"]) == pytest.approx(math.pi / 2 + 1)
    assert len(bands) == 1
    assert bands[0]["n"] == "0" and float(bands[0]["probability"]) == 1.0


def test_sidebands_normalized_and_quenched(capsys):
    code, out, _ = run(capsys, "sidebands", *EXACT_SYSTEM, "--energy", "1", "--v1", "0.02", "--omega", "0.01")
    assert code == 0
    _, bands, quench = sideband_sections(out)
    assert math.fsum(float(b["probability"]) for b in bands) == pytest.approx(1.0, abs=1e-10)
    f_q = float(quench[0]["quench_f"])
    code, out, _ = run(capsys, "sidebands", *EXACT_SYSTEM, "--energy", "1",
                       "--v1", repr(0.01 * f_q), "--omega", "0.01", "--format", "json")
    report = json.loads(out)
    p0 = next(b["probability"] for b in report["sidebands"] if b["n"] == 0)
    assert p0 < 1e-12


def test_sidebands_off_resonance(capsys):
    code, _, err = run(capsys, "sidebands", *EXACT_SYSTEM, "--energy", "0.7", "--v1", "0.01", "--omega", "0.01")
    assert code == 2
    assert "residual" in err


def test_verify_default(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    names = [line.split()[1] for line in out.splitlines()[:-1]]
    assert "eq16_vs_composed" in names and "oracle_unitarity" in names
    assert out.splitlines()[-1] == "ALL PASS"


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--json")
    report = json.loads(out)
    assert code == 0 and report["passed"] is True
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["consistency_aoyama_harano"]["status"] == "NOTE"
    assert by_name["consistency_aoyama_harano"]["measured"] == pytest.approx(1 - math.sqrt(2) / 2, abs=1e-7)


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.conf"
    cfg.write_text("v0 = 2\nw = 2\nd = 1.0\nenergy = 0.3  # comment\nformat = json\n")
    _, out, _ = run(capsys, "transmit", "--config", str(cfg))
    assert json.loads(out)[0]["E"] == 0.3
    _, out, _ = run(capsys, "transmit", "--config", str(cfg), "--energy", "0.6", "--format", "csv")
    assert rows(out)[0]["E"] == "0.59999999999999998"


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "transmit", "--config", str(cfg))
    assert code == 2 and "colour" in err
    code, _, _ = run(capsys, "transmit", "--config", str(tmp_path / "missing.conf"))
    assert code == 2


def test_unknown_command_exit_code(capsys):
    assert run(capsys, "frobnicate")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dbtunnel", "transmit", *SYSTEM, "--energy", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert rows(proc.stdout)[0]["regime"] == "resonance"
