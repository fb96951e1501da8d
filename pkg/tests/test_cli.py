import json

import numpy as np
import pytest

from thirdq.cli import run
from thirdq.model import ModelSpec, save_model

MODELS = "models"


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_spectrum_example1(tmp_path):
    out = tmp_path / "spectrum.json"
    assert run(["spectrum", "--model", f"{MODELS}/example1.json",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    betas = np.array(data["betas"])
    assert betas == pytest.approx(np.array([[0.5, 0.0], [0.5, 0.0]]))
    assert data["stable"] is True
    ladder = {tuple(e["m"]): e["value"][0] for e in data["lambda_ladder"]}
    assert ladder[(0, 0)] == pytest.approx(0.0)
    assert ladder[(0, 1)] == pytest.approx(-1.0)
    assert ladder[(1, 2)] == pytest.approx(-3.0)


def test_dump_shift_vectors(tmp_path):
    out = tmp_path / "dump.json"
    assert run(["dump", "--model", f"{MODELS}/example1.json",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert np.array(data["X"]) == pytest.approx(
        np.array([[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]))
    by_sector = {e["sector"]: e for e in data["sectors"]}
    d = np.array(by_sector["+1,-1"]["d"])[:, 0]  # real parts, z1 real
    assert d == pytest.approx([-0.2, 0.2, -0.4, 0.4])
    assert by_sector["+1,-1"]["S0"] == pytest.approx([1.0, 0.0])


def test_ness_max_entry_is_coherent_amplitude(tmp_path):
    out = tmp_path / "ness.json"
    assert run(["ness", "--model", f"{MODELS}/example1.json",
                "--sector", "+1,-1", "--cutoff", "20",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["cutoff"] == 20
    mat = np.array(data["matrix"])
    mat = mat[..., 0] + 1j * mat[..., 1]
    top = np.abs(mat).max()
    assert top == pytest.approx(np.exp(-0.2**2), abs=1e-9)
    assert np.abs(mat[0, 0]) == pytest.approx(top)


def test_evolve_closed_form_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["evolve", "--model", f"{MODELS}/example1.json",
            "--method", "closed_form", "--npoints", "10"]
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = read_csv(out1)
    assert header == ["t", "value", "method"]
    assert len(rows) == 11  # t=0 plus 10 grid points
    assert all(r[2] == "closed_form" for r in rows)
    assert float(rows[0][1]) == pytest.approx(1.0)


def test_evolve_all_methods_agree_smoke(tmp_path):
    out = tmp_path / "all.csv"
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--method", "all", "--cutoff", "12", "--trunc", "5",
                "--npoints", "6", "--tmax", "4", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    methods = {r[2] for r in rows}
    assert methods == {"spectral", "oracle", "closed_form", "small_z_approx"}
    series = {m: np.array([float(r[1]) for r in rows if r[2] == m])
              for m in methods}
    assert np.abs(series["spectral"] - series["oracle"]).max() < 1e-6


def test_evolve_json_format(tmp_path):
    out = tmp_path / "o.json"
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--method", "closed_form", "--npoints", "4",
                "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data[0]["method"] == "closed_form"
    assert len(data[0]["t"]) == 5


def test_reproduce_fig1_schema(tmp_path):
    # z1 = 1 steady states need cutoff >= 20 to clear the kernel tolerance
    out = tmp_path / "fig1.csv"
    assert run(["reproduce", "fig1", "--cutoff", "22", "--trunc0", "8",
                "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["z1", "sector", "trunc", "diff"]
    z1s = {r[0] for r in rows}
    assert z1s == {"0.2", "1.0"}
    truncs = sorted({int(r[2]) for r in rows})
    assert truncs == [2, 4, 6]


def test_reproduce_fig2_schema_and_closed_form_value(tmp_path):
    out = tmp_path / "fig2.csv"
    assert run(["reproduce", "fig2", "--cutoff", "12", "--trunc", "5",
                "--npoints", "16", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "value", "method"]
    methods = {r[2] for r in rows}
    assert {"closed_form", "small_z_approx", "oracle", "spectral"} <= methods
    assert any(m.startswith("spectral_trunc") for m in methods)
    closed = {float(r[0]): float(r[1]) for r in rows if r[2] == "closed_form"}
    want = np.exp(-4 * 0.04 * (1 - np.exp(-10.0)))
    assert closed[10.0] == pytest.approx(want, abs=1e-12)
    # panel rows evaluated at the three reference times
    panel_ts = {float(r[0]) for r in rows if r[2].startswith("spectral_trunc")}
    assert panel_ts == {0.1, 1.0, 10.0}


def test_reproduce_fig3_schema(tmp_path):
    out = tmp_path / "fig3.csv"
    assert run(["reproduce", "fig3", "--cutoff", "10", "--npoints", "6",
                "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "z2", "value", "method"]
    z2s = sorted({float(r[1]) for r in rows})
    assert z2s == [0.0, 0.1, 0.2, 0.4]
    assert {r[3] for r in rows} == {"closed_form", "oracle"}


def test_exit_code_usage_error():
    assert run(["spectrum", "--model", f"{MODELS}/example1.json",
                "--no-such-flag"]) == 64
    assert run(["unknown-command"]) == 64
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--npoints", "-3"]) == 64
    assert run(["spectrum", "--model", f"{MODELS}/example1.json",
                "--cutoff", "0"]) == 64


def test_exit_code_model_error(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert run(["spectrum", "--model", str(missing)]) == 1
    ok = tmp_path / "ok.json"
    ok.write_text('{"n": 1, "H": [[[1.0, 0.0]]], '
                  '"jumps": [{"l": [[1.0, 0.0]]}]}')
    assert run(["spectrum", "--model", str(ok), "--out",
                str(tmp_path / "s.json")]) == 0
    worse = tmp_path / "worse.json"
    worse.write_text('{"n": 2, "H": [[[0,0],[1,0]],[[0,0],[0,0]]]}')
    assert run(["spectrum", "--model", str(worse)]) == 1
    assert "model error" in capsys.readouterr().err


def test_exit_code_numerical_failure(capsys):
    # the squeezing-only model has exactly resonant rapidities +-1
    assert run(["spectrum", "--model", f"{MODELS}/resonant_squeeze.json"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_bad_sector_rejected():
    assert run(["ness", "--model", f"{MODELS}/example1.json",
                "--sector", "+2,-1", "--cutoff", "8"]) == 1
    assert run(["ness", "--model", f"{MODELS}/example1.json",
                "--sector", "1", "--cutoff", "8"]) == 1


def test_closed_form_requires_conforming_model(tmp_path):
    path = tmp_path / "generic.json"
    save_model(ModelSpec.of(n=1, H=[[1.0]],
                            jumps=[([1.0], [0.0], [0.0])]), path)
    assert run(["evolve", "--model", str(path),
                "--method", "closed_form", "--npoints", "4"]) == 1


def test_closed_form_requires_reference_initial_state():
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--method", "closed_form", "--initial", "fock:1",
                "--npoints", "4"]) == 1
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--method", "closed_form", "--spin", "up",
                "--npoints", "4"]) == 1


def test_evolve_coherent_initial_state(tmp_path):
    out = tmp_path / "coh.csv"
    assert run(["evolve", "--model", f"{MODELS}/example1.json",
                "--method", "oracle", "--initial", "coherent:0.3,0.1",
                "--spin", "mixed", "--observable", "number",
                "--cutoff", "10", "--npoints", "5", "--tmax", "2",
                "--out", str(out)]) == 0
    header, rows = read_csv(out)
    # a weakly displaced mode decays towards the small steady occupation
    first, last = float(rows[0][1]), float(rows[-1][1])
    assert first == pytest.approx(0.3**2 + 0.1**2, abs=1e-6)
    assert last < first
