import csv
import json

import numpy as np
import pytest

from medtest.dataio import serialize_long_csv, serialize_wide_csv
from medtest.main import main
from medtest.models import DenseSample

FAST = ["--grid", "21", "--hx", "0.25", "--hy", "0.25", "--perms", "10", "--seed", "3"]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("MED_TEST_N_JOBS", "MED_PIPELINE_NOISE_MODE", "MED_SMOOTHER_KERNEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def long_csv(sparse_dataset, tmp_path):
    path = tmp_path / "data.csv"
    path.write_text(serialize_long_csv(sparse_dataset))
    return path


def test_test_verb(long_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    dump = tmp_path / "permuted.csv"
    assert main(["test", "-i", str(long_csv), *FAST, "--json", str(out), "--dump-permuted", str(dump)]) == 0
    report = json.loads(out.read_text())
    assert report["result"]["n_permutations"] == 10
    assert report["noise_mode"] == "equal_errors"
    with open(dump) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 9
    assert rows[0]["replicate"] == "0"
    assert "MARGINAL ENERGY DISTANCE TEST" in capsys.readouterr().out


def test_test_verb_exports_curves(long_csv, tmp_path):
    assert main(["test", "-i", str(long_csv), *FAST, "--export-curves", str(tmp_path / "curves")]) == 0
    assert sorted(p.name for p in (tmp_path / "curves").iterdir()) == ["g1.csv", "g2.csv", "g3.csv", "integrand.csv"]


def test_usage_errors_exit_one(long_csv):
    with pytest.raises(SystemExit) as e:
        main(["test"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["test", "-i", str(long_csv), "--noise-mode", "loud"])
    assert e.value.code == 1


def test_bad_option_value_exits_one(long_csv):
    assert main(["test", "-i", str(long_csv), "--perms", "1"]) == 1


def test_time_out_of_range_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("subject_id,group,time,value\ns1,x,1.2,1\ns2,y,0.3,3\n")
    assert main(["test", "-i", str(path)]) == 2
    assert "time out of [0,1]" in capsys.readouterr().err


def test_missing_input_exits_two(tmp_path):
    assert main(["test", "-i", str(tmp_path / "absent.csv")]) == 2


def test_rescale_accepts_raw_times(tmp_path):
    path = tmp_path / "days.csv"
    rows = ["subject_id,group,time,value"]
    for i in range(6):
        group = "x" if i < 3 else "y"
        for day in (10 + i, 40 + i, 90 - i):
            rows.append(f"s{i},{group},{day},{(i * day) % 7 - 3}")
    path.write_text("\n".join(rows) + "\n")
    assert main(["test", "-i", str(path), "--time-range", "0", "100", "--grid", "11", "--hx", "1", "--hy", "1",
                 "--perms", "5"]) == 0


def test_noise_estimate_prints_json(long_csv, tmp_path, capsys):
    assert main(["noise-estimate", "-i", str(long_csv), "--curves", str(tmp_path / "noise")]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("{"):])
    assert set(payload) == {"sigma2_x", "sigma2_y"}
    assert (tmp_path / "noise" / "cov_diag_x.csv").exists()


def test_dense_ed_verb(tmp_path):
    grid = np.linspace(0, 1, 11)
    rng = np.random.default_rng(0)
    sample = DenseSample(grid, rng.normal(size=(6, 11)), 3.0 + rng.normal(size=(6, 11)))
    path = tmp_path / "wide.csv"
    path.write_text(serialize_wide_csv(sample))
    out = tmp_path / "dense.json"
    assert main(["dense-ed", "-i", str(path), "--perms", "50", "--alpha", "0.2", "--json", str(out)]) == 0
    result = json.loads(out.read_text())
    assert result["p_value"] <= 0.1
    assert result["reject"] is True


def test_simulate_verb(tmp_path):
    out = tmp_path / "table.csv"
    args = ["simulate", "--design", "example1", "--n", "12", "--m", "12", "--reps", "2", "--out", str(out),
            "--grid", "11", "--hx", "0.3", "--hy", "0.3", "--perms", "5", "--alpha", "0.5"]
    assert main(args) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["(n,m)"] == "(12,12)"
    assert rows[0]["reps"] == "2"


def test_simulate_dense_without_grid_uses_configured_grid(tmp_path, monkeypatch):
    monkeypatch.setenv("MED_SIMULATE_DENSE_GRID", "11")
    out = tmp_path / "dense.csv"
    args = ["simulate", "--design", "example2", "--n", "12", "--m", "12", "--reps", "1", "--dense", "--out", str(out),
            "--grid", "11", "--hx", "0.3", "--hy", "0.3", "--perms", "5", "--alpha", "0.5"]
    assert main(args) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["design"] == "example2-dense"


@pytest.mark.parametrize("verb", ["test", "dense-ed", "noise-estimate"])
def test_non_utf8_input_exits_two(tmp_path, verb):
    path = tmp_path / "latin1.csv"
    path.write_bytes("subject_id,group,time,value\nJos\xe9,x,0.1,1\n".encode("latin-1"))
    assert main([verb, "-i", str(path)]) == 2
