import json
import re

import pytest

from vkakeya import cli
from vkakeya.runs import CSV_FIELDS, QUANTITIES, read_manifest, read_results


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out.strip().splitlines()[-1] if out.out.strip() else None, out.err


def test_geometry_run_layout(tmp_path, capsys):
    code, path, _ = run(["geometry", "--n", "2", "3", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    m = read_manifest(path)
    assert re.fullmatch(r"geometry-\d{8}T\d{6}-[0-9a-f]{10}", m.run_id)
    assert m.seed == 0 and m.rng_algorithm.startswith("numpy.Philox")
    rows = read_results(path)
    assert tuple(rows[0]) == CSV_FIELDS
    assert {r["quantity"] for r in rows} <= set(QUANTITIES)
    area = [r for r in rows if r["quantity"] == "union_area" and r["n"] == "3"][0]
    assert re.fullmatch(r"-?\d\.\d{16}e[+-]\d\d", area["value"])
    for name in ("family_n2.json", "family_n3.svg"):
        assert (tmp_path / m.run_id / name).exists()


def test_out_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VK_OUT_DIR", str(tmp_path / "env"))
    code, path, _ = run(["variation-demo", "--profile", "constant"], capsys)
    assert code == 0 and path.startswith(str(tmp_path / "env"))
    assert (tmp_path / "env").is_dir()


def test_replay_is_bit_for_bit(tmp_path, capsys):
    code, path, _ = run(["freq-claim", "--n", "4", "--eps", "1/64", "--samples", "500", "--out-dir", str(tmp_path / "a")], capsys)
    assert code == 0
    code, line, _ = run(["replay", path, "--out-dir", str(tmp_path / "b")], capsys)
    assert code == 0 and "identical" in line


def test_replay_detects_tampering(tmp_path, capsys):
    _, path, _ = run(["geometry", "--n", "3", "--out-dir", str(tmp_path / "a")], capsys)
    csv_path = tmp_path / "a" / read_manifest(path).run_id / "results.csv"
    text = csv_path.read_text().replace("8.0000000000000000e+00", "9.0000000000000000e+00")
    csv_path.write_text(text)
    code, line, _ = run(["replay", path, "--out-dir", str(tmp_path / "b")], capsys)
    assert code == 3 and "DIFFERENT" in line


def test_repeat_runs_get_distinct_directories(tmp_path, capsys):
    argv = ["geometry", "--n", "2", "--out-dir", str(tmp_path)]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first != second


@pytest.mark.parametrize(
    "argv",
    [
        ["geometry", "--n", "13"],
        ["freq-claim", "--n", "0"],
        ["freq-claim", "--samples", "0"],
        ["lower-bound", "--eps", "1/4"],
        ["squarefn", "--lambda", "1000", "--grid-size", "64", "--trials", "1"],
        ["scaling", "--n-min", "5", "--n-max", "4"],
        ["freq-claim", "--n", "3", "--nu", "8"],
    ],
)
def test_usage_errors_exit_2_and_leave_nothing(tmp_path, capsys, argv):
    code, _, err = run(argv + ["--out-dir", str(tmp_path)], capsys)
    assert code == 2 and err
    assert not any(tmp_path.iterdir())


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == 2


def test_tolerance_failure_exits_3(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "DERIVATIVE_CONSTANT", 1e-3)
    argv = ["derivative-bound", "--lambda", "8", "--trials", "1", "--grid-size", "64", "--out-dir", str(tmp_path)]
    code, path, err = run(argv, capsys)
    assert code == 3 and "tolerance" in err
    # the run is still recorded for inspection
    assert read_results(path)


def test_squarefn_and_derivative_rows(tmp_path, capsys):
    code, path, _ = run(
        ["squarefn", "--lambda", "16", "--trials", "2", "--grid-size", "128", "--out-dir", str(tmp_path)], capsys
    )
    assert code == 0
    rows = read_results(path)
    assert {(r["quantity"], r["p"]) for r in rows} >= {("squarefn_Q_max", "2.0000000000000000e+00")}
    assert all(r["lambda"] == "1.6000000000000000e+01" for r in rows)


def test_variation_demo_writes_series(tmp_path, capsys):
    code, path, _ = run(["variation-demo", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    m = read_manifest(path)
    assert (tmp_path / m.run_id / "series.csv").read_text().startswith("t,re,im")
    gap = [r for r in read_results(path) if r["quantity"] == "variation_brute_force_gap"][0]
    assert float(gap["value"]) == 0.0


def test_lower_bound_outputs(tmp_path, capsys):
    code, path, _ = run(["lower-bound", "--n", "3", "--heatmap-size", "64", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    d = tmp_path / read_manifest(path).run_id
    ledger = json.loads((d / "ledger.json").read_text())
    assert ledger["n"] == 3 and ledger["C_lower"] > 0
    assert (d / "reach_nu0.pgm").exists() and (d / "reach_nu7.pgm").exists()
