import hashlib
import json
import os

import pytest

from percolab.cli import main
from percolab.config import ConfigError, load_config, parse_thresholds
from percolab.manifest import load_manifest, verify_manifest


def run_cli(args):
    return main([str(a) for a in args])


def digest_dir(path):
    out = {}
    for name in sorted(os.listdir(path)):
        if name.endswith(".csv"):
            with open(os.path.join(path, name), "rb") as fh:
                out[name] = hashlib.sha256(fh.read()).hexdigest()
    return out


def test_parse_thresholds_grammar():
    assert parse_thresholds("1,2,5") == [1, 2, 5]
    assert parse_thresholds("10:14") == [10, 11, 12, 13, 14]
    assert parse_thresholds("10:20:5") == [10, 15, 20]
    geom = parse_thresholds("geom:10:1000:5")
    assert geom[0] == 10 and geom[-1] == 1000 and len(geom) == 5
    with pytest.raises(ConfigError):
        parse_thresholds("geom:10:5:3")


def test_config_file_parsing(tmp_path):
    cfg_path = tmp_path / "tail.cfg"
    cfg_path.write_text(
        "# tail demo\n"
        "experiment = tail\n"
        "model = tree:k=3\n"
        "p = 0.5\n"
        "thresholds = 1:20\n"
        "replicates = 1000\n"
        "seed = 7\n"
        f"out = {tmp_path / 'res'}\n")
    cfg = load_config(cfg_path)
    assert cfg.experiment == "tail" and cfg.p_values == [0.5]
    assert cfg.thresholds == list(range(1, 21))


def test_config_errors_are_line_anchored(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("experiment = tail\nmodel = tree:k=3\n"
                        "replicates = many\nseed = 1\n")
    with pytest.raises(ConfigError) as err:
        load_config(cfg_path)
    assert f"{cfg_path}:3" in str(err.value)


def test_missing_seed_rejected(tmp_path):
    cfg_path = tmp_path / "noseed.cfg"
    cfg_path.write_text("experiment = tail\nmodel = tree:k=3\np = 0.4\n")
    with pytest.raises(ConfigError) as err:
        load_config(cfg_path)
    assert "seed" in str(err.value)


def test_cli_exit_code_on_bad_config(tmp_path, capsys):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("experiment = tail\nmodel = tree:k=3\nseed = x\n")
    assert run_cli(["run", cfg_path]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_missing_file_exit_2(capsys):
    assert run_cli(["run", "/nonexistent/path.cfg"]) == 2


def test_tail_run_determinism(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run_cli(["tail", "--model", "tree:k=3", "--p", "0.45",
                        "--thresholds", "1:30", "--replicates", 20000,
                        "--seed", 99, "--out", out])
        assert code == 0
        outs.append(digest_dir(out))
    assert outs[0] == outs[1]
    # workers=4 gives byte-identical CSVs too
    out4 = tmp_path / "w4"
    code = run_cli(["tail", "--model", "tree:k=3", "--p", "0.45",
                    "--thresholds", "1:30", "--replicates", 20000,
                    "--seed", 99, "--workers", 4, "--out", out4])
    assert code == 0
    assert digest_dir(out4) == outs[0]


def test_tail_csv_schema(tmp_path, capsys):
    out = tmp_path / "r"
    run_cli(["tail", "--model", "tree:k=3", "--p", "0.4387654321",
             "--thresholds", "1,2,4", "--replicates", 5000, "--seed", 1,
             "--out", out])
    lines = (out / "tail.csv").read_text().split("\n")
    assert lines[0] == "statistic,p,threshold,estimate,ci_low,ci_high,replicates,budget"
    row = lines[1].split(",")
    assert row[0] == "volume" and row[1] == "0.4387654321"
    assert (out / "tail.csv").read_bytes().endswith(b"\n")
    assert b"\r" not in (out / "tail.csv").read_bytes()


def test_manifest_echo_round_trip(tmp_path, capsys):
    out1 = tmp_path / "one"
    run_cli(["moments", "--model", "tree:k=3", "--epsilon", "0.05,0.1",
             "--side", "sub", "--replicates", 5000, "--k-max", 2,
             "--seed", 5, "--out", out1])
    doc = verify_manifest(out1 / "run_manifest.json")
    echo = doc["config"]
    out2 = tmp_path / "two"
    pairs = []
    for key, value in echo.items():
        if key == "out":
            value = out2
        if isinstance(value, list):
            value = ",".join(str(x) for x in value)
        pairs.append((key, str(value), 0))
    from percolab.config import config_from_pairs
    from percolab.runner import run as run_experiment
    cfg = config_from_pairs(pairs, origin="<echo>")
    code, _ = run_experiment(cfg)
    assert code == 0
    assert digest_dir(out1) == digest_dir(out2)


def test_estimator_error_exit_3_with_manifest(tmp_path, capsys):
    out = tmp_path / "viol"
    code = run_cli(["tail", "--model", "tree:k=3", "--p", "0.4",
                    "--thresholds", "1:100", "--budget-edges", 200,
                    "--replicates", 100, "--seed", 2, "--out", out])
    assert code == 3
    doc = load_manifest(out / "run_manifest.json")
    assert doc["verdicts"]["error"]["kind"] == "BudgetError"


def test_russo_check_cli(tmp_path, capsys):
    out = tmp_path / "russo"
    code = run_cli(["russo-check", "--model", "tree:k=3", "--edges", 8,
                    "--trials", 6, "--seed", 1, "--out", out])
    assert code == 0
    doc = load_manifest(out / "run_manifest.json")
    assert doc["verdicts"]["russo_identity_pass"] is True
    assert doc["verdicts"]["russo_max_residual"] < 1e-9


def test_oracle_compare_cli_small(tmp_path, capsys):
    out = tmp_path / "oc"
    code = run_cli(["oracle-compare", "--model", "tree:k=3", "--p", "0.45",
                    "--replicates", 200000, "--max-threshold-volume", 60,
                    "--max-threshold-radius", 25, "--budget-edges", 10 ** 6,
                    "--seed", 3, "--out", out])
    assert code == 0
    doc = load_manifest(out / "run_manifest.json")
    assert doc["verdicts"]["oracle_coverage_pass"] is True


def test_pc_scan_cli(tmp_path, capsys):
    out = tmp_path / "scan"
    code = run_cli(["pc-scan", "--model", "treexcycle:k=3,m=4",
                    "--p-grid", "0.1,0.3,0.5", "--replicates", 2000,
                    "--budget-edges", 3000, "--seed", 4, "--out", out])
    assert code == 0
    rows = (out / "pcscan.csv").read_text().strip().split("\n")
    assert len(rows) == 4
    theta = [float(r.split(",")[1]) for r in rows[1:]]
    assert theta[0] <= theta[1] <= theta[2]


def test_diagnostics_cli(tmp_path, capsys):
    out = tmp_path / "diag"
    code = run_cli(["diagnostics", "--model", "tree:k=3", "--p", "0.5",
                    "--radii", "4,5,6", "--replicates", 500, "--seed", 5,
                    "--out", out])
    assert code == 0
    names = set(os.listdir(out))
    assert {"ball_norms.csv", "triangle.csv", "twopoint.csv",
            "run_manifest.json"} <= names


def test_collapse_cli_oracle(tmp_path, capsys):
    out = tmp_path / "col"
    code = run_cli(["collapse", "--model", "tree:k=3", "--epsilon",
                    "0.02,0.04", "--oracle", "true", "--seed", 6,
                    "--out", out])
    assert code == 0
    doc = load_manifest(out / "run_manifest.json")
    assert doc["verdicts"]["collapse_max_distance"] < 0.15


def test_manifest_digests_verify(tmp_path, capsys):
    out = tmp_path / "v"
    run_cli(["tail", "--model", "lattice:d=2", "--p", "0.3",
             "--thresholds", "1:10", "--replicates", 2000, "--seed", 7,
             "--out", out])
    verify_manifest(out / "run_manifest.json")
    # human tampering must be caught
    target = out / "tail.csv"
    target.write_bytes(target.read_bytes() + b"x")
    with pytest.raises(ValueError):
        verify_manifest(out / "run_manifest.json")
