import csv
import io
import json
import math
import subprocess
import sys

import pytest

from shrinker_spectra import __version__
from shrinker_spectra.cli import ConfigError, RunConfig, main, resolve


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    buf = io.StringIO()
    code = main(list(args) + ["--out", str(out)], stream=buf)
    return code, buf.getvalue(), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_round_trip():
    cfg = RunConfig(command="scan", model="cylinder", m=2, k=1, tau=0.5, potential="f/(4*tau)",
                    levels=(1, 2, 3), h=(0.5, 0.25, 0.125), thetas=(0.0, 1.0))
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"bogus": 1})


def test_resolve_fills_defaults():
    cfg = resolve(RunConfig(model="cylinder", tau=0.5))
    assert (cfg.n, cfg.m, cfg.k) == (3, 2, 1)
    assert len(cfg.levels) == 3 and len(cfg.h) == 3
    with pytest.raises(ConfigError):
        resolve(RunConfig(theorem="9.9"))


def test_verify_harmonic(tmp_path):
    code, text, out = run(["verify", "--theorem", "1.2", "--model", "gaussian", "--n", "1", "--tau", "0.25",
                           "--potential", "x^2"], tmp_path)
    assert code == 0 and "equality_confirmed" in text
    body = json.loads((out / "report.json").read_text())
    assert abs(body["report"]["gap"]) <= 5e-4
    assert body["version"] == __version__ and body["config"]["potential"] == "x^2"
    eff = json.loads((out / "effective-config.json").read_text())
    assert eff["tau"] == 0.25 and eff["h"] and eff["seed"] == 20240611
    rows = read_csv(out / "summary.csv")
    assert list(rows[0]) == ["theorem", "model", "potential", "resolution", "L", "lambda0", "rhs", "gap", "verdict"]
    assert rows[-1]["resolution"] == "extrapolated"


def test_verify_drifted(tmp_path):
    code, _, out = run(["verify", "--theorem", "1.4", "--model", "gaussian", "--n", "1", "--tau", "0.25",
                        "--potential", "2*x"], tmp_path)
    assert code == 0
    report = json.loads((out / "report.json").read_text())["report"]
    assert report["lhs"]["extrapolated"] == pytest.approx(-1.0, abs=5e-4)


def test_verify_exit_codes(tmp_path, capsys):
    code, _, _ = run(["verify", "--potential", "x^^2"], tmp_path)
    assert code == 2 and "error" in capsys.readouterr().err
    code, _, _ = run(["verify", "--potential", "x"], tmp_path)
    assert code == 2
    code, _, _ = run(["verify", "--tau", "-1"], tmp_path)
    assert code == 2
    code, _, _ = run(["verify", "--theorem", "1.5", "--model", "sphere", "--tau", "0.1", "--potential", "0",
                      "--levels", "1", "2", "3"], tmp_path)
    assert code == 4
    with pytest.raises(SystemExit) as info:
        main(["verify", "--no-such-flag"])
    assert info.value.code == 2


def test_verify_dump_matrix(tmp_path):
    code, _, out = run(["verify", "--theorem", "1.4", "--potential", "x^2", "--dump-matrix"], tmp_path)
    assert code == 0
    assert (out / "operator.mtx").read_text().startswith("%%MatrixMarket")
    assert (out / "weights.mtx").exists() and (out / "operator-conjugated.mtx").exists()
    assert (out / "nodes.csv").read_text().splitlines()[0] == "node_id,x1"


def test_determinism(tmp_path):
    args = ["verify", "--potential", "x^4", "--seed", "7"]
    _, _, a = run(args, tmp_path, "a")
    _, _, b = run(args, tmp_path, "b")
    strip = lambda p: p.read_text().replace(str(p.parent), "OUT")  # noqa: E731
    for name in ("report.json", "summary.csv", "effective-config.json"):
        assert strip(a / name) == strip(b / name)


def test_entropy(tmp_path):
    code, text, out = run(["entropy", "--model", "cylinder", "--m", "2", "--k", "1"], tmp_path)
    assert code == 0
    mu = json.loads((out / "report.json").read_text())["mu_s"]
    assert abs(mu - (math.log(2.0) - 1.0)) <= 1e-15
    _, _, out = run(["entropy", "--model", "gaussian", "--n", "3", "--tau", "1"], tmp_path, "g")
    assert json.loads((out / "report.json").read_text())["mu_s"] == 0.0


def test_entropy_check_w(tmp_path):
    code, _, out = run(["entropy", "--model", "sphere", "--n", "2", "--tau", "0.5", "--check-w"], tmp_path)
    assert code == 0
    rows = read_csv(out / "entropy.csv")
    assert len(rows) >= 3
    errs = [abs(float(r["W_minus_mu_s"])) for r in rows]
    assert errs[-1] < errs[0] and errs[-1] <= 1e-3
    assert all(abs(float(r["W"]) - float(r["K"])) <= 1e-10 for r in rows)


def test_converge(tmp_path):
    code, text, out = run(["converge", "--potential", "x^2"], tmp_path)
    assert code == 0
    rows = read_csv(out / "convergence.csv")
    assert {"h", "lambda0", "extrapolated"} <= set(rows[0])
    report = json.loads((out / "report.json").read_text())
    assert report["observed_order"] == pytest.approx(2.0, abs=0.05)


def test_scan(tmp_path):
    code, _, out = run(["scan", "--thetas", "0", "0.25", "0.5", "0.75", "1"], tmp_path)
    assert code == 0
    rows = read_csv(out / "summary.csv")
    gaps = [float(r["gap"]) for r in rows]
    assert len(rows) == 5 and min(range(5), key=lambda i: gaps[i]) == 0
    assert all(r["verdict"] in ("holds", "equality_confirmed") for r in rows)


def test_gibbs(tmp_path):
    code, text, out = run(["gibbs", "--seed", "42", "--trials", "1000"], tmp_path)
    assert code == 0 and "0 violations" in text
    assert json.loads((out / "report.json").read_text())["gibbs"]["violations"] == 0


def test_config_file(tmp_path):
    cfg = RunConfig(command="verify", potential="x^2+1", out=str(tmp_path / "cfg-out"))
    path = tmp_path / "run.json"
    path.write_text(cfg.to_json())
    assert main(["verify", "--config", str(path)], stream=io.StringIO()) == 0
    report = json.loads((tmp_path / "cfg-out" / "report.json").read_text())
    assert report["config"]["potential"] == "x^2+1"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shrinker_spectra", "gibbs", "--trials", "20",
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0 and "violations" in proc.stdout
