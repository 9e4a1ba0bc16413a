import json

import pytest
from click.testing import CliRunner

from badlab.cli import config_from_echo, config_hash, main, parse_config

GOLDEN_CFG = "configs/golden.cfg"

CONTROL_CFG = """\
ambient = 1
A_point = 0
A_dir_0 = 1
B_point = 1/2
psi = powerlaw c=1 alpha=1
phi = powerlaw c=1 alpha=1
R = 1
gamma = 23/100
seed = 1
samples = 10
X = 100
T_min = 2
T_max = 20
cert_height = 40
"""

SMALL_MC_CFG = """\
# small convergent instance on a line through the cubic pair
ambient = 2
A_point = cbrt2, cbrt4
A_dir_0 = 1, cbrt2
B_point = cbrt2, cbrt4
psi = powerlaw c=1 alpha=1/2
phi = powerlog c=1 alpha=1/2 delta=2 T0=2
R = 2
gamma = 1/5
seed = 7
samples = 12
X = 2000
T_min = 2
T_max = 32
cert_height = 64
"""


@pytest.fixture()
def runner():
    return CliRunner()


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_help_and_version(runner):
    assert runner.invoke(main, ["--help"]).exit_code == 0
    out = runner.invoke(main, ["--version"])
    assert out.exit_code == 0 and "badlab" in out.output
    assert runner.invoke(main, ["nosuchcommand"]).exit_code == 2


def test_config_rejects_float_literal(runner, tmp_path):
    cfg = _write(tmp_path, "bad.cfg", CONTROL_CFG.replace("1/2", "0.5"))
    res = runner.invoke(main, ["verify", "--config", cfg, "--T", "2"])
    assert res.exit_code == 2
    assert "config error" in res.output


def test_config_rejects_equal_dims(runner, tmp_path):
    cfg = _write(
        tmp_path, "dims.cfg", CONTROL_CFG.replace("B_point = 1/2", "B_point = 1/2\nB_dir_0 = 1")
    )
    res = runner.invoke(main, ["verify", "--config", cfg, "--T", "2"])
    assert res.exit_code == 2
    assert "dim B < a = dim A" in res.output


def test_config_rejects_inadmissible_rates(runner, tmp_path):
    cfg = _write(
        tmp_path, "rates.cfg",
        CONTROL_CFG.replace("psi = powerlaw c=1 alpha=1", "psi = powerlaw c=1 alpha=2"),
    )
    res = runner.invoke(main, ["verify", "--config", cfg, "--T", "2"])
    assert res.exit_code == 2
    assert "phi(T) <= psi(T)" in res.output


def test_config_missing_key(runner, tmp_path):
    cfg = _write(tmp_path, "missing.cfg", "ambient = 1\n")
    res = runner.invoke(main, ["verify", "--config", cfg, "--T", "2"])
    assert res.exit_code == 2
    assert "missing config key" in res.output


def test_badness_subspace_golden(runner):
    res = runner.invoke(main, ["badness", "--config", GOLDEN_CFG, "--height", "50"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["kind"] == "certificate"
    assert payload["witness"] == [1, 1]
    assert payload["height"] == 50


def test_badness_zero_hit_exits_one(runner, tmp_path):
    cfg = _write(tmp_path, "control.cfg", CONTROL_CFG)
    res = runner.invoke(main, ["badness", "--config", cfg, "--height", "10"])
    assert res.exit_code == 1
    payload = json.loads(res.output)
    assert payload == {"kind": "zero_hit", "witness": [2, 1], "shell": 2}


def test_badness_vector_scan(runner):
    res = runner.invoke(
        main, ["badness", "--config", GOLDEN_CFG, "--vector", "1/2", "--x-max", "50"]
    )
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["kind"] == "vector" and payload["zero_q"] == 2


def test_badness_vector_rejects_floats(runner):
    res = runner.invoke(
        main, ["badness", "--config", GOLDEN_CFG, "--vector", "0.5"]
    )
    assert res.exit_code == 2


def test_enumerate_counts(runner, tmp_path):
    out = tmp_path / "pts"
    res = runner.invoke(
        main,
        ["enumerate", "--config", GOLDEN_CFG, "--T", "5", "--set", "pi",
         "--out", str(out)],
    )
    assert res.exit_code == 0
    assert "pi T=5: 66 points" in res.output
    rows = (out / "points.csv").read_text().splitlines()
    assert rows[0] == "z0,z1"
    assert len(rows) == 67

    res = runner.invoke(
        main, ["enumerate", "--config", GOLDEN_CFG, "--T", "5", "--set", "zeta"]
    )
    assert "zeta T=5: 11 points" in res.output

    res = runner.invoke(
        main, ["enumerate", "--config", GOLDEN_CFG, "--T", "50", "--set", "omega"]
    )
    assert "omega T=50: 1 points" in res.output


def test_enumerate_omega_needs_gamma(runner, tmp_path):
    text = "\n".join(
        l for l in CONTROL_CFG.splitlines() if not l.startswith("gamma")
    )
    cfg = _write(tmp_path, "nogamma.cfg", text)
    res = runner.invoke(main, ["enumerate", "--config", cfg, "--T", "2"])
    assert res.exit_code == 2
    assert "gamma" in res.output


def test_series_table(runner, tmp_path):
    out = tmp_path / "ser"
    res = runner.invoke(
        main,
        ["series", "--config", GOLDEN_CFG, "--N", "10", "--counts-to", "5",
         "--out", str(out)],
    )
    assert res.exit_code == 0
    assert "S_10 = 535069999/153679680" in res.output
    rows = (out / "series.csv").read_text().splitlines()
    header = rows[0].split(",")
    assert header == ["T", "mu", "lambda", "term", "partial_sum",
                      "zeta", "pi_count", "ratio_int", "ratio_cumzeta"]
    assert len(rows) == 11
    first = rows[1].split(",")
    assert first[:5] == ["1", "1", "3/4", "3/4", "3/4"]
    assert first[5:7] == ["3", "6"]  # zeta_1, pi_1 on the full plane
    # counts beyond --counts-to stay blank
    assert rows[5].split(",")[5] != "" and rows[6].split(",")[5] == ""


def test_verify_golden(runner):
    res = runner.invoke(
        main, ["verify", "--config", GOLDEN_CFG, "--T", "20", "--translates", "10"]
    )
    assert res.exit_code == 0
    assert "trivial for all T <= 20" in res.output


def test_verify_control_fails(runner, tmp_path):
    cfg = _write(tmp_path, "control.cfg", CONTROL_CFG)
    res = runner.invoke(main, ["verify", "--config", cfg, "--T", "5"])
    assert res.exit_code == 1
    assert "triviality FAILED at T=2: counterexample (2, 1)" in res.output


def test_montecarlo_refuses_divergent(runner, tmp_path):
    out = tmp_path / "mc"
    res = runner.invoke(
        main, ["montecarlo", "--config", GOLDEN_CFG, "--out", str(out)]
    )
    assert res.exit_code == 2
    assert "refused" in res.output


def test_montecarlo_small_run(runner, tmp_path):
    cfg = _write(tmp_path, "small.cfg", SMALL_MC_CFG)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    res1 = runner.invoke(main, ["montecarlo", "--config", cfg, "--out", str(out1)])
    assert res1.exit_code == 0, res1.output
    res2 = runner.invoke(main, ["montecarlo", "--config", cfg, "--out", str(out2)])
    assert res2.exit_code == 0
    for name in ("report.json", "samples.csv", "tails.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    report = json.loads((out1 / "report.json").read_text())
    manifest = json.loads((out1 / "manifest.json").read_text())
    # the echoed config rebuilds to the same hash the manifest recorded
    rebuilt = config_from_echo(report["config"])
    assert config_hash(rebuilt.describe()) == manifest["config_hash"]
    assert report["zero_count"] == 0
    assert "timing_seconds" in json.loads((out1 / "run_manifest.json").read_text())


def test_raw_config_experiment_roundtrip(tmp_path):
    cfg_path = _write(tmp_path, "small.cfg", SMALL_MC_CFG)
    raw = parse_config(cfg_path)
    cfg = raw.experiment()
    assert cfg.sample_count == 12
    assert cfg.T_range == (2, 32)
    assert cfg.certificate.height == 64
    echo = cfg.describe()
    assert config_hash(echo) == config_hash(config_from_echo(echo).describe())


def test_raw_config_rejects_zero_hit_target(tmp_path):
    cfg_path = _write(tmp_path, "control.cfg", CONTROL_CFG)
    raw = parse_config(cfg_path)
    with pytest.raises(ValueError, match="badly approximable"):
        raw.experiment()
