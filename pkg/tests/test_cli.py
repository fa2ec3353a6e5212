import csv

import numpy as np
import pytest

from qftlm.cli import main
from qftlm.experiments import parse_config
from qftlm.thermal import ThermalCurve
from qftlm.validation import ConfigError


def _run(tmp_path, text, kind, name="run"):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text)
    out = tmp_path / name
    return main([kind, "--config", str(cfg), "--out", str(out)]), out


CURVE = "experiment = curve\nL = 3\nD = 5\nK = 2\nT = 0.5, 2\n"


def test_curve_writes_csv_and_log(tmp_path, capsys):
    code, out = _run(tmp_path, CURVE, "curve")
    assert code == 0
    curve = ThermalCurve.from_csv(out / "qftlm_L3_D5.csv")
    assert curve.metadata["K"] == "2" and curve.metadata["evolution"] == "trotter(4)"
    assert np.allclose(curve.temperatures, [0.5, 2.0])
    exact = ThermalCurve.from_csv(out / "exact_L3.csv")
    assert exact.metadata["source"] == "exact"
    log = (out / "run.log").read_text().splitlines()
    assert sum(line.startswith("regdiag k=") for line in log) == 2
    assert "qftlm_L3_D5.csv" in capsys.readouterr().out


def test_runs_are_byte_identical(tmp_path):
    _, a = _run(tmp_path, CURVE, "curve", "a")
    _, b = _run(tmp_path, CURVE, "curve", "b")
    for name in ("qftlm_L3_D5.csv", "exact_L3.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_override_changes_output(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CURVE)
    main(["curve", "--config", str(cfg), "--out", str(tmp_path / "x")])
    main(["curve", "--config", str(cfg), "--out", str(tmp_path / "y"), "--seed", "9"])
    x = ThermalCurve.from_csv(tmp_path / "x" / "qftlm_L3_D5.csv")
    y = ThermalCurve.from_csv(tmp_path / "y" / "qftlm_L3_D5.csv")
    assert not np.allclose(x.energy, y.energy)


def test_explicit_term_list(tmp_path):
    text = "experiment = curve\nhamiltonian = -1 ZZ; 0.5 XI; 0.5 IX\nD = 5\nK = 1\nevolution = exact\nT = 1\n"
    code, out = _run(tmp_path, text, "curve")
    assert code == 0
    assert (out / "qftlm_L2_D5.csv").exists()


@pytest.mark.parametrize(
    "text",
    [
        "experiment = curve\nL = 3\nK = 0\n",
        "experiment = curve\nL = 3\nfoo = 1\n",
        "experiment = curve\nL = 3\nD = five\n",
        "experiment = oracle\nL = 3\n",
        "experiment = curve\nL = 3\nevolution = imaginary\n",
        "experiment = curve\nhamiltonian = 1 XQ\n",
    ],
)
def test_config_errors_exit_2(tmp_path, text, capsys):
    code, _ = _run(tmp_path, text, "curve")
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["curve", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    code, _ = _run(tmp_path, CURVE + "mu = 1e6\n", "curve")
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_oracle_subcommand(tmp_path):
    code, out = _run(tmp_path, "experiment = oracle\nL = 2, 3\nT_points = 5\n", "oracle")
    assert code == 0
    assert len(ThermalCurve.from_csv(out / "exact_L2.csv").energy) == 5


def test_exact_trotter_sweep_is_flat(tmp_path):
    text = "experiment = trotter-sweep\nL = 3\nD = 7\nK = 2\nN_T = 1, 2\nevolution = exact\nT = 0.1, 1\n"
    code, out = _run(tmp_path, text, "trotter-sweep")
    assert code == 0
    lines = [l for l in (out / "trotter_slice.csv").read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert len(rows) == 2 and rows[0]["error"] == rows[1]["error"]


def test_single_size_has_no_trend(tmp_path):
    text = "experiment = size-sweep\nL = 4\nD = 7\nK = 2\nT_eval = 1\n"
    code, out = _run(tmp_path, text, "size-sweep")
    assert code == 0
    assert "trend_" not in (out / "size_sweep.csv").read_text()


def test_noise_and_eta_sweeps(tmp_path):
    text = "experiment = noise-sweep\nL = 3\nD = 7\nK = 2\nevolution = exact\nnoise.sigma = 0, 1e-4\nT_points = 5\n"
    assert _run(tmp_path, text, "noise-sweep")[0] == 0
    text = "experiment = eta-sweep\nL = 3\nD = 7\nK = 2\nevolution = exact\nnoise.sigma = 1e-4\neta = 1e-8, 1e-2\nT_points = 5\n"
    code, out = _run(tmp_path, text, "eta-sweep", "eta")
    assert code == 0
    assert "status" in (out / "eta_sweep.csv").read_text()


def test_parse_config_kind_mismatch():
    with pytest.raises(ConfigError):
        parse_config("experiment = curve\n", "oracle")
    cfg = parse_config("L = 4, 6\nnoise.sigma = 1e-5\n", "noise-sweep")
    assert cfg.L == [4, 6] and cfg.sigma == [1e-5] and cfg.kind == "noise-sweep"
