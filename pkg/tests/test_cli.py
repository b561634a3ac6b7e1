import csv
import json
import math

import numpy as np
import pytest
import yaml

from nonlocal_burgers.cli import main
from nonlocal_burgers.config import apply_overrides, parse_config, shipped_config, SHIPPED
from nonlocal_burgers.errors import ConfigParse

SMALL = ["--set", "solver.t_end=10", "--set", "solver.snapshot_times=[1, 10]"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_shipped_configs_parse():
    for name in SHIPPED:
        cfg = parse_config(shipped_config(name))
        cfg.build_grid()


def test_overrides_and_errors():
    data = apply_overrides(shipped_config("default"), ["solver.epsilon=0.1", "grid.h=0.1"])
    cfg = parse_config(data)
    assert cfg.solver.epsilon == 0.1 and cfg.grid["h"] == 0.1
    with pytest.raises(ConfigParse, match="riemann"):
        parse_config(apply_overrides(shipped_config("default"), ["riemann.u_minus=3"]))
    with pytest.raises(ConfigParse, match="kernel"):
        parse_config(apply_overrides(shipped_config("default"), ["kernel.family=cauchy"]))
    with pytest.raises(ConfigParse):
        apply_overrides({}, ["no_equals_sign"])


def test_run_default_config(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path)]) == 0
    for t in ("1", "10", "100"):
        rows = read_csv(tmp_path / f"snapshot_t{t}.csv")
        assert list(rows[0]) == ["x", "u"]
        u = np.array([float(r["u"]) for r in rows])
        assert u.max() <= 1 + 1e-8
    side = json.loads((tmp_path / "run.json").read_text())
    assert side["diagnostics"]["steps"] > 0


def test_sidecar_round_trip(tmp_path):
    assert main(["run", "--out", str(tmp_path), *SMALL]) == 0
    side = json.loads((tmp_path / "run.json").read_text())
    again = parse_config(side["config"])
    assert again.to_dict() == side["config"]


def test_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--out", str(a), *SMALL]) == 0
    assert main(["run", "--out", str(b), *SMALL]) == 0
    assert (a / "snapshot_t10.csv").read_bytes() == (b / "snapshot_t10.csv").read_bytes()


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("NONLOCAL_BURGERS_OUT", str(tmp_path / "env"))
    assert main(["run", *SMALL]) == 0
    assert (tmp_path / "env" / "snapshot_t1.csv").exists()


def test_config_file_and_bad_riemann(tmp_path, capsys):
    data = shipped_config("default")
    data["riemann"] = {"u_minus": 1.0, "u_plus": -1.0}
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(data))
    assert main(["run", "--config", str(path), "--out", str(tmp_path)]) != 0
    assert "riemann" in capsys.readouterr().err


def test_fan_hit_boundary_message(tmp_path, capsys):
    code = main(["run", "--out", str(tmp_path), "--set", "grid.left=-30", "--set", "grid.right=30",
                 "--set", "solver.t_end=50", "--set", "solver.snapshot_times=[50]"])
    assert code != 0
    err = capsys.readouterr().err
    assert "grid.left=-70" in err and "grid.right=70" in err


def test_rates_replay_planted_series(tmp_path):
    path = tmp_path / "planted.csv"
    t = np.geomspace(10, 1000, 9).tolist()
    path.write_text("time,err_pinf\n" + "".join(f"{a!r},{3 * a ** -0.5!r}\n" for a in t))
    assert main(["rates", "--replay", str(path), "--out", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "replay_err_pinf.json").read_text())
    assert fit["exponent"] == pytest.approx(-0.5, abs=1e-6)


def test_rates_default_config(tmp_path):
    assert main(["rates", "--out", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "rate_fit_pinf.json").read_text())
    assert fit["sqrt_log"]["exponent"] <= -0.45
    assert fit["none"]["exponent"] < 0
    for p in ("1", "2", "inf"):
        assert (tmp_path / f"rate_fit_p{p}.json").exists()
    rows = read_csv(tmp_path / "norms.csv")
    ratio = np.array([float(r["l1_viscous_over_log"]) for r in rows if float(r["time"]) >= 10])
    assert ratio.max() <= 1.1 * ratio[0]


def test_verify_default_config(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "suite.csv")
    assert all(r["passed"] == "True" for r in rows if r["severity"] == "required")
    assert "suite: PASS" in capsys.readouterr().out


QUICK = ["--set", "solver.t_end=100",
         "--set", "solver.snapshot_times=[1, 2, 3, 5, 8, 10, 16, 25, 40, 63, 100]",
         "--set", "verify.rate_window=[1, 100]", "--set", "verify.identity_draws=100"]


def test_verify_break_flux(tmp_path, capsys):
    assert main(["verify", "--break=flux", "--out", str(tmp_path), *QUICK]) != 0
    rows = {r["name"]: r for r in read_csv(tmp_path / "suite.csv")}
    assert rows["conservation"]["passed"] == "False"


def test_verify_only(tmp_path):
    assert main(["verify", "--only=comparison", "--out", str(tmp_path), *QUICK]) == 0
    assert [r["name"] for r in read_csv(tmp_path / "suite.csv")] == ["comparison"]


def test_cross_validate_default(tmp_path):
    assert main(["cross-validate", "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "cross_validate.json").read_text())
    assert out["max_discrepancy"] <= 1e-3


def test_cross_validate_refinement(tmp_path):
    gaps = []
    for h in (0.05, 0.025):
        out = tmp_path / str(h)
        assert main(["cross-validate", "--out", str(out), "--set", f"grid.h={h}",
                     "--set", "solver.t_end=10", "--set", "solver.snapshot_times=[0, 1, 10]"]) == 0
        gaps.append(json.loads((out / "cross_validate.json").read_text())["max_discrepancy"])
    assert gaps[0] / gaps[1] >= 3


def test_cross_validate_rejects_gaussian(tmp_path, capsys):
    code = main(["cross-validate", "--out", str(tmp_path), "--set", "kernel={family: gaussian, width: 1.0}"])
    assert code != 0
    assert "WrongKernel" in capsys.readouterr().err


def test_eps_limit_command(tmp_path):
    assert main(["eps-limit", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "eps_limit.csv")
    d = [float(r["l1_distance"]) for r in rows]
    assert d[-1] == 0.0 and all(b < a for a, b in zip(d, d[1:]))
    assert all(math.isfinite(x) for x in d)
