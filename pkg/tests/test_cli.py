import csv
import json

import numpy as np
import pytest

from pasfhn.cli import main, run
from pasfhn.config import ConfigError, build_config, load_config


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_minimal_config_defaults(tmp_path):
    p = write(tmp_path, {"model": {"epsilon": 0.5, "gamma": 8, "beta": 6, "rho": 0},
                         "source": {"a": 0, "b": 0}})
    cfg = load_config(p)
    assert cfg.model.gamma == 8.0 and cfg.source.d1 == 1.0
    assert cfg.study.kind == "equilibrium" and cfg.study.options["tol"] == 1e-12
    echo = cfg.echo()
    assert echo["grid"]["half_extent"] > 0
    # the echo reloads to the same configuration
    again = build_config(echo)
    assert again.echo() == echo


def test_negative_gamma_names_field(tmp_path):
    p = write(tmp_path, {"model": {"gamma": -1}})
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.path == "model.gamma"


def test_sweep_requires_omega_list(tmp_path):
    p = write(tmp_path, {"study": {"kind": "sweep"}})
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.path == "study.omega_list"


def test_parse_error_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"model": {\n  "gamma": 8,,\n}}')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert "line 2, column" in str(exc.value)


@pytest.mark.parametrize("raw,path", [
    ({"bogus": {}}, "bogus"),
    ({"model": {"zeta": 1}}, "model.zeta"),
    ({"source": {"d1": 0}}, "source.d1"),
    ({"grid": {"n_points": 2}}, "grid.n_points"),
    ({"time": {"T": "long"}}, "time.T"),
    ({"study": {"kind": "nope"}}, "study.kind"),
    ({"study": {"kind": "sweep", "omega_list": [100, 50, 200]}}, "study.omega_list"),
    ({"study": {"kind": "oscillatory", "profile": "square"}}, "study.profile"),
    ({"study": {"kind": "equilibrium", "omega_list": [1]}}, "study.omega_list"),
    ({"output": {"formats": ["xml"]}}, "output.formats"),
])
def test_validation_paths(raw, path):
    with pytest.raises(ConfigError) as exc:
        build_config(raw)
    assert exc.value.path == path


def test_equilibrium_study(tmp_path):
    status = main(["--out", str(tmp_path), "equilibrium"])
    assert status == 0
    rec = json.loads((tmp_path / "equilibrium.json").read_text())
    assert rec["bounds_satisfied"] is True
    assert -1.95 < rec["v0"] < -1.94
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["passed"] and man["config"]["model"]["beta"] == 6.0


def test_not_admissible_is_check_failure(tmp_path):
    cfg = write(tmp_path, {"model": {"beta": 1, "gamma": 1}})
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "equilibrium"]) == 1
    assert main(["--config", str(cfg), "--out", str(tmp_path / "a"), "admissible"]) == 1


def test_simulate_zero_data_gives_zero_csv(tmp_path):
    cfg = write(tmp_path, {"grid": {"half_extent": 10, "n_points": 21}, "time": {"T": 1.0},
                           "study": {"kind": "simulate", "system": "pas"}})
    assert main(["--config", str(cfg), "--out", str(tmp_path), "simulate"]) == 0
    with (tmp_path / "trajectory_pas.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x", "u1", "u2"]
    assert all(float(r[2]) == 0.0 and float(r[3]) == 0.0 for r in rows[1:])


def test_simulate_is_bit_reproducible(tmp_path):
    raw = {"source": {"a": 0.01, "b": 0.005, "d1": 0.75, "d2": 0.75, "x0": 0.5, "omega1": 20},
           "grid": {"half_extent": 20, "n_points": 81}, "time": {"T": 0.5},
           "study": {"kind": "simulate", "system": "full",
                     "initial": {"kind": "bump", "amplitude": 0.01, "width": 1.0}}}
    cfg = write(tmp_path, raw)
    main(["--config", str(cfg), "--out", str(tmp_path / "r1"), "simulate"])
    main(["--config", str(cfg), "--out", str(tmp_path / "r2"), "simulate"])
    a = (tmp_path / "r1" / "trajectory_full.csv").read_bytes()
    b = (tmp_path / "r2" / "trajectory_full.csv").read_bytes()
    assert a == b


def test_simulate_blowup_exit_two(tmp_path, monkeypatch):
    from pasfhn import cli
    from pasfhn.solver import BlowUpError

    def boom(*a, **k):
        raise BlowUpError(0.25)

    monkeypatch.setattr(cli, "simulate", boom)
    cfg = write(tmp_path, {"grid": {"half_extent": 10, "n_points": 21},
                           "study": {"kind": "simulate"}})
    assert main(["--config", str(cfg), "--out", str(tmp_path), "simulate"]) == 2
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["error"]["kind"] == "blow-up" and man["error"]["t"] == 0.25


def test_rectangle_study_with_seed(tmp_path):
    cfg = write(tmp_path, {"source": {"a": 0.05, "b": 0.05},
                           "study": {"kind": "rectangle", "x_samples": 401, "t_samples": 50}})
    assert main(["--config", str(cfg), "--out", str(tmp_path), "--seed", "3", "rectangle"]) == 0
    rec = json.loads((tmp_path / "rectangle.json").read_text())
    assert rec["margin"] < 0 and rec["rect"]["L"] > 0


def test_average_check_study(tmp_path):
    cfg = write(tmp_path, {"source": {"a": 0.3, "b": 0.2, "d1": 0.75, "x0": 0.5},
                           "study": {"kind": "average-check", "V": [0.1], "x": [0.2],
                                     "t_index": [7]}})
    assert main(["--config", str(cfg), "--out", str(tmp_path), "average-check"]) == 0
    assert (tmp_path / "average_check.csv").exists()


def test_sweep_study_small(tmp_path):
    cfg = write(tmp_path, {"source": {"a": 0.00225, "b": 0.00225, "d1": 0.75, "d2": 0.75, "x0": 0.5},
                           "grid": {"half_extent": 40, "n_points": 201}, "time": {"T": 0.5},
                           "study": {"kind": "sweep", "omega_list": [40, 80, 160]}})
    status = main(["--config", str(cfg), "--out", str(tmp_path), "sweep"])
    rows = list(csv.reader((tmp_path / "sweep.csv").open()))
    assert rows[0] == ["omega1", "error_v", "error_w", "alpha", "Fv_ynorm_times_omega"]
    assert len(rows) == 4
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert "fitted_order" in man["diagnostics"]
    assert status == (0 if man["passed"] else 1)


def test_config_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"gamma": -1}})
    assert main(["--config", str(cfg), "equilibrium"]) == 1
    assert "model.gamma" in capsys.readouterr().err
