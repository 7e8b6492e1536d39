import json
import math

import numpy as np
import pytest

from pilotwave.config import parse_config
from pilotwave.errors import IntegrationError
from pilotwave.harness import ScenarioFailure, run_scenario
from pilotwave.plotscript import emit_plot_script


def _run(tmp_path, text, name="out"):
    cfg = parse_config(text + f"\nout_dir = {tmp_path / name}\n")
    return cfg, run_scenario(cfg)


def test_static_coherent_reproduces_textbook(tmp_path):
    cfg, report = _run(tmp_path, "preset = static\nalpha = 1\nq0 = 0, 0.5\nt_max = 8")
    assert report.passed and report.exit_code == 0
    assert report.checks["preset_formula"].value < 1e-8
    rows = np.loadtxt(tmp_path / "out" / "trajectory_00_guidance-ode.csv", delimiter=",", skiprows=1)
    t, q = rows[:, 0], rows[:, 1]
    assert np.max(np.abs(q - math.sqrt(2) * (np.cos(t) - 1))) < 1e-8


def test_damped_squeezed_errata(tmp_path):
    _, report = _run(tmp_path, "preset = damped-squeezed\nq0 = 1\nt_max = 10")
    entry = report.checks["errata_damped_squeezed_squared_form"]
    assert entry.note and entry.value > 0.1 and entry.passed
    assert report.checks["damped_squeezed_form"].value < 1e-6
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert data["errata_damped_squeezed_squared_form"]["note"]
    assert data["damped_squeezed_form"]["pass"] is True
    errata = np.loadtxt(tmp_path / "out" / "errata.csv", delimiter=",", skiprows=1)
    assert errata.shape[1] == 4


def test_report_layout(tmp_path):
    _, report = _run(tmp_path, "preset = static-squeezed\nn = 1\nt_max = 6\nemit_plot_script = true")
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert set(data) == set(report.checks)
    for entry in data.values():
        assert set(entry) >= {"value", "tolerance", "pass"}
    for name in ("wronskian_drift", "invariant_drift", "schrodinger_residual", "continuity_residual",
                 "normalization", "formula_vs_oracle", "newtonian_residual", "theta_closed_form",
                 "linearity_in_q0", "bogoliubov_residual", "squeezed_number", "preset_formula"):
        assert name in data
    assert (tmp_path / "out" / "plot.gp").is_file()
    assert len(report.trajectories) == 6 and all(t["ok"] for t in report.trajectories)
    assert set(report.timings) == {"setup", "field_checks", "trajectories", "trajectory_checks"}


def test_csv_format(tmp_path):
    _run(tmp_path, "preset = damped\nalpha = 0.5\nq0 = 1\nt_max = 2")
    lines = (tmp_path / "out" / "trajectory_00_closed-form.csv").read_text().splitlines()
    assert lines[0] == "t,q,p,S,Q"
    fields = lines[1].split(",")
    assert len(fields) == 5 and all("e" in f and len(f.lstrip("-").split("e")[0]) == 13 for f in fields)
    field = (tmp_path / "out" / "field.csv").read_text().splitlines()
    assert field[0] == "t,q,R,S,Q"


def test_deterministic_outputs(tmp_path):
    text = "preset = custom\na = 0.2\nnu = 1.3\nb = 0.3\nmu = 0.7\ngamma = 0.05\nsigma = 0.3\nalpha = 1\nt_max = 3"
    _run(tmp_path, text, "a")
    _run(tmp_path, text, "b")
    names = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_failing_check_sets_exit_code(tmp_path, monkeypatch):
    import pilotwave.harness as harness

    monkeypatch.setitem(harness.TOLERANCES, "wronskian_drift", -1.0)
    _, report = _run(tmp_path, "preset = static\nt_max = 2")
    assert not report.checks["wronskian_drift"].passed and report.exit_code == 1


def test_numerical_failure_has_provenance(tmp_path, monkeypatch):
    import pilotwave.harness as harness

    def broken(*args, **kwargs):
        raise IntegrationError("forced", t_last=1.5)

    monkeypatch.setattr(harness, "classical_flow", broken)
    with pytest.raises(ScenarioFailure) as info:
        _run(tmp_path, "preset = static\nt_max = 2")
    err = info.value
    assert err.module == "invariant" and err.operation == "classical_flow"
    assert "q0" in err.inputs and "1.5" in str(err)


def test_plot_script_panels(tmp_path):
    files = []
    for i in range(3):
        for kind in ("closed-form", "guidance-ode"):
            path = tmp_path / f"trajectory_{i:02d}_{kind}.csv"
            path.write_text("t,q,p,S,Q\n")
            files.append(path)
    script = emit_plot_script(files, tmp_path / "plot.gp").read_text()
    assert script.count("using 1:2") == 6 and "multiplot" not in script
    assert str(tmp_path) not in script
    one = emit_plot_script(files[:1], tmp_path / "one.gp").read_text()
    assert one.count("plot ") == 1 and one.count("using 1:2") == 1
    two = emit_plot_script([files[:2], files[2:]], tmp_path / "sub" / "two.gp").read_text()
    assert "multiplot layout 2,1" in two and "'../trajectory_00_closed-form.csv'" in two


def test_plot_script_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_script([], tmp_path / "p.gp")
    with pytest.raises(FileNotFoundError):
        emit_plot_script([tmp_path / "missing.csv"], tmp_path / "p.gp")
