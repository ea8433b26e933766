import csv
import json
import math

import numpy as np
import pytest

from hermite_vp import cli, integrators
from hermite_vp.config import parse_config
from hermite_vp.errors import SolverError
from hermite_vp.output import DIAGNOSTICS_HEADER, read_diagnostics, read_snapshot, species_groups
from hermite_vp.scenarios import build_initial_state
from hermite_vp.vlasov import reconstruct_grid

SMALL_LANDAU = """
scenario = "linear_landau"
nv = 12
nx = 24
dt = 0.05
t_final = 0.5

[output]
snapshot_times = [0, 0.5]
snapshot_nv = 16
"""


@pytest.fixture
def landau_config(tmp_path):
    p = tmp_path / "landau.toml"
    p.write_text(SMALL_LANDAU)
    return p


def test_run_writes_outputs(landau_config, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(landau_config), "--out", str(out)]) == 0
    assert "finished t=0.5" in capsys.readouterr().out
    with open(out / "diagnostics.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == DIAGNOSTICS_HEADER
    assert [r[1] for r in rows[1:3]] == ["electron", "total"]
    assert len(rows) == 1 + 2 * 11
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["status"] == "ok" and meta["final_time"] == pytest.approx(0.5)
    assert meta["config"]["nv"] == 12 and meta["threads"] >= 1
    assert meta["solver_stats"]["steps"] == 10
    assert sorted(meta["snapshots"]) == ["snapshot_t0.5.csv", "snapshot_t0.csv"]
    assert "rates" in meta or "rates_error" in meta


def test_diagnostics_round_trip(landau_config, tmp_path):
    out = tmp_path / "out"
    cli.main(["run", str(landau_config), "--out", str(out)])
    d = read_diagnostics(out / "diagnostics.csv")
    tot = d["total"]
    np.testing.assert_allclose(tot["time"], np.linspace(0, 0.5, 11), atol=1e-12)
    np.testing.assert_allclose(tot["N"], 2 * math.pi, rtol=1e-12)
    np.testing.assert_allclose(tot["E_tot"], tot["E_kin"] + tot["E_pot"], rtol=1e-14)
    assert np.isnan(d["electron"]["E_pot"]).all()
    np.testing.assert_array_equal(d["electron"]["N"], tot["N"])


def test_snapshot_matches_reconstruction(landau_config, tmp_path):
    out = tmp_path / "out"
    cli.main(["run", str(landau_config), "--out", str(out)])
    x, v, f = read_snapshot(out / "snapshot_t0.csv")
    cfg = parse_config(landau_config)
    state, grid, species = build_initial_state(cfg)
    np.testing.assert_allclose(x, grid.x, rtol=1e-15)
    assert v.size == 16 and v[0] == pytest.approx(-5.0) and v[-1] == pytest.approx(5.0)
    np.testing.assert_allclose(f, reconstruct_grid(state, species, 0, v), rtol=1e-15, atol=0)


def test_rerun_is_byte_identical(landau_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["run", str(landau_config), "--out", str(a)])
    cli.main(["run", str(landau_config), "--out", str(b)])
    for name in ("diagnostics.csv", "snapshot_t0.csv", "snapshot_t0.5.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_multi_species_snapshots(tmp_path):
    p = tmp_path / "ts.toml"
    p.write_text('scenario = "two_stream"\nnv = 8\nnx = 16\ndt = 0.1\nt_final = 0.2\n'
                 '[species.ion]\nstatic = false\nalpha_sw = 0.05\nalpha_swsr = 0.07\n')
    out = tmp_path / "out"
    assert cli.main(["run", str(p), "--out", str(out)]) == 0
    names = sorted(json.loads((out / "run_meta.json").read_text())["snapshots"])
    assert names == ["snapshot_t0.2_beam1_beam2.csv", "snapshot_t0.2_ion.csv"]
    cfg = parse_config(p)
    assert species_groups(cfg.beams) == [("beam1_beam2", [0, 1]), ("ion", [2])]


def test_solver_failure_keeps_partial_output(landau_config, tmp_path, monkeypatch, capsys):
    real = integrators.jfnk_solve
    calls = [0]

    def flaky(*args, **kwargs):
        calls[0] += 1
        if calls[0] > 4:
            raise SolverError("Newton iteration cap reached", 1.0, {"newton_iterations": 50})
        return real(*args, **kwargs)

    monkeypatch.setattr(integrators, "jfnk_solve", flaky)
    out = tmp_path / "out"
    assert cli.main(["run", str(landau_config), "--out", str(out)]) == 1
    assert "run failed" in capsys.readouterr().err
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["status"] == "failed" and "Newton" in meta["error"]
    assert meta["final_time"] == pytest.approx(0.2)
    assert meta["error_context"]["time"] == pytest.approx(0.2)
    rows = read_diagnostics(out / "diagnostics.csv")["total"]
    np.testing.assert_allclose(rows["time"], [0, 0.05, 0.1, 0.15, 0.2], atol=1e-12)
    assert "snapshot_t0.2.csv" in meta["snapshots"]


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('scenario = "linear_landau"\norder = 3\n')
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "order must be one of 2,4,6,8" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.toml"), "--out", str(tmp_path / "o")]) == 2


def test_convergence_command(tmp_path, capsys):
    p = tmp_path / "ms.toml"
    p.write_text('scenario = "manufactured"\nnv = 30\nt_final = 0.1\ndt = 0.01\n')
    assert cli.main(["convergence", str(p), "--nx", "40,80", "--out", str(tmp_path)]) == 0
    assert "log-log slope" in capsys.readouterr().out
    with open(tmp_path / "convergence.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["nx", "dx", "l2_error", "order"]
    assert [r[0] for r in rows[1:]] == ["40", "80", "slope"]
    assert 1.7 < float(rows[-1][3]) < 2.3


def test_convergence_rejects_other_scenarios(landau_config):
    assert cli.main(["convergence", str(landau_config), "--nx", "40,80"]) == 2


def test_nx_list_validation():
    with pytest.raises(SystemExit):
        cli.main(["convergence", "x.toml", "--nx", "50"])
    with pytest.raises(SystemExit):
        cli.main(["convergence", "x.toml", "--nx", "a,b"])


def test_verify_exit_code(capsys):
    assert cli.main(["verify"]) == 0
    assert "10/10 checks passed" in capsys.readouterr().out
