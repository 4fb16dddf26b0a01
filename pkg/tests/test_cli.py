import numpy as np
import pytest

from stirmix.cli import (EXIT_CONFIG, EXIT_OK, ConfigError, OutputLock, build_config, main,
                         parse_config_file, scan_values)
from stirmix.export import read_csv


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def column(path, name):
    _, header, rows = read_csv(path)
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nh = 0.2\ngamma = 1e-6\nbasis = cos2,sin2|N=1|T=1\nalpha0 = 50, 40\n")
    cfg = build_config("optimize", parse_config_file(p), {"gamma": "1e-5"})
    assert cfg.h == 0.2 and cfg.gamma == 1e-5 and cfg.alpha0 == [50.0, 40.0]
    assert cfg.control_basis.dim == 2


@pytest.mark.parametrize("text", ["nonsense = 1\n", "h\n", "h = 0.1\nh = 0.2\n"])
def test_config_file_errors(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError):
        parse_config_file(p)


@pytest.mark.parametrize("over", [{"alpha0": "1,2"}, {"h": "2"}, {"basis": "cos1|N=1|T=2", "T": "1"},
                                  {"method": "XX"}, {"boundary": "open"}, {"theta0": "x+"}])
def test_invalid_values(over):
    with pytest.raises(ConfigError):
        build_config("forward", {}, over)


def test_unknown_file_key_exit_code(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("foo = 1\n")
    assert main(["scan", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_scan_values():
    assert scan_values("0:10", 2.0).tolist() == [0, 2, 4, 6, 8, 10]
    assert scan_values("5:1", 1.0).size == 0
    with pytest.raises(ConfigError):
        scan_values("1-5", 1.0)


def test_mesh_command(tmp_path, capsys):
    assert main(["mesh", "--h", "0.1", "--out", str(tmp_path)]) == EXIT_OK
    assert "triangles=600" in capsys.readouterr().out
    assert (tmp_path / "mesh.vtk").read_text().startswith("# vtk DataFile Version 3.0")


def test_empty_scan(tmp_path):
    assert main(["scan", "--alpha-range", "3:1", "--out", str(tmp_path)]) == EXIT_OK
    meta, header, rows = read_csv(tmp_path / "scan.csv")
    assert meta.startswith("# stirmix") and "created=2023-11-14T22:13:20Z" in meta
    assert header[0] == "alpha1" and rows == []


def test_scan_rejects_multi_dimensional_basis(tmp_path):
    assert main(["scan", "--basis", "cos1,sin1|N=1", "--alpha0", "1,1",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_forward_outputs_and_reproducibility(tmp_path):
    args = ["forward", "--h", "0.2", "--T", "0.2", "--theta0", "step", "--snapshots", "0,0.1",
            "--out", str(tmp_path / "a")]
    assert main(args) == EXIT_OK
    a = tmp_path / "a"
    for name in ("mixnorm_vs_time.csv", "kinetic_energy.csv", "theta_t0.1000.vtk",
                 "theta_t0.1000.stdg"):
        assert (a / name).exists()
    assert not (a / OutputLock.NAME).exists()
    args[-1] = str(tmp_path / "b")
    assert main(args) == EXIT_OK
    for name in ("mixnorm_vs_time.csv", "kinetic_energy.csv"):
        assert (a / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    mass = column(a / "mixnorm_vs_time.csv", "mass")
    assert np.max(np.abs(mass - mass[0])) < 1e-12


def test_forward_zero_control_keeps_mix_norm(tmp_path):
    assert main(["forward", "--h", "0.2", "--alpha0", "0", "--theta0", "sin",
                 "--out", str(tmp_path)]) == EXIT_OK
    mn = column(tmp_path / "mixnorm_vs_time.csv", "mix_norm")
    assert np.max(np.abs(mn - mn[0])) <= 1e-10


def test_bad_snapshot_time(tmp_path):
    assert main(["forward", "--h", "0.2", "--snapshots", "0.333", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_lock_blocks_second_writer(tmp_path):
    with OutputLock(tmp_path):
        assert main(["mesh", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["mesh", "--out", str(tmp_path)]) == EXIT_OK


def test_stale_lock_is_replaced(tmp_path):
    (tmp_path / OutputLock.NAME).write_text("999999999")
    assert main(["mesh", "--out", str(tmp_path)]) == EXIT_OK


def test_optimize_resume_matches_uninterrupted(tmp_path):
    common = ["--h", "0.2", "--grad-max", "4"]
    assert main(["optimize", *common, "--out", str(tmp_path / "full")]) == EXIT_OK
    assert main(["optimize", *common, "--max-new-iterations", "2",
                 "--out", str(tmp_path / "part")]) == EXIT_OK
    assert main(["resume", str(tmp_path / "part" / "optimize.ckpt")]) == EXIT_OK
    full = (tmp_path / "full" / "history.csv").read_bytes()
    assert (tmp_path / "part" / "history.csv").read_bytes() == full
    J = column(tmp_path / "full" / "history.csv", "J")
    assert np.all(np.diff(J) < 0)


def test_relay_and_resume(tmp_path):
    common = ["--hs", "0.2,0.1", "--grad-max", "2"]
    assert main(["relay", *common, "--out", str(tmp_path / "full")]) == EXIT_OK
    assert main(["relay", *common, "--out", str(tmp_path / "part")]) == EXIT_OK
    # pretend the run died during the second stage
    (tmp_path / "part" / "relay_history.csv").unlink()
    from stirmix.optimizer import load_checkpoint
    st, body = load_checkpoint(tmp_path / "part" / "stage1.ckpt")
    assert body["run"]["relay_stage"] == 1
    assert main(["resume", str(tmp_path / "part" / "stage0.ckpt")]) == EXIT_OK
    a = column(tmp_path / "full" / "relay_history.csv", "alpha1")
    b = column(tmp_path / "part" / "relay_history.csv", "alpha1")
    assert np.array_equal(a, b)


def test_resume_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.ckpt"
    p.write_text("garbage")
    assert main(["resume", str(p)]) == EXIT_CONFIG


def test_validate_energy_suite(tmp_path, capsys):
    assert main(["validate", "energy", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    assert (tmp_path / "validate_energy.csv").exists()


@pytest.fixture(scope="module")
def long_runs(tmp_path_factory):
    """Ten time units at h=0.1 with the step initial condition, cos and sin forcing."""
    import os
    os.environ.setdefault("SOURCE_DATE_EPOCH", "1700000000")
    base = tmp_path_factory.mktemp("long")
    runs = {}
    for mode in ("cos1", "sin1"):
        out = base / mode
        assert main(["forward", "--h", "0.1", "--basis", f"{mode}|N=1|T=10", "--alpha0", "1",
                     "--theta0", "step", "--out", str(out)]) == EXIT_OK
        f = out / "mixnorm_vs_time.csv"
        runs[mode] = (column(f, "t"), column(f, "mix_norm"),
                      column(out / "kinetic_energy.csv", "max_speed"))
    return runs


@pytest.mark.slow
def test_forward_long_horizon_observed_behaviour(long_runs):
    t, cos_mn, speed = long_runs["cos1"]
    _, sin_mn, _ = long_runs["sin1"]
    window = (t >= 1.0) & (t <= 5.5)
    assert np.all(np.diff(cos_mn[window]) < 0)
    assert np.all(cos_mn[t > 1.0] < sin_mn[t > 1.0])
    assert abs(sin_mn[-1] / sin_mn[0] - 1) < 0.01  # barely mixed
    assert 0.35 < speed.max() < 0.45


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="steady two-vortex flow un-mixes after t~5.7; "
                   "see the decisions ledger")
def test_forward_long_horizon_monotone_to_T(long_runs):
    t, cos_mn, _ = long_runs["cos1"]
    assert np.all(np.diff(cos_mn[t >= 1.0]) < 0)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="terminal ratio is 1.28 at T=10, h=0.1; "
                   "see the decisions ledger")
def test_forward_sin_terminal_three_times_cos(long_runs):
    assert long_runs["sin1"][1][-1] >= 3 * long_runs["cos1"][1][-1]
