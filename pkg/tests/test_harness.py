import json

import pytest

from qsawtooth import cli, harness
from qsawtooth.harness import ExperimentConfig, ValidationError
from qsawtooth.series import TimeSeries


def cfg(tmp_path, **kw):
    base = dict(kind="single_run", n_q=[6], K=[0.5], L=[4], epsilon=[0.0], t_max=200,
                realizations=3, seed=1, out=str(tmp_path), classical_M=2000,
                classical_t_max=200)
    base.update(kw)
    return ExperimentConfig(**base)


# validation ----------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    dict(L=[6]), dict(n_q=[1]), dict(n_q=[21]), dict(epsilon=[-0.1]), dict(K=[]),
    dict(kind="nope"), dict(format="xml"), dict(realizations=0), dict(workers=0),
    dict(n_q=[6, 7]), dict(t_max=-1),
])
def test_validation_errors(tmp_path, bad):
    with pytest.raises(ValidationError):
        cfg(tmp_path / "x", **bad).validate()
    assert not (tmp_path / "x").exists()


def test_op_budget_guard(tmp_path):
    c = cfg(tmp_path, n_q=[20], t_max=10**7, op_budget=1e12)
    with pytest.raises(ValidationError, match="op budget"):
        c.validate()


def test_hash_ignores_output_location(tmp_path):
    a = cfg(tmp_path / "a")
    b = cfg(tmp_path / "b", workers=3, format="json")
    assert a.hash() == b.hash()
    assert a.hash() != cfg(tmp_path, seed=2).hash()


# single run ----------------------------------------------------------------

def test_single_run_outputs(tmp_path):
    res = harness.run_single(cfg(tmp_path))
    assert res.ok
    names = set(res.manifest.files)
    assert {"series_nq6_K0.5_L4_eps0.csv", "tC_nq6_K0.5_L4_eps0.csv", "summary.csv",
            "summary.json", "manifest.json"} <= names
    ts = TimeSeries.from_csv(tmp_path / "series_nq6_K0.5_L4_eps0.csv")
    assert len(ts) == 201
    tc = (tmp_path / "tC_nq6_K0.5_L4_eps0.csv").read_text().splitlines()
    assert tc[0] == "t,C" and len(tc) == 202
    row = json.loads((tmp_path / "summary.json").read_text())[0]
    assert {"A", "gamma", "C_bar", "converged"} <= set(row)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config_hash"] == cfg(tmp_path).hash()


def test_single_run_zero_steps(tmp_path):
    res = harness.run_single(cfg(tmp_path, t_max=0))
    lines = (tmp_path / "series_nq6_K0.5_L4_eps0.csv").read_text().splitlines()
    assert lines[0].startswith("t,C,")
    assert len(lines) == 2  # header plus the initial record
    assert res.manifest.notices


def test_byte_identical_rerun(tmp_path):
    kw = dict(epsilon=[0.02], t_max=150)
    harness.run_single(cfg(tmp_path / "a", **kw))
    harness.run_single(cfg(tmp_path / "b", **kw))
    for name in ["series_nq6_K0.5_L4_eps0.02_r0.csv", "series_nq6_K0.5_L4_eps0.02_r2.csv",
                 "tC_nq6_K0.5_L4_eps0.02.csv", "summary.csv"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_json_format(tmp_path):
    harness.run_single(cfg(tmp_path, format="json", t_max=120))
    d = json.loads((tmp_path / "series_nq6_K0.5_L4_eps0.json").read_text())
    assert len(d["t"]) == 121 and "C" in d["values"]


# grid experiments ----------------------------------------------------------

def test_gamma_vs_K_table(tmp_path):
    res = harness.run_gamma_vs_K(cfg(tmp_path, kind="gamma_vs_K", K=[0.5, 2.0], t_max=300))
    assert [r["K"] for r in res.rows] == [0.5, 2.0]
    for r in res.rows:
        assert r["gamma_tilde"] == pytest.approx(2 * r["gamma"] * 16)
        assert r["R"] == pytest.approx(r["gamma_tilde"] / r["D_ql"])
    assert (tmp_path / "summary.csv").exists()


def test_residual_single_point_skips_scaling(tmp_path):
    res = harness.run_residual_vs_g(cfg(tmp_path, kind="residual_vs_g", t_max=500))
    assert len(res.rows) == 1 and "C_bar" in res.rows[0]
    assert any("scaling fit skipped" in n for n in res.manifest.notices)


def test_residual_grid_fits_scaling(tmp_path):
    res = harness.run_residual_vs_g(cfg(tmp_path, kind="residual_vs_g", n_q=[5, 6, 7], t_max=400))
    assert "scaling" in res.extra
    assert (tmp_path / "loglog_g_Cbar.csv").exists()


def test_noise_scaling_small(tmp_path):
    c = cfg(tmp_path, kind="noise_scaling", n_q=[5, 6], epsilon=[0.0, 0.05], t_max=400,
            plateau_start=50, realizations=2)
    res = harness.run_noise_scaling(c)
    zero = [r for r in res.rows if r["epsilon"] == 0]
    assert all(r["Gamma"] == 0.0 for r in zero)
    noisy = [r for r in res.rows if r["epsilon"] > 0]
    assert all(r["Gamma"] > 0 for r in noisy)
    assert len(res.manifest.seeds) == 4


def test_single_realization_warns(tmp_path):
    c = cfg(tmp_path, kind="noise_single", epsilon=[0.05], t_max=300, realizations=1,
            plateau_start=50)
    res = harness.run_noise_single(c)
    assert any("high variance" in n for n in res.manifest.notices)
    assert "Gamma" in res.rows[0]


def test_per_point_failure_is_recorded(tmp_path):
    # plateau start beyond the series end: the fit fails, the experiment still completes
    c = cfg(tmp_path, kind="noise_scaling", n_q=[5, 6], epsilon=[0.05], t_max=200,
            plateau_start=10_000, realizations=2)
    res = harness.run_noise_scaling(c)
    assert not res.ok
    assert len(res.manifest.failures) == 2
    assert (tmp_path / "summary.csv").exists()


def test_workers_merge_in_order(tmp_path):
    kw = dict(kind="gamma_vs_K", K=[2.0, 0.5], t_max=150)
    harness.run_gamma_vs_K(cfg(tmp_path / "a", **kw))
    b = harness.run_gamma_vs_K(cfg(tmp_path / "b", workers=2, **kw))
    assert [r["K"] for r in b.rows] == [2.0, 0.5]
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()


def test_point_seeds_are_distinct():
    seeds = {harness.point_seed(0, i) for i in range(100)}
    assert len(seeds) == 100
    assert harness.point_seed(0, 3) == harness.point_seed(0, 3)


# cli -----------------------------------------------------------------------

def test_cli_success(tmp_path, capsys):
    rc = cli.main(["single", "--nq", "5", "--t-max", "150", "--out", str(tmp_path)])
    assert rc == 0
    assert "gamma=" in capsys.readouterr().out


def test_cli_validation_exit_code(tmp_path, capsys):
    rc = cli.main(["single", "--L", "6", "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "multiple of 4" in capsys.readouterr().err


def test_cli_failure_exit_code(tmp_path):
    rc = cli.main(["noise-scaling", "--nq", "5", "--eps", "0.05", "--t-max", "200",
                   "--realizations", "2", "--plateau-start", "5000", "--trajectories", "2000",
                   "--out", str(tmp_path)])
    assert rc == 2


def test_cli_classical_table(tmp_path):
    rc = cli.main(["classical-d0", "--K", "1.0", "2.0", "--trajectories", "2000",
                   "--classical-t-max", "200", "--out", str(tmp_path)])
    assert rc == 0
    rows = json.loads((tmp_path / "summary.json").read_text())
    assert [r["K"] for r in rows] == [1.0, 2.0]
    assert all(0.5 < r["D0_over_Dql"] < 1.5 for r in rows)
