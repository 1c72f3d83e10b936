import json
import math

import numpy as np
import pytest
from scipy import stats

from ctrlgraph.harness import (
    ConfigError,
    ExperimentConfig,
    enumerate_small,
    ks_critical_value,
    power_law_fit,
    run_experiment,
    symmetrize,
    wilson_interval,
)
from ctrlgraph.matgen import AtomDistribution, sample_wigner


def test_wilson_known_values():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and hi == pytest.approx(0.2775, abs=1e-4)
    lo, hi = wilson_interval(5, 10)
    assert (lo, hi) == pytest.approx((0.2366, 0.7634), abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_power_law_fit_recovers_exponent():
    ns = [10, 20, 40, 80]
    fr = [1 - 3.0 * n ** -1.5 for n in ns]
    fit = power_law_fit(ns, fr)
    assert fit["alpha_hat"] == pytest.approx(1.5)
    assert fit["C_hat"] == pytest.approx(3.0)
    assert power_law_fit([10, 20], [0.9, 1.0])["alpha_hat"] is None


def test_ks_critical_value():
    # c(0.01) = 1.6276
    assert ks_critical_value(500, 500) == pytest.approx(1.6276 * math.sqrt(2 / 500), rel=1e-4)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("no-such", [10])
    with pytest.raises(ConfigError):
        ExperimentConfig("godsil-sweep", [20, 10])
    with pytest.raises(ConfigError):
        ExperimentConfig("godsil-sweep", [10], p=1.5)
    with pytest.raises(ConfigError):
        ExperimentConfig("eig-structure", [10])
    with pytest.raises(ConfigError):
        ExperimentConfig("simple-spectrum", [10], xi={"kind": "constant", "params": [1]})
    with pytest.raises(ConfigError):
        ExperimentConfig("symmetrization", [10], xi={"kind": "bernoulli01", "params": ["1/2"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "godsil-sweep", "n_list": [3], "colour": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig("godsil-sweep", [6], exhaustive=True)


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig("loops-sweep", [5, 6], trials=3, q=0.5, master_seed=9)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(p) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "missing.json")


def test_enumerate_small_counts():
    assert enumerate_small(1) == (1, 1)
    assert enumerate_small(2) == (0, 2)
    assert enumerate_small(3) == (0, 8)
    assert enumerate_small(4, "certified") == enumerate_small(4, "rational")
    with pytest.raises(ValueError):
        enumerate_small(6)


def test_enumerate_small_with_loops():
    # on 2 vertices the Krylov determinant is d2 - d1: controllable iff exactly one loop
    assert enumerate_small(2, loops_q=0.5) == (4, 8)
    # adding the identity changes nothing
    assert enumerate_small(3, loops_q=1.0) == enumerate_small(3)


def test_exhaustive_sweep():
    t = run_experiment(ExperimentConfig("godsil-sweep", [2, 3], exhaustive=True))
    assert [(r["n"], r["trials"], r["controllable"]) for r in t.rows] == [(2, 2, 0), (3, 8, 0)]


def test_godsil_sweep_small(tmp_path):
    out = tmp_path / "s.csv"
    cfg = ExperimentConfig("godsil-sweep", [6, 8], trials=40, master_seed=3, output_path=str(out))
    t = run_experiment(cfg)
    assert out.read_text() == t.to_csv()
    assert out.read_text().splitlines()[0] == "n,trials,controllable,fraction,ci_lo,ci_hi"
    for r in t.rows:
        assert r["ci_lo"] <= r["fraction"] <= r["ci_hi"]
    assert run_experiment(cfg).to_csv() == t.to_csv()
    other = run_experiment(ExperimentConfig("godsil-sweep", [6, 8], trials=40, master_seed=4))
    assert [r.values for r in other.records] != [r.values for r in t.records]


def test_trial_streams_independent_of_n_list():
    a = run_experiment(ExperimentConfig("godsil-sweep", [8], trials=30, master_seed=1))
    b = run_experiment(ExperimentConfig("godsil-sweep", [6, 8], trials=30, master_seed=1))
    assert a.row(8) == b.row(8)


def test_symmetrize_preserves_spectrum():
    rad = AtomDistribution.rademacher()
    W = sample_wigner(12, rad, rad, 0)
    psi = np.array([1, -1] * 6)
    S = symmetrize(W, psi)
    D = np.diag(psi)
    assert np.array_equal(S, D @ W @ D)
    assert np.allclose(np.linalg.eigvalsh(S.astype(float)), np.linalg.eigvalsh(W.astype(float)), atol=1e-10)
    with pytest.raises(ValueError):
        symmetrize(W, np.zeros(12))


def test_dot_profile_and_eig_structure_tables():
    t = run_experiment(ExperimentConfig("dot-profile", [12], trials=10))
    assert len(t.rows) == 10
    assert t.summary[12]["skipped"] == sum(r["skipped"] for r in t.rows)
    e = run_experiment(ExperimentConfig("eig-structure", [20], trials=2))
    assert len(e.rows) == 40
    assert e.to_csv().splitlines()[0] == "n,trial,eig_index,incompressible,sparse_dist,rlcd_lower"


def test_symmetrization_table():
    t = run_experiment(ExperimentConfig("symmetrization", [10], trials=60))
    s = t.summary[10]
    assert s["eig_maxdiff"] < 1e-8
    a = [r["min_dot_w"] for r in t.rows]
    b = [r["min_dot_sym"] for r in t.rows]
    assert s["ks_statistic"] == pytest.approx(stats.ks_2samp(a, b).statistic)


def test_smallball_family_table():
    t = run_experiment(ExperimentConfig("smallball-family", [16], trials=2000, t_list=[0.0, 0.01]))
    assert len(t.rows) == 40
    assert t.summary["C"] > 0
    assert t.summary["spearman"] > 0
    assert len(t.summary["lcd"]) == 20
