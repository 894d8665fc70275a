import io

import numpy as np
import pytest
from scipy import stats

from posemetric import convlab as lab
from posemetric.metrics import dist_geodesic
from posemetric.poses import Transform

from conftest import Rz


def test_config_validation():
    with pytest.raises(ValueError):
        lab.LabConfig(trials=0)
    with pytest.raises(ValueError):
        lab.LabConfig(lr=0)
    with pytest.raises(ValueError):
        lab.LabConfig(angle_range=(1.0, 0.5))
    with pytest.raises(ValueError):
        lab.LabConfig(angle_range=(0.0, 4.0))


def test_sample_target_examples():
    T = lab.sample_target(3, (0.0, 0.0), 2.0)
    np.testing.assert_array_equal(T.R, np.eye(3))
    assert np.all(np.abs(T.t) <= 2.0)
    a, b = lab.sample_target(4), lab.sample_target(4)
    np.testing.assert_array_equal(a.R, b.R)
    np.testing.assert_array_equal(a.t, b.t)


def test_sample_target_angle_distribution():
    d = [float(dist_geodesic(np.eye(3), lab.sample_target(s, (0, np.pi)).R)) for s in range(1000)]
    res = stats.kstest(np.array(d) / np.pi, "uniform")
    assert res.statistic < 0.05


def test_fit_identity_target_converges_immediately():
    cfg = lab.LabConfig(trials=1, steps=50)
    for kind in lab.KINDS:
        tr = lab.fit(kind, Transform.identity(), cfg)
        assert tr.converged and tr.steps_to_tolerance == 0 and len(tr) == 1


def test_fit_se3_small_rotation():
    cfg = lab.LabConfig(steps=500, lr=0.01, tolerance=1e-12)
    tr = lab.fit("se3", Transform(Rz(0.5), [0, 0, 0]), cfg)
    assert tr.rot_err[-1] < 0.01
    assert float(dist_geodesic(Rz(0.5), lab.params_to_transform("se3", tr.final_params).R)) < 0.01


def test_fit_quat_monotone_after_warmup():
    cfg = lab.LabConfig(steps=500, lr=0.01, tolerance=1e-12)
    tr = lab.fit("quat", Transform(Rz(0.5), [0, 0, 0]), cfg)
    assert np.all(np.diff(tr.loss[10:]) <= 0)


def test_fit_records_are_ordered_and_finite():
    cfg = lab.LabConfig(steps=100)
    tr = lab.fit("original", lab.sample_target(1), cfg)
    assert tr.steps == list(range(len(tr)))
    assert np.all(np.isfinite(tr.loss))


def test_fit_divergence_is_recorded():
    cfg = lab.LabConfig(steps=200, lr=10.0)
    tr = lab.fit("original", Transform(Rz(0.5), [1, 0, 0]), cfg)
    assert tr.diverged and not tr.converged
    assert "DivergedLoss" not in tr.error and "loss" in tr.error
    assert tr.loss[-1] > lab.DIVERGENCE_LIMIT


def test_se3_fit_continues_past_near_pi_estimates():
    # target at pi: estimates approach |w| = pi where the analytic path refuses
    cfg = lab.LabConfig(steps=2000, lr=0.01, tolerance=1e-4)
    tr = lab.fit("se3", Transform(Rz(np.pi - 1e-5), [0, 0, 0]), cfg)
    assert tr.converged


def test_ground_truth_agreement():
    cfg = lab.LabConfig(steps=800, lr=0.01)
    for seed in range(5):
        T = lab.sample_target(lab.trial_seed(0, seed))
        for kind in lab.KINDS:
            tr = lab.fit(kind, T, cfg)
            if tr.converged:
                est = lab.params_to_transform(kind, tr.final_params)
                assert abs(float(dist_geodesic(T.R, est.R)) - tr.rot_err[-1]) < 1e-9
                assert tr.rot_err[-1] < cfg.tolerance


def test_descent_sanity_small_angles():
    cfg = lab.LabConfig(steps=300, lr=0.001, tolerance=1e-12)
    for kind in lab.KINDS:
        ok = 0
        trials = 20
        for i in range(trials):
            T = lab.sample_target(lab.trial_seed(1, i), (0.0, 0.5))
            tr = lab.fit(kind, T, cfg)
            ok += bool(np.all(np.diff(tr.loss[10:]) <= 0))
        assert ok / trials >= 0.95, kind


def test_compare_identity():
    cfg = lab.LabConfig(trials=1, steps=10, angle_range=(0.0, 0.0), trans_range=0.0)
    table = lab.compare(cfg)
    assert len(table["rows"]) == 3
    for row in table["rows"]:
        assert row["success_rate"] == 1.0 and row["median_steps_to_tolerance"] == 0


def test_compare_paired_and_deterministic():
    cfg = lab.LabConfig(trials=4, steps=150, seed=3, angle_range=(0.5, 2.0))
    t1, traces = lab.compare(cfg, return_traces=True)
    t2 = lab.compare(cfg)
    assert t1 == t2
    assert [r["kind"] for r in t1["rows"]] == list(lab.KINDS)
    # same targets across kinds: identical initial translation error
    for i in range(4):
        errs = {traces[k][i].trans_err[0] for k in lab.KINDS}
        assert len(errs) == 1
    for row in t1["rows"]:
        assert len(row["curves"]["loss"]) == max(len(t) for t in traces[row["kind"]])


def test_trace_csv():
    cfg = lab.LabConfig(steps=5, tolerance=1e-12)
    tr = lab.fit("se3", lab.sample_target(0), cfg)
    buf = io.StringIO()
    lab.write_traces_csv(buf, {"se3": [tr, tr]})
    lines = buf.getvalue().splitlines()
    assert lines[0] == "kind,trial,step,loss,rot_err_rad,trans_err_m"
    assert len(lines) == 1 + 2 * len(tr)
    kind, trial, step, loss, rot_err, trans_err = lines[-1].split(",")
    assert (kind, trial, step) == ("se3", "1", "5")
    assert float(loss) == tr.loss[-1]
