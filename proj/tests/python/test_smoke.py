import math
import os
from pathlib import Path

import numpy as np
import pytest

import procurl

SOURCE_DIR = Path(os.environ.get("PROCURL_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_bandit_value_and_gradient():
    b = procurl.make_bandit(4, 6, "clustered", seed=3)
    theta = np.random.default_rng(0).normal(size=b.features.dimension)
    c = b.contexts[0]
    v = procurl.value_exact(b.mdp, b.features, theta, c)
    assert 0.0 < v < 1.0
    g = procurl.expected_policy_gradient(b.mdp, b.features, theta, c)
    h = 1e-6
    for i in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        fd = (procurl.value_exact(b.mdp, b.features, up, c) - procurl.value_exact(b.mdp, b.features, down, c)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-7)


def test_prop1_identity():
    assert procurl.prop1_sweep(20, 1) <= 1e-10
    b = procurl.make_bandit(3, 3, "orthogonal")
    r = procurl.prop1_check(np.zeros(3), b, b.contexts[0], b.contexts[1])
    assert r.rel_err <= 1e-10


def test_teacher_math():
    assert procurl.learning_potential(0.5) == pytest.approx(0.25)
    assert procurl.learning_potential(0.0) == 0.0
    p = procurl.softmax_probabilities([0.0, 1.0, 2.0], 0.0)
    assert p == pytest.approx([1 / 3] * 3)
    assert procurl.procurl_score(0.25, 0.25, 1.0) == pytest.approx(0.0625)


def test_gate_grid():
    grid = procurl.GateGrid(grid_size=5, wall_row=2)
    contexts = grid.task_space()
    phi = grid.gate_relative_features()
    theta = np.zeros(phi.dimension)
    v = procurl.value_exact(grid, phi, theta, contexts[-1])
    assert 0.0 <= v <= procurl.optimal_value(grid, contexts[-1]) <= 1.0
    theta2, length, ret = procurl.reinforce_step(grid, phi, theta, contexts[-1], 0.1, seed=4)
    assert 1 <= length <= grid.horizon_cap
    assert theta2.shape == theta.shape


def test_convergence_probe():
    r = procurl.convergence_probe("gradient-align", trials=5, eta=0.5, seed=0)
    assert r.slope < 0
    assert r.mean[-1] < r.mean[0]
    assert "steps" in r.summary()


def test_run_experiment_and_charts(tmp_path):
    cfg = SOURCE_DIR / "configs" / "bandit_clustered.ini"
    files = procurl.run_experiment(
        str(cfg), [f"run.output_dir={tmp_path}", "run.seeds=0,1", "run.total_env_steps=200", "run.charts=false"]
    )
    metrics = tmp_path / "metrics.csv"
    assert metrics in [Path(f) for f in files]
    header = metrics.read_text().splitlines()[0]
    assert header == "seed,env_steps,mean_target_return,mean_distance_to_target,strategy,wall_time_ms"
    charts = procurl.emit_charts([metrics], tmp_path / "charts")
    assert any(str(c).endswith("mean_target_return.svg") for c in charts)


def test_errors_are_python_exceptions(tmp_path):
    cfg = SOURCE_DIR / "configs" / "bandit_clustered.ini"
    with pytest.raises(procurl.ConfigError):
        procurl.run_experiment(str(cfg), ["run.bogus=1"])
    with pytest.raises(procurl.CapabilityError):
        procurl.run_experiment(
            str(SOURCE_DIR / "configs" / "gate_point_mass.ini"),
            ["teacher.strategy=greedy-oracle", f"run.output_dir={tmp_path}", "run.seeds=0"],
        )
    assert not math.isnan(procurl.split_seed(1, 2))
