import json
import math

import numpy as np
import pytest

import pdmp_harvest as ph


def quadratic_root(p, c, r, delta):
    a = 2 * r * p
    b = p * (delta - r) - c * r
    cc = -c * delta
    return (-b + math.sqrt(b * b - 4 * a * cc)) / (2 * a)


def test_costless_threshold():
    v = ph.solve_value_1d(ph.Model(c=0.0))
    assert abs(v.x_star - 0.475) < 1e-6


def test_baseline_threshold_and_arrays():
    m = ph.Model()
    v = ph.solve_value_1d(m)
    assert abs(v.x_star - quadratic_root(2.0, 1.0, 1.0, 0.05)) < 1e-6
    assert v.x.shape == v.v.shape == v.v_prime.shape == (2001,)
    assert np.all(np.diff(v.v) > 0)
    assert v(v.x_star) == pytest.approx(m.singular_effort(v.x_star, 1.0) * (2 * v.x_star - 1) / 0.05)


def test_regularity_and_sensitivity():
    m = ph.Model()
    grid = ph.GridSpec()
    grid.n = 2501
    rep = ph.regularity_check(ph.solve_value_1d(m, grid=grid), m)
    assert rep.smooth_fit() and rep.kink_signs() and rep.kink_ratios()
    s = ph.lambda_sensitivity(m, ph.KernelSpec.centered(0.05, ph.DiscreteDistribution.two_point_mean(0.5)), 1e-3)
    assert s.slope > 0 and s.prediction == 1 and s.agree
    xs = ph.growth_sensitivity(m, [0.8, 1.0, 1.2])
    assert xs[0] < xs[1] < xs[2]


def test_jump_solve_and_monte_carlo():
    m = ph.Model()
    k = ph.KernelSpec.uniform(0.8, 1.2)
    v = ph.solve_value_1d(m, k, 0.1)
    assert v.residual < 1e-8
    assert ph.contraction_factor(list(v.gaps)) <= 0.1 / 0.15 + 0.05
    mean, hw, trunc = ph.monte_carlo_value(m, v, k, x0=0.5, replicates=400, seed=3)
    assert abs(mean - v(0.5)) <= hw + trunc + 1e-6


def test_dual_solve_shapes():
    grid = ph.GridSpec()
    grid.n = 1001
    grid.n_r = 11
    v = ph.solve_value_2d(ph.Model(), growth_kernel=ph.KernelSpec.growth(0.2), lambda_r=0.05, grid=grid)
    assert v.v.shape == (11, 1001)
    assert np.all(np.diff(v.x_star) > 0)


def test_config_errors_and_commands(tmp_path):
    with pytest.raises(ph.ConfigError):
        ph.parse_config(json.dumps({"model": {"rr": 1}}))
    with pytest.raises(ValueError):
        ph.Model(K=-1.0)
    cfg = ph.parse_config(json.dumps({"seed": 5}))
    cfg.output_dir = str(tmp_path)
    code, log, err = ph.run_command("solve", cfg)
    assert code == 0, err
    lines = (tmp_path / "value.csv").read_text().splitlines()
    assert lines[0] == f"# config_hash={cfg.hash} seed=5"
    assert lines[1] == "x,V,V_prime"
