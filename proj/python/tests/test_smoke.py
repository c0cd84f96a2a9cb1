import json
import math

import numpy as np
import pytest

import mkvldp


def test_kernels():
    h = 0.75
    assert mkvldp.covariance_rh(1.0, 1.0, h) == pytest.approx(1.0)
    # R_H(t, s) = (t^2H + s^2H - |t - s|^2H) / 2
    expect = 0.5 * (2.0**1.5 + 1.0 - 1.0)
    assert mkvldp.covariance_rh(2.0, 1.0, h) == pytest.approx(expect)
    assert mkvldp.kh_constant(h) > 0.0
    assert mkvldp.kernel_kh(1.0, 0.5, h) > 0.0
    with pytest.raises(ValueError):
        mkvldp.kh_constant(1.5)


def test_rl_roundtrip():
    n, alpha = 256, 0.3
    t = np.linspace(0.0, 1.0, n + 1)
    f = t**2
    g = mkvldp.rl_integral(f, 1.0, alpha)
    exact = math.gamma(3.0) / math.gamma(3.0 + alpha) * t ** (2.0 + alpha)
    assert np.max(np.abs(g - exact)) < 1e-3
    back = mkvldp.rl_derivative(g, 1.0, alpha)
    assert np.max(np.abs(back[1:] - f[1:])) < 1e-2


def test_rkhs_inner_of_indicator():
    # <1_[0,t], 1_[0,t]>_H = t^2H
    n, h = 64, 0.7
    phi = np.ones(n)
    assert mkvldp.rkhs_inner(phi, phi, 1.0, h) == pytest.approx(1.0, rel=1e-6)
    ks = mkvldp.kh_star(phi, 1.0, h)
    assert ks.shape == (n + 1,)
    assert np.all(np.isfinite(ks[1:]))


def test_noise_shapes_and_seeds():
    bm = mkvldp.sample_bm(1.0, 100, dim=2, seed=3)
    assert bm.shape == (100, 2)
    a = mkvldp.sample_fbm(1.0, 64, 0.7, seed=5)
    b = mkvldp.sample_fbm(1.0, 64, 0.7, seed=5)
    c = mkvldp.sample_fbm(1.0, 64, 0.7, seed=6)
    assert a.shape == (65, 1)
    assert a[0, 0] == 0.0
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    v = mkvldp.sample_fbm(1.0, 64, 0.7, seed=5, method="volterra")
    assert v.shape == (65, 1)
    with pytest.raises(ValueError):
        mkvldp.sample_fbm(1.0, 64, 0.7, method="nope")


def test_wasserstein_shift():
    x = np.linspace(-1.0, 1.0, 50)
    assert mkvldp.wasserstein2(x, x + 0.5) == pytest.approx(0.5)
    pts = np.random.default_rng(0).normal(size=(20, 2))
    assert mkvldp.wasserstein2(pts, pts) == pytest.approx(0.0, abs=1e-12)


def test_simulate_zero_and_threads():
    assert "zero" in mkvldp.model_names()
    out = mkvldp.simulate("zero", 1.0, 8, 3, [0.5], [0.25])
    assert out["slow"].shape == (9, 3, 1)
    assert np.all(out["slow"] == 0.5)
    assert np.all(out["fast"] == 0.25)
    assert out["time"][-1] == pytest.approx(1.0)
    a = mkvldp.simulate("linear", 1.0, 64, 50, [1.0], [0.0], seed=7, threads=1)
    b = mkvldp.simulate("linear", 1.0, 64, 50, [1.0], [0.0], seed=7, threads=3)
    np.testing.assert_array_equal(a["slow"], b["slow"])


def test_rate_function():
    r0 = mkvldp.rate_function("linear_gaussian", 1.0, 32, [0.0], [0.0])
    r1 = mkvldp.rate_function("linear_gaussian", 1.0, 32, [1.0], [0.0])
    r2 = mkvldp.rate_function("linear_gaussian", 1.0, 32, [2.0], [0.0])
    assert r1["converged"] and r2["converged"]
    assert r0["value"] == pytest.approx(0.0, abs=1e-8)
    assert 0.0 < r1["value"] < r2["value"]
    # quadratic in the target for a linear model
    assert r2["value"] == pytest.approx(4.0 * r1["value"], rel=1e-3)
    assert r1["skeleton"][-1, 0] == pytest.approx(1.0, abs=1e-3)
    assert r1["hdot"].shape[0] == 32
    assert r1["hbar"].shape == (32, 1)


def test_rare_event_certain_hit():
    rows = mkvldp.rare_event("linear", 1.0, 32, [0.5], -100.0, [0.0], [0.0], n_mc=200, seed=1)
    assert len(rows) == 1
    assert rows[0]["hits"] == 200
    assert rows[0]["p_hat"] == 1.0


def test_verify_single_check():
    reports = mkvldp.verify("aux_ou", checks=["h1"], seed=1)
    assert [r["check"] for r in reports] == ["h1"]
    assert reports[0]["verdict"] == "pass"
    bad = mkvldp.verify("negative_control", checks=["h1"], seed=1)
    assert bad[0]["verdict"] == "fail"


def test_run_cli(tmp_path):
    cfg = tmp_path / "zero.json"
    cfg.write_text(json.dumps({"model": "zero", "grid": {"T": 1, "n": 4}, "particles": 2, "x0": [1.0], "y0": [0.0]}))
    out = tmp_path / "out"
    assert mkvldp.run_cli(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "trajectories.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_code"] == 0
    assert mkvldp.run_cli(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
