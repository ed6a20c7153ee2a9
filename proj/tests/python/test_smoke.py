import math

import numpy as np
import pytest

import vcei


def test_gram_and_mmd_small_cases():
    k = vcei.gram(np.array([[0.0]]), np.array([[1.0]]))
    assert k[0, 0] == pytest.approx(math.exp(-0.5))
    v = vcei.mmd2_biased(np.array([[0.0]]), np.array([[1.0]]))
    assert v == pytest.approx(2 - 2 * math.exp(-0.5))


def test_weighted_mmd_two_point():
    pts = np.array([[0.0], [1.0]])
    v = vcei.mmd2_weighted_vs_uniform(pts, np.array([1.0, 0.0]))
    assert v == pytest.approx((1 - math.exp(-0.5)) / 2)


def test_solve_variation_two_point():
    out = vcei.solve_variation(np.array([[0.0], [1.0]]))
    assert out["recovered_objective"] == pytest.approx((1 - math.exp(-0.5)) / 2, abs=1e-6)
    assert max(out["weights"]) == pytest.approx(1.0, abs=1e-6)
    assert out["status"] == "optimal"


def test_uniform_bound():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(10, 1))
    out = vcei.solve_variation(pts, b_alpha=0.1)
    assert np.max(np.abs(out["weights"] - 0.1)) < 1e-4


def test_infeasible_bound_raises():
    with pytest.raises(ValueError):
        vcei.solve_variation(np.zeros((4, 1)) + np.arange(4.0)[:, None], b_alpha=0.1)


def test_gp_duplication():
    x = np.array([[-1.0], [0.0], [1.0]])
    y = np.array([[0.5], [0.0], [2.0]])
    weighted = vcei.WeightedGp.fit(x, y, weights=np.array([0.5, 0.25, 0.25]))
    xd = np.array([[-1.0], [-1.0], [0.0], [1.0]])
    yd = np.array([[0.5], [0.5], [0.0], [2.0]])
    dup = vcei.WeightedGp.fit(xd, yd, noise_variance=1e-2 * 4 / 3)
    q = np.linspace(-2, 2, 20)[:, None]
    assert np.max(np.abs(weighted.predict_mean(q) - dup.predict_mean(q))) < 1e-6


def test_generate_and_identify():
    pair = vcei.generate_synthetic("fig1", 200, seed=3)
    assert pair["label"] == "x->y"
    assert pair["x"].shape == (200, 1)
    report = vcei.identify(pair["x"], pair["y"], label=pair["label"], m=20, seed=1)
    assert report["decision"] in ("x->y", "y->x")
    assert report["schema_version"] == 1
    again = vcei.identify(pair["x"], pair["y"], label=pair["label"], m=20, seed=1)
    assert report == again


def test_trend_mode():
    pair = vcei.generate_synthetic("an", 150, seed=4)
    report = vcei.identify(pair["x"], pair["y"], m=15, grid=[0.1, 0.2, 0.4])
    assert report["mode"] == "trend"
    assert "slope" in report["trend"]["x->y"]


def test_unknown_family():
    with pytest.raises(ValueError, match="fig1"):
        vcei.generate_synthetic("nope", 10)
