import numpy as np
import pytest

from neckflow import verifier as vf


def test_fit_exact_power_law():
    x = np.geomspace(1e-3, 1.0, 8)
    fit = vf.fit_decay_order(zip(x, x**2))
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_constant_samples():
    x = np.geomspace(1e-3, 1.0, 8)
    fit = vf.fit_decay_order(zip(x, np.full(8, 3.7)))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_noisy_power_law(rng):
    x = np.geomspace(1e-4, 1e-1, 24)
    y = 3.0 * x**-1.5 * (1.0 + 0.01 * rng.standard_normal(24))
    fit = vf.fit_decay_order(zip(x, y))
    assert fit.slope == pytest.approx(-1.5, abs=0.05)


def test_fit_preconditions():
    x = np.geomspace(1e-3, 1.0, 8)
    with pytest.raises(ValueError):
        vf.fit_decay_order(list(zip(x, x))[:4])
    with pytest.raises(ValueError):
        vf.fit_decay_order(zip(np.linspace(1.0, 2.0, 8), np.ones(8)))  # short span
    with pytest.raises(ValueError):
        vf.fit_decay_order(zip(x, np.concatenate([[-1.0], np.ones(7)])))


def test_residual_order_passes(cache):
    h = cache.get("asym-quadratic", 1e-4, 1, 2)
    row = vf.residual_order(h, s=0, m=1)
    assert row["passed"]
    assert row["fit"].slope >= row["predicted"] - row["tolerance"]
    row1 = vf.residual_order(h, s=1, m=1)
    assert row1["passed"]
    with pytest.raises(ValueError):
        vf.residual_order(h, s=2, m=1)


def test_residual_order_symmetric_profile(cache):
    # identical walls give the same guaranteed orders (and usually better)
    h = cache.get("sym-quadratic", 1e-4, 1, 2)
    assert vf.residual_order(h, s=0, m=1)["passed"]
    h2 = cache.get("asym-quadratic", 1e-4, 2, 2)
    assert vf.residual_order(h2, s=0, m=1)["passed"]


def test_residual_window_requires_room():
    h = cache_local = vf.HierarchyCache().get("sym-quadratic", 0.05, 1, 2, green=True)
    with pytest.raises(ValueError):
        vf.residual_order(h, s=0, m=1)  # 2 sqrt(0.05) > R/2


def test_blowup_orders_exact(cache):
    hs = [cache.get("sym-quadratic", e, 1, 1, green=True)
          for e in vf.DEFAULT_EPS_SWEEP]
    for m in (0, 1, 2, 3):
        row = vf.corrector_blowup_order(hs, m, 1)
        assert row["predicted"] == pytest.approx(-(m + 2) / 2)
        assert abs(row["fit"].slope - row["predicted"]) < 0.05


def test_blowup_point_inside_chart(cache):
    hs = [cache.get("sym-quadratic", 1e-2, 1, 1, green=True)]
    with pytest.raises(ValueError):
        vf.corrector_blowup_order(hs, 0, 1, r_eval=20.0)


def test_pressure_deriv_fields(cache):
    h = cache.get("sym-quadratic", 1e-2, 1, 2, green=True)
    p = h.cumulative_pressure(2)
    fields0 = vf.pressure_deriv_fields(p, 0)
    assert len(fields0) == 1
    fields2 = vf.pressure_deriv_fields(p, 2)
    assert len(fields2) == 3
    # d/dx2 of the pure part vanishes: the (k1=0, k2=2) entry equals the
    # poly-only derivative exactly
    xs = np.linspace(-0.3, 0.3, 11)
    a = fields2[0].eval(xs, 0.002)
    b = p.poly.partial_x2(2).eval(xs, 0.002)
    assert np.allclose(a, b, rtol=0, atol=0)
