import numpy as np
import pytest

from causal_synth.errors import SampleTooSmallError, ShapeError
from causal_synth.hsic import hsic_test
from causal_synth.regression import RIDGE_GRID, KernelRidge, RandomFourierRidge, nonlinear_regress


def test_linear_target_is_fit_closely():
    u = np.random.default_rng(0).normal(size=100)
    y = 2 * u
    fit = nonlinear_regress(u, y)
    assert np.sqrt(np.mean(fit.residuals**2)) < 0.05 * y.std()


def test_matches_closed_form_kernel_ridge():
    rng = np.random.default_rng(1)
    u = rng.normal(size=80)
    y = 2 * u + 0.1 * rng.normal(size=80)
    fit = nonlinear_regress(u, y)
    z = (u - u.mean()) / u.std()
    d = np.abs(z[:, None] - z[None, :])
    s = np.median(d[np.triu_indices(80, 1)])
    k = np.exp(-d**2 / (2 * s * s))
    coef = np.linalg.solve(k + fit.ridge * np.eye(80), y - y.mean())
    np.testing.assert_allclose(fit.fitted_values, y.mean() + k @ coef, rtol=1e-8, atol=1e-10)
    assert fit.lengthscale == pytest.approx(s)


def test_ridge_is_picked_by_brute_force_leave_one_out():
    rng = np.random.default_rng(2)
    n = 60
    u = rng.uniform(-2, 2, n)
    y = np.sin(2 * u) + 0.3 * rng.normal(size=n)
    fit = nonlinear_regress(u, y)
    z = (u - u.mean()) / u.std()
    k = np.exp(-((z[:, None] - z[None, :]) ** 2) / (2 * fit.lengthscale**2))
    yc = y - y.mean()

    def loo(lam):
        errs = []
        for i in range(n):
            keep = np.arange(n) != i
            coef = np.linalg.solve(k[np.ix_(keep, keep)] + lam * np.eye(n - 1), yc[keep])
            errs.append((yc[i] - k[i, keep] @ coef) ** 2)
        return np.mean(errs)

    grid = [c * n for c in RIDGE_GRID]
    assert fit.ridge == pytest.approx(min(grid, key=loo))


def test_pure_noise_target():
    rng = np.random.default_rng(3)
    u, y = rng.normal(size=300), rng.normal(size=300)
    fit = nonlinear_regress(u, y)
    assert np.std(fit.fitted_values) < 0.3 * np.std(y)
    assert np.var(fit.residuals) == pytest.approx(np.var(y), rel=0.2)


def test_cubic_residuals_independent_of_input():
    rng = np.random.default_rng(4)
    u = rng.uniform(-2, 2, 500)
    y = u**3 + 0.1 * rng.uniform(-1, 1, 500)  # small noise
    fit = nonlinear_regress(u, y)
    assert hsic_test(u, fit.residuals, 0.001).independent


def test_residuals_plus_fit_reconstruct_target():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(50, 2)), rng.normal(size=50) * 1e3
    fit = nonlinear_regress(x, y)
    np.testing.assert_allclose(fit.fitted_values + fit.residuals, y, rtol=1e-9)


def test_too_few_rows():
    with pytest.raises(SampleTooSmallError):
        nonlinear_regress(np.arange(10.0), np.arange(10.0))


def test_predict_shape_checks():
    x = np.random.default_rng(6).normal(size=(40, 2))
    for model in (KernelRidge(), RandomFourierRidge(n_components=64)):
        model.fit(x, x[:, 0])
        with pytest.raises(ShapeError):
            model.predict(np.zeros((3, 3)))


def test_kernel_ridge_predict_on_training_points_matches_fitted():
    x = np.random.default_rng(7).normal(size=(40, 2))
    m = KernelRidge().fit(x, np.sin(x[:, 0]))
    np.testing.assert_allclose(m.predict(x), m.fitted(), atol=1e-10)


def test_random_fourier_ridge_fits_smooth_function():
    rng = np.random.default_rng(8)
    u = rng.uniform(-2, 2, (300, 1))
    y = np.sin(2 * u[:, 0])
    pred = RandomFourierRidge().fit(u, y).predict(u)
    assert np.sqrt(np.mean((pred - y) ** 2)) < 0.15 * y.std()
