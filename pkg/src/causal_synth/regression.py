"""Kernel regressors: RBF kernel ridge (the GP posterior mean) and a random-Fourier-feature ridge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import SampleTooSmallError, ShapeError, SingularKernelError
from .hsic import as_block, gaussian_gram, median_distance

RIDGE_GRID = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
MIN_ROWS = 20


@dataclass(frozen=True)
class RegressionFit:
    fitted_values: np.ndarray
    residuals: np.ndarray
    lengthscale: float
    ridge: float


class _Standardizer:
    def __init__(self, x: np.ndarray):
        self.mean = x.mean(axis=0)
        std = x.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


class KernelRidge:
    """Kernel ridge regression with a Gaussian kernel on standardized inputs.

    The lengthscale is the median pairwise distance of the training inputs; the
    ridge amount is picked from ``ridge_grid * n`` by closed-form leave-one-out error.
    """

    def __init__(self, ridge_grid=RIDGE_GRID):
        self.ridge_grid = tuple(ridge_grid)

    def fit(self, x, y) -> KernelRidge:
        x = as_block(x)
        y = np.asarray(y, dtype=float).ravel()
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"{x.shape[0]} predictor rows for {y.shape[0]} targets")
        n = x.shape[0]
        self._scale = _Standardizer(x)
        xs = self._scale(x)
        self.lengthscale_ = median_distance(xs)
        k = gaussian_gram(xs, self.lengthscale_)
        self.y_mean_ = y.mean()
        yc = y - self.y_mean_

        evals, evecs = np.linalg.eigh(k)
        evals = np.clip(evals, 0.0, None)
        proj = evecs.T @ yc
        best = None
        for c in self.ridge_grid:
            lam = c * n
            denom = evals + lam
            if not np.all(np.isfinite(denom)) or denom.min() <= 1e-12 * max(1.0, evals.max()):
                raise SingularKernelError(f"regularized kernel matrix is singular (ridge={lam})")
            # (K + lam I)^-1 y and its diagonal give the LOO residuals directly
            inv_y = evecs @ (proj / denom)
            inv_diag = np.einsum("ij,j,ij->i", evecs, 1.0 / denom, evecs)
            loo = np.mean((inv_y / inv_diag) ** 2)
            if best is None or loo < best[0]:
                best = (loo, lam, inv_y)
        _, self.ridge_, self.dual_coef_ = best
        self._x_train = xs
        self._k_train = k
        self.n_features_in_ = x.shape[1]
        return self

    def fitted(self) -> np.ndarray:
        return self.y_mean_ + self._k_train @ self.dual_coef_

    def predict(self, x) -> np.ndarray:
        x = as_block(x)
        if x.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} columns, got {x.shape[1]}")
        d2 = cdist(self._scale(x), self._x_train, "sqeuclidean")
        return self.y_mean_ + np.exp(-d2 / (2.0 * self.lengthscale_**2)) @ self.dual_coef_


def nonlinear_regress(predictors, target) -> RegressionFit:
    """Fit ``target ~ f(predictors)`` and return fitted values and residuals."""
    x = as_block(predictors)
    y = np.asarray(target, dtype=float).ravel()
    if x.shape[0] < MIN_ROWS:
        raise SampleTooSmallError(f"regression needs at least {MIN_ROWS} rows, got {x.shape[0]}")
    model = KernelRidge().fit(x, y)
    fitted = model.fitted()
    return RegressionFit(fitted, y - fitted, model.lengthscale_, model.ridge_)


class RandomFourierRidge:
    """Ridge regression on random Fourier features approximating an RBF kernel.

    Stands in for an RBF support-vector regressor: same kernel family, but a
    closed-form fit instead of a QP.
    """

    def __init__(self, n_components: int = 512, ridge_grid=RIDGE_GRID, seed: int = 0):
        self.n_components = n_components
        self.ridge_grid = tuple(ridge_grid)
        self.seed = seed

    def _features(self, xs: np.ndarray) -> np.ndarray:
        return np.sqrt(2.0 / self.n_components) * np.cos(xs @ self._w + self._b)

    def fit(self, x, y) -> RandomFourierRidge:
        x = as_block(x)
        y = np.asarray(y, dtype=float).ravel()
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"{x.shape[0]} predictor rows for {y.shape[0]} targets")
        n = x.shape[0]
        rng = np.random.default_rng(self.seed)
        self._scale = _Standardizer(x)
        xs = self._scale(x)
        self.lengthscale_ = median_distance(xs)
        self._w = rng.normal(scale=1.0 / self.lengthscale_, size=(x.shape[1], self.n_components))
        self._b = rng.uniform(0.0, 2.0 * np.pi, size=self.n_components)
        z = self._features(xs)
        self.y_mean_ = y.mean()
        yc = y - self.y_mean_

        u, s, vt = np.linalg.svd(z, full_matrices=False)
        uty = u.T @ yc
        best = None
        for c in self.ridge_grid:
            lam = c * n
            shrink = s * s / (s * s + lam)
            fitted = u @ (shrink * uty)
            hat_diag = np.einsum("ij,j,ij->i", u, shrink, u)
            loo = np.mean(((yc - fitted) / (1.0 - hat_diag)) ** 2)
            if best is None or loo < best[0]:
                best = (loo, lam, vt.T @ (s / (s * s + lam) * uty))
        _, self.ridge_, self.coef_ = best
        self.n_features_in_ = x.shape[1]
        return self

    def predict(self, x) -> np.ndarray:
        x = as_block(x)
        if x.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} columns, got {x.shape[1]}")
        return self.y_mean_ + self._features(self._scale(x)) @ self.coef_
