"""Seeded data sets shared by several test modules."""

from __future__ import annotations

import numpy as np

from causal_synth.core import Dataset

ANM_FUNCTIONS = {
    "cube": lambda u: u**3,
    "exp": np.exp,
    "tanh": lambda u: np.tanh(2 * u),
    "square": lambda u: u**2,
    "sin": np.sin,
    "sqrt": lambda u: np.sqrt(u + 2.01),
    "cubic_plus_linear": lambda u: u + u**3,
}


def rescale(g, width=10.0):
    return width * (g - g.min()) / np.ptp(g)


def bivariate_anm(seed: int, n: int = 1000, function: str | None = None) -> Dataset:
    """u ~ U(-2, 2) and v = g(u) rescaled to [0, 10] plus U(-1, 1) noise."""
    rng = np.random.default_rng(seed)
    names = sorted(ANM_FUNCTIONS)
    f = ANM_FUNCTIONS[function or names[seed % len(names)]]
    u = rng.uniform(-2, 2, n)
    v = rescale(f(u)) + rng.uniform(-1, 1, n)
    return Dataset(("u", "v"), np.column_stack([u, v]))


def chain(seed: int, n: int = 1000, length: int = 5) -> Dataset:
    """x0 -> x1 -> ... with monotone nonlinear links, each rescaled to [0, 10] plus U(-1, 1) noise."""
    rng = np.random.default_rng(seed)
    links = [lambda x: x**3, np.exp, lambda x: np.sqrt(x + 2.01), np.tanh]
    cols = [rng.uniform(-2, 2, n)]
    for k in range(1, length):
        parent = (cols[-1] - cols[-1].mean()) / cols[-1].std()
        cols.append(rescale(links[(k - 1) % len(links)](parent)) + rng.uniform(-1, 1, n))
    return Dataset(tuple(f"x{k}" for k in range(length)), np.column_stack(cols))


def independent_uniforms(seed: int, n: int = 1000, m: int = 4) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(tuple(f"x{k}" for k in range(m)), rng.uniform(0, 1, size=(n, m)))
