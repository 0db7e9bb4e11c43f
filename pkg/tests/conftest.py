"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from konus import trade_statistics
from konus.cli import CounterexampleFixture


@pytest.fixture
def appendix_panel():
    """Three-good ray-demand panel at epsilon zero: passes both axioms."""
    return CounterexampleFixture(0.0).statistics()


@pytest.fixture
def appendix_panel_half():
    """Same fixture at epsilon one half: strictly positive demands."""
    return CounterexampleFixture(0.5).statistics()


@pytest.fixture
def two_period_panel():
    """Two goods, two periods; fails homotheticity at level one (cycle product 1.25)."""
    return trade_statistics([[1.0, 2.0], [2.0, 1.0]], [[1.0, 1.0], [2.0, 1.0]])


def closure_by_paths(matrix, slack=1e-12):
    """Independent closure oracle: exact-length max-product DP up to T edges.

    Returns (values, diverged); divergence means some closed walk of at most
    T edges has product above one plus slack.
    """
    m = np.asarray(matrix, dtype=float)
    T = m.shape[0]
    best = m.copy()
    power = m.copy()
    diverged = bool(np.any(np.diagonal(m) > 1.0 + slack))
    for _ in range(T - 1):
        power = (power[:, :, np.newaxis] * m[np.newaxis, :, :]).max(axis=1)
        best = np.maximum(best, power)
        diverged = diverged or bool(np.any(np.diagonal(power) > 1.0 + slack))
    return best, diverged


def random_panel(rng, T=None, m=None, max_T=6, max_m=5):
    """Random lognormal panel with small dimensions for oracle comparisons."""
    T = T if T is not None else int(rng.integers(2, max_T + 1))
    m = m if m is not None else int(rng.integers(1, max_m + 1))
    prices = np.exp(rng.normal(0.0, 0.5, size=(T, m)))
    quantities = np.exp(rng.normal(0.0, 0.5, size=(T, m)))
    return trade_statistics(prices, quantities)


def near_homothetic_panel(rng, T, m, noise=0.2):
    """Fixed-share demand jittered multiplicatively: passes homotheticity often, not always."""
    shares = rng.dirichlet(np.ones(m)) + 1e-3
    shares = shares / shares.sum()
    prices = np.exp(rng.normal(0.0, 0.4, size=(T, m)))
    spend = np.exp(rng.normal(0.0, 0.3, size=T))
    quantities = shares[np.newaxis, :] * spend[:, np.newaxis] / prices
    quantities = quantities * np.exp(rng.normal(0.0, noise, size=(T, m)))
    return trade_statistics(prices, quantities)
