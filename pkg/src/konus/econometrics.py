"""AR modelling of log price relatives, randomized-statistics power estimation,
and random-group probability curves.

Price counterfactuals keep the observed demands and redraw prices from
per-good autoregressions of log price relatives, so the power estimates
capture how often consistency would be rejected when prices carry no
information about demand.  All Monte Carlo routines derive per-trial RNG
substreams from ``(seed, trial)`` and are therefore reproducible bit for bit
regardless of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from ._mc import map_trials, trial_rng
from .axioms import _garp_violations, _harp_satisfied_from_paasche
from .core import FloatArray, TradeStatistics, trade_statistics

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ARModel:
    """Autoregression of a log price relative series, order selected by AIC.

    ``beta`` holds the intercept first; ``sigma2`` is the floored maximum
    likelihood residual variance used when simulating.
    """

    order: int
    beta: FloatArray
    sigma2: float
    stderr: FloatArray
    good_id: str = ""


@dataclass(frozen=True)
class PowerReport:
    """Paired test-power estimates over randomized price panels."""

    trials: int
    garp_rejections: int
    harp_rejections: int
    seed: int

    @property
    def w_hat_g(self) -> float:
        return self.garp_rejections / self.trials

    @property
    def w_hat_h(self) -> float:
        return self.harp_rejections / self.trials


@dataclass(frozen=True)
class GroupProbabilityCurve:
    """Per-size fractions of random good groups passing each axiom at level one."""

    sizes: tuple[int, ...]
    samples: tuple[int, ...]
    p_garp: tuple[float, ...]
    p_harp: tuple[float, ...]
    skipped: tuple[int, ...]  # diagnostics: draws discarded for an all-zero demand row
    seed: int


def fit_ar(series: Sequence[float], max_order: int = 2, *, good_id: str = "") -> ARModel:
    """OLS autoregressions of orders 0..max_order, compared by AIC on a common sample.

    All candidate orders are fitted on the effective sample that the largest
    order allows, so their likelihoods are comparable; AIC uses the maximum
    likelihood variance, ``n_eff * log(sigma2) + 2 * (r + 1)``, with ties going
    to the smaller order.  The variance is floored at ``1e-12`` so constant
    series cannot produce ``log(0)``.
    """
    z = np.asarray(series, dtype=float)
    if z.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = z.shape[0]
    if n < 2:
        raise ValueError(f"series of length {n} is too short for any autoregression")
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    effective_max = min(max_order, n - 2)
    y = z[effective_max:]
    n_eff = y.shape[0]
    best: tuple[float, int, np.ndarray, float, np.ndarray] | None = None
    for order in range(effective_max + 1):
        design = np.ones((n_eff, order + 1))
        for lag in range(1, order + 1):
            design[:, lag] = z[effective_max - lag:n - lag]
        beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        residuals = y - design @ beta
        sigma2 = max(float(residuals @ residuals) / n_eff, VARIANCE_FLOOR)
        aic = n_eff * math.log(sigma2) + 2.0 * (order + 1)
        if best is None or aic < best[0]:
            dof = n_eff - (order + 1)
            if dof > 0:
                s2 = float(residuals @ residuals) / dof
                cov = s2 * np.linalg.pinv(design.T @ design)
                stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
            else:
                stderr = np.full(order + 1, np.inf)
            best = (aic, order, beta, sigma2, stderr)
    assert best is not None
    _, order, beta, sigma2, stderr = best
    return ARModel(order=order, beta=beta, sigma2=sigma2, stderr=stderr, good_id=good_id)


def log_relatives(ts: TradeStatistics) -> FloatArray:
    """Per-good log price relatives, shape (T - 1, m)."""
    return np.log(ts.prices[1:] / ts.prices[:-1])


def fit_price_models(ts: TradeStatistics, max_order: int = 2) -> list[ARModel]:
    """One autoregression per good, fitted to its log price relatives."""
    if ts.num_periods < 3:
        raise ValueError("need at least three periods to fit price models")
    rel = log_relatives(ts)
    return [fit_ar(rel[:, i], max_order, good_id=ts.good_ids[i]) for i in range(ts.num_goods)]


def simulate_price_paths(ts: TradeStatistics, models: Sequence[ARModel],
                         rng: np.random.Generator) -> FloatArray:
    """Simulated price panel anchored at the observed first period.

    The first ``order`` log relatives of each good are copied from the data;
    later relatives follow the fitted recursion with independent Gaussian
    noise.  Prices are rebuilt multiplicatively, good by good in panel order
    so the draw sequence is reproducible.
    """
    if len(models) != ts.num_goods:
        raise ValueError(f"expected {ts.num_goods} models, got {len(models)}")
    T = ts.num_periods
    observed = log_relatives(ts)
    prices = np.empty_like(ts.prices)
    prices[0] = ts.prices[0]
    relatives = np.empty((T - 1, ts.num_goods))
    for i, model in enumerate(models):
        r = model.order
        if r > 0:
            relatives[:r, i] = observed[:r, i]
        noise = rng.standard_normal(T - 1 - r) * math.sqrt(model.sigma2)
        for j in range(r, T - 1):
            mean = model.beta[0]
            for lag in range(1, r + 1):
                mean += model.beta[lag] * relatives[j - lag, i]
            relatives[j, i] = mean + noise[j - r]
    for t in range(1, T):
        prices[t] = prices[t - 1] * np.exp(relatives[t - 1])
    return prices


def _power_trial(ts: TradeStatistics, models: Sequence[ARModel], seed: int, trial: int) -> tuple[bool, bool]:
    prices = simulate_price_paths(ts, models, trial_rng(seed, trial))
    px = prices @ ts.quantities.T
    _, bad = _garp_violations(px, 1.0, 0.0)
    garp_fails = bool(bad.any())
    paasche = px.diagonal()[np.newaxis, :] / px
    harp_fails = not _harp_satisfied_from_paasche(paasche, 1.0, 0.0)
    # an acyclicity failure is a homotheticity failure; enforce the
    # implication against rounding at the cycle-product boundary
    harp_fails = harp_fails or garp_fails
    return garp_fails, harp_fails


def power_estimate(ts: TradeStatistics, trials: int, seed: int, *,
                   workers: int = 1, max_order: int = 2) -> PowerReport:
    """Fraction of randomized panels whose irrationality index exceeds one.

    Prices are simulated from the fitted per-good autoregressions while
    demands stay fixed; a trial counts against an axiom when the panel fails
    it at level one, which for continuous price draws is the event that the
    corresponding irrationality index is above one.  Trials are paired, so
    the homothetic rejection count never falls below the acyclic one.
    """
    if trials < 1:
        raise ValueError("trial count must be positive")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    models = fit_price_models(ts, max_order)
    outcomes = map_trials(lambda b: _power_trial(ts, models, seed, b), trials, workers)
    garp_rejections = sum(1 for g, _ in outcomes if g)
    harp_rejections = sum(1 for _, h in outcomes if h)
    return PowerReport(trials=trials, garp_rejections=garp_rejections,
                       harp_rejections=harp_rejections, seed=seed)


def _group_verdicts(ts: TradeStatistics, idx: np.ndarray) -> tuple[bool, bool]:
    prices = ts.prices[:, idx]
    quantities = ts.quantities[:, idx]
    px = prices @ quantities.T
    _, bad = _garp_violations(px, 1.0, 0.0)
    garp_ok = not bool(bad.any())
    paasche = px.diagonal()[np.newaxis, :] / px
    harp_ok = _harp_satisfied_from_paasche(paasche, 1.0, 0.0)
    garp_ok = garp_ok or harp_ok  # homotheticity implies acyclicity
    return garp_ok, harp_ok


def _group_valid(ts: TradeStatistics, idx: np.ndarray) -> bool:
    return bool(np.all(ts.quantities[:, idx].max(axis=1) > 0.0))


def _sampled_group(ts: TradeStatistics, size: int, seed: int, draw: int,
                   resample_cap: int) -> tuple[np.ndarray | None, int]:
    """One random group of the requested size, resampling past invalid draws."""
    rng = trial_rng(seed, size, draw)
    rejected = 0
    for _ in range(resample_cap):
        idx = np.sort(rng.choice(ts.num_goods, size=size, replace=False))
        if _group_valid(ts, idx):
            return idx, rejected
        rejected += 1
    return None, rejected


def random_group_probability(
    ts: TradeStatistics,
    sizes: Sequence[int],
    samples_per_size: int,
    seed: int,
    *,
    workers: int = 1,
    resample_cap: int = 1000,
) -> GroupProbabilityCurve:
    """Fractions of random good groups passing each axiom, per group size.

    Sizes with fewer distinct groups than ``samples_per_size`` are enumerated
    exhaustively; otherwise groups are drawn uniformly without replacement
    within each draw.  Draws whose restricted demand panel has an all-zero
    row are resampled and counted in the ``skipped`` tally.  Single-good
    groups are rejected because they satisfy both axioms trivially.
    """
    if samples_per_size < 1:
        raise ValueError("samples_per_size must be positive")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    for size in sizes:
        if size < 2 or size > ts.num_goods:
            raise ValueError(
                f"group size {size} out of range [2, {ts.num_goods}]; "
                "single-good groups pass both axioms trivially"
            )
    out_sizes: list[int] = []
    out_samples: list[int] = []
    out_garp: list[float] = []
    out_harp: list[float] = []
    out_skipped: list[int] = []
    for size in sizes:
        if math.comb(ts.num_goods, size) <= samples_per_size:
            groups = [np.asarray(c, dtype=int) for c in combinations(range(ts.num_goods), size)]
            valid = [g for g in groups if _group_valid(ts, g)]
            skipped = len(groups) - len(valid)
            verdicts = map_trials(lambda j: _group_verdicts(ts, valid[j]), len(valid), workers)
        else:
            draws = map_trials(
                lambda j: _sampled_group(ts, size, seed, j, resample_cap),
                samples_per_size, workers,
            )
            skipped = sum(r for _, r in draws)
            chosen = [idx for idx, _ in draws if idx is not None]
            if len(chosen) < samples_per_size:
                raise RuntimeError(
                    f"could not draw enough valid groups of size {size} "
                    f"within the resample cap {resample_cap}"
                )
            verdicts = map_trials(lambda j: _group_verdicts(ts, chosen[j]), len(chosen), workers)
        total = len(verdicts)
        if total == 0:
            raise RuntimeError(f"no valid groups of size {size}")
        out_sizes.append(size)
        out_samples.append(total)
        out_garp.append(sum(1 for g, _ in verdicts if g) / total)
        out_harp.append(sum(1 for _, h in verdicts if h) / total)
        out_skipped.append(skipped)
    return GroupProbabilityCurve(
        sizes=tuple(out_sizes),
        samples=tuple(out_samples),
        p_garp=tuple(out_garp),
        p_harp=tuple(out_harp),
        skipped=tuple(out_skipped),
        seed=seed,
    )


def cobb_douglas_statistics(T: int, m: int, seed: int, *,
                            price_volatility: float = 0.3,
                            expenditure_drift: float = 0.05) -> TradeStatistics:
    """Synthetic panel from a fixed-share consumer: homothetic by construction.

    Prices follow independent lognormal walks and each period's demand spends
    a constant share of total expenditure on every good, so the panel passes
    the homotheticity test (and hence the acyclicity test) by construction.
    Useful as a rationalizable stand-in for the real panels the experiments
    were designed around.
    """
    rng = np.random.default_rng(seed)
    shares = rng.dirichlet(np.ones(m)) + 1e-3
    shares = shares / shares.sum()
    steps = rng.normal(0.0, price_volatility, size=(T, m))
    prices = np.exp(np.cumsum(steps, axis=0))
    spend = np.exp(np.cumsum(rng.normal(expenditure_drift, 0.1, size=T)))
    quantities = shares[np.newaxis, :] * spend[:, np.newaxis] / prices
    return trade_statistics(prices, quantities)


def random_statistics(T: int, m: int, seed: int, *, volatility: float = 0.5) -> TradeStatistics:
    """Unstructured panel: independent lognormal prices and quantities."""
    rng = np.random.default_rng(seed)
    prices = np.exp(rng.normal(0.0, volatility, size=(T, m)))
    quantities = np.exp(rng.normal(0.0, volatility, size=(T, m)))
    return trade_statistics(prices, quantities)
