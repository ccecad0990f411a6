"""Grid-based distances between estimated and empirical distributions.

All comparisons happen on a uniform grid of M cells (M = 256 by default):
cdfs are represented by their M+1 knot values, the Wasserstein distance is
the mean absolute knot gap over k = 1..M, and the KS distance is the largest
gap over all knots.  Range-query error draws random intervals [a, a+alpha],
answers them from the estimated cdf by linear interpolation, and compares
against exact counts over the raw samples.
"""

from __future__ import annotations

import numpy as np

from .haar import StepCdf

__all__ = [
    "GRID",
    "empirical_cdf",
    "interp_cdf",
    "wasserstein",
    "ks",
    "range_query_errors",
    "range_query_mae",
]

GRID = 256


def _check_pair(est: StepCdf, emp: StepCdf) -> None:
    if est.grid != emp.grid:
        raise ValueError(f"grid mismatch: {est.grid} vs {emp.grid}")


def _check_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a non-empty 1-d array")
    if not (np.isfinite(x).all() and x.min() >= 0.0 and x.max() <= 1.0):
        raise ValueError("samples must lie in [0, 1]")
    return x


def empirical_cdf(samples, grid: int = GRID) -> StepCdf:
    """Fraction of samples <= k/grid at each knot, from one sort."""
    if grid < 1:
        raise ValueError("grid must be positive")
    x = np.sort(_check_samples(samples))
    pts = np.arange(grid + 1) / grid
    return StepCdf(np.searchsorted(x, pts, side="right") / x.size)


def interp_cdf(cdf: StepCdf, t) -> np.ndarray:
    """Cdf values at arbitrary points by linear interpolation between knots."""
    pts = np.arange(cdf.grid + 1) / cdf.grid
    return np.interp(np.asarray(t, dtype=np.float64), pts, cdf.knots)


def wasserstein(est: StepCdf, emp: StepCdf) -> float:
    """Mean absolute cdf gap over the interior-and-right knots k = 1..M."""
    _check_pair(est, emp)
    return float(np.abs(est.knots[1:] - emp.knots[1:]).mean())


def ks(est: StepCdf, emp: StepCdf) -> float:
    """Largest absolute cdf gap over all knots."""
    _check_pair(est, emp)
    return float(np.abs(est.knots - emp.knots).max())


def range_query_errors(
    est: StepCdf, samples, alpha: float, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Absolute errors of ``trials`` random interval queries of width alpha.

    Each query draws a ~ Unif([0, 1-alpha]), asks the estimated cdf for the
    mass of [a, a+alpha], and compares with the exact fraction of samples in
    the closed interval.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if trials < 1:
        raise ValueError("need at least one trial")
    x = np.sort(_check_samples(samples))
    a = rng.random(trials) * (1.0 - alpha)
    b = a + alpha
    truth = (
        np.searchsorted(x, b, side="right") - np.searchsorted(x, a, side="left")
    ) / x.size
    guess = interp_cdf(est, b) - interp_cdf(est, a)
    return np.abs(guess - truth)


def range_query_mae(
    est: StepCdf, samples, alpha: float, trials: int, rng: np.random.Generator
) -> float:
    """Mean absolute error of random interval queries of width alpha."""
    return float(range_query_errors(est, samples, alpha, trials, rng).mean())
