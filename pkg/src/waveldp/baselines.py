"""Binning baselines: categorical frequency oracles with calibration.

Samples in [0, 1] are bucketed into d equal bins (x = 1 folded into the last
bin, matching the wavelet cell convention), reported through a categorical
randomizer, debiased, projected onto the probability simplex, and turned
into a piecewise-linear cdf.

Two randomizers are provided.  kRR keeps the true category with probability
p = e**eps / (e**eps + d - 1) and otherwise flips to a uniformly random other
category.  OUE reports one bit per category: the true one stays set with
probability 1/2 and every other bit turns on with probability 1/(e**eps + 1).
kRR wins at small d, OUE at large d; ``choose_oracle`` applies the crossover
rule d < 3 e**eps + 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .haar import StepCdf

__all__ = [
    "FrequencyVector",
    "Oracle",
    "bin_samples",
    "krr_perturb",
    "krr_perturb_batch",
    "krr_estimate",
    "oue_perturb",
    "oue_perturb_batch",
    "oue_estimate",
    "normsub",
    "binned_cdf",
    "choose_oracle",
    "binning_estimate",
]


def _check_epsilon(epsilon: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")


def _check_d(d: int) -> None:
    if d < 2:
        raise ValueError(f"need at least 2 bins, got {d}")


@dataclass(frozen=True)
class FrequencyVector:
    """Estimated per-bin frequencies; raw until passed through normsub."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("values must be a non-empty vector")
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return int(self.values.size)

    def is_calibrated(self, tol: float = 1e-9) -> bool:
        return bool(
            (self.values >= 0.0).all() and abs(self.values.sum() - 1.0) <= tol
        )


class Oracle(enum.Enum):
    KRR = "krr"
    OUE = "oue"


def bin_samples(x, d: int) -> np.ndarray:
    """Bin index floor(x * d) for samples in [0, 1], x = 1 into the last bin."""
    _check_d(d)
    x = np.asarray(x, dtype=np.float64)
    if x.size and not (
        np.isfinite(x).all() and x.min() >= 0.0 and x.max() <= 1.0
    ):
        raise ValueError("samples must lie in [0, 1]")
    idx = (x * d).astype(np.int64)
    np.minimum(idx, d - 1, out=idx)
    return idx


def _krr_rates(d: int, epsilon: float) -> tuple[float, float]:
    ee = math.exp(epsilon)
    return ee / (ee + d - 1.0), 1.0 / (ee + d - 1.0)


def krr_perturb_batch(
    x: np.ndarray, d: int, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """Randomize a batch of category indices with kRR."""
    _check_d(d)
    _check_epsilon(epsilon)
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= d):
        raise ValueError(f"categories must lie in [0, {d})")
    p, _ = _krr_rates(d, epsilon)
    keep = rng.random(x.size) < p
    other = rng.integers(0, d - 1, size=x.size)
    return np.where(keep, x, other + (other >= x))


def krr_perturb(x: int, d: int, epsilon: float, rng: np.random.Generator) -> int:
    return int(krr_perturb_batch(np.array([x]), d, epsilon, rng)[0])


def krr_estimate(reports, epsilon: float, d: int) -> FrequencyVector:
    """Unbiased frequency estimate (f_hat - q) / (p - q) from kRR reports."""
    _check_d(d)
    _check_epsilon(epsilon)
    reports = np.asarray(reports, dtype=np.int64)
    if reports.size == 0:
        raise ValueError("need at least one report")
    p, q = _krr_rates(d, epsilon)
    f_hat = np.bincount(reports, minlength=d) / reports.size
    return FrequencyVector((f_hat - q) / (p - q))


def _oue_rates(epsilon: float) -> tuple[float, float]:
    return 0.5, 1.0 / (math.exp(epsilon) + 1.0)


def oue_perturb_batch(
    x: np.ndarray, d: int, epsilon: float, rng: np.random.Generator
) -> np.ndarray:
    """Randomize a batch of category indices with OUE; rows are bit vectors."""
    _check_d(d)
    _check_epsilon(epsilon)
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= d):
        raise ValueError(f"categories must lie in [0, {d})")
    p, q = _oue_rates(epsilon)
    bits = rng.random((x.size, d)) < q
    bits[np.arange(x.size), x] = rng.random(x.size) < p
    return bits


def oue_perturb(x: int, d: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    return oue_perturb_batch(np.array([x]), d, epsilon, rng)[0]


def oue_estimate(reports, epsilon: float, d: int) -> FrequencyVector:
    """Per-coordinate debiased frequencies from an (n, d) OUE bit matrix."""
    _check_d(d)
    _check_epsilon(epsilon)
    reports = np.asarray(reports)
    if reports.ndim != 2 or reports.shape[0] == 0 or reports.shape[1] != d:
        raise ValueError(f"reports must be a non-empty (n, {d}) bit matrix")
    p, q = _oue_rates(epsilon)
    f_hat = reports.mean(axis=0)
    return FrequencyVector((f_hat - q) / (p - q))


def normsub(raw: FrequencyVector) -> FrequencyVector:
    """Project raw frequencies onto the simplex by zero-and-shift passes.

    Each pass zeroes negatives and subtracts a uniform delta from the
    remaining positives so the total is one; at least one positive hits zero
    per repeat, so at most d passes run.  An all-nonpositive input falls back
    to the uniform vector.
    """
    w = raw.values.copy()
    for _ in range(w.size + 1):
        w = np.maximum(w, 0.0)
        pos = w > 0.0
        if not pos.any():
            return FrequencyVector(np.full(w.size, 1.0 / w.size))
        w[pos] -= (w.sum() - 1.0) / pos.sum()
        if (w >= 0.0).all():
            return FrequencyVector(w)
    raise AssertionError("normsub failed to converge")


def binned_cdf(freq: FrequencyVector, grid: int) -> StepCdf:
    """Piecewise-linear cdf of calibrated bin frequencies on a uniform grid."""
    if grid < 1:
        raise ValueError("grid must be positive")
    if (freq.values < 0.0).any() or abs(freq.values.sum() - 1.0) > 1e-6:
        raise ValueError("frequencies must be calibrated first")
    d = freq.d
    bin_knots = np.concatenate(([0.0], np.cumsum(freq.values)))
    pts = np.arange(grid + 1) / grid
    return StepCdf(np.interp(pts, np.arange(d + 1) / d, bin_knots))


def choose_oracle(d: int, epsilon: float) -> Oracle:
    """kRR below the variance crossover d = 3 e**eps + 2, OUE at or above."""
    _check_d(d)
    _check_epsilon(epsilon)
    return Oracle.KRR if d < 3.0 * math.exp(epsilon) + 2.0 else Oracle.OUE


def binning_estimate(
    samples, d: int, epsilon: float, rng: np.random.Generator
) -> FrequencyVector:
    """Full binning pipeline: bin, randomize, debias, calibrate."""
    idx = bin_samples(samples, d)
    if choose_oracle(d, epsilon) is Oracle.KRR:
        raw = krr_estimate(krr_perturb_batch(idx, d, epsilon, rng), epsilon, d)
    else:
        raw = oue_estimate(oue_perturb_batch(idx, d, epsilon, rng), epsilon, d)
    return normsub(raw)
