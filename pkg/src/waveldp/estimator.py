"""End-to-end private distribution estimation on the unit interval.

The estimator picks a top wavelet level J, splits the users across levels
0..J, runs the signed subset-selection randomizer once per user at the
user's assigned level, aggregates unbiased coefficient estimates, and
optionally post-processes the coefficient tree so the reconstructed pdf is
non-negative and integrates to one.

Sample allocation weighs each level by 2**(-j) * sqrt(V_j), where V_j is the
per-user variance of that level's coefficient estimates with the subset size
tuned by ``optimal_m``.  The same V_j values feed ``compute_bound``, a fully
computable error bound: approximation floor 2**(-(J+1)) plus the root of the
allocated estimation variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .haar import CoefficientTree, PiecewisePdf, amplitude, reconstruct_pdf
from .mechanism import (
    aggregate_sums,
    derive_params,
    encode_batch,
    level_variance,
    optimal_m,
    perturb_sum,
)

__all__ = [
    "AllocationPlan",
    "EstimatorConfig",
    "select_J",
    "allocate",
    "estimate",
    "estimate_tree",
    "postprocess",
    "compute_bound",
]

MAX_LEVEL = 20


def _check_epsilon(epsilon: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")


@dataclass(frozen=True)
class AllocationPlan:
    """Users per level, counts[j] users running the level-j randomizer."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) == 0:
            raise ValueError("need at least one level")
        if any(c < 1 for c in self.counts):
            raise ValueError("every level needs at least one user")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def max_level(self) -> int:
        return len(self.counts) - 1


@dataclass(frozen=True)
class EstimatorConfig:
    epsilon: float
    J: Optional[int] = None
    seed: int = 0
    postprocess: bool = True

    def __post_init__(self) -> None:
        _check_epsilon(self.epsilon)
        if self.J is not None and not 0 <= self.J <= MAX_LEVEL:
            raise ValueError(f"J must lie in [0, {MAX_LEVEL}], got {self.J}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def select_J(n: int) -> int:
    """Top level ceil(log2(n) / 2): the smallest J with 4**J >= n."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    J = 0
    while 4**J < n:
        J += 1
    return J


def _variance_factors(J: int, epsilon: float) -> np.ndarray:
    """Per-user variance V_j of each level's estimates at the tuned m."""
    out = np.empty(J + 1)
    for j in range(J + 1):
        d = 2**j
        params = derive_params(d, optimal_m(d, epsilon), epsilon)
        out[j] = level_variance(params, 1).bound
    return out


def allocate(n: int, J: int, epsilon: float) -> AllocationPlan:
    """Split n users over levels 0..J proportionally to 2**(-j) sqrt(V_j).

    Flooring leftovers go to level 0; levels floored to zero are raised to
    one user each, taken from the currently largest level.
    """
    _check_epsilon(epsilon)
    if not 0 <= J <= MAX_LEVEL:
        raise ValueError(f"J must lie in [0, {MAX_LEVEL}], got {J}")
    if n < J + 1:
        raise ValueError(f"need at least J+1 = {J + 1} users, got {n}")
    weights = 2.0 ** -np.arange(J + 1) * np.sqrt(_variance_factors(J, epsilon))
    shares = n * weights / weights.sum()
    counts = np.floor(shares).astype(np.int64)
    counts[0] += n - counts.sum()
    while (counts == 0).any():
        counts[int(np.argmax(counts == 0))] += 1
        counts[int(np.argmax(counts))] -= 1
    return AllocationPlan(tuple(int(c) for c in counts))


def _check_samples(samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a non-empty 1-d array")
    if not (np.isfinite(x).all() and x.min() >= 0.0 and x.max() <= 1.0):
        raise ValueError("samples must lie in [0, 1]")
    return x


def estimate_tree(
    samples, cfg: EstimatorConfig, identity: bool = False
) -> CoefficientTree:
    """Coefficient tree behind ``estimate``, before any post-processing.

    With ``identity=True`` the randomizer is replaced by the identity and no
    user split happens: every sample feeds every level, so the result is the
    empirical coefficient tree.  That hook exists for consistency tests and
    gives no privacy.
    """
    x = _check_samples(samples)
    n = x.size
    J = cfg.J if cfg.J is not None else select_J(n)
    if J > MAX_LEVEL:
        raise ValueError(f"selected J = {J} exceeds the guard {MAX_LEVEL}")
    levels: list[np.ndarray] = []
    if identity:
        for j in range(J + 1):
            pos, sgn = encode_batch(x, j)
            net = np.bincount(pos, weights=sgn.astype(np.float64), minlength=2**j)
            levels.append(amplitude(j) * net / n)
        return CoefficientTree(J, levels)
    rng = np.random.default_rng(cfg.seed)
    plan = allocate(n, J, cfg.epsilon)
    perm = rng.permutation(n)
    offset = 0
    for j in range(J + 1):
        n_j = plan.counts[j]
        part = x[perm[offset : offset + n_j]]
        offset += n_j
        pos, sgn = encode_batch(part, j)
        d = 2**j
        params = derive_params(d, optimal_m(d, cfg.epsilon), cfg.epsilon)
        sums = perturb_sum(pos, sgn, params, rng)
        levels.append(aggregate_sums(sums, params, n_j))
    return CoefficientTree(J, levels)


def estimate(samples, cfg: EstimatorConfig) -> PiecewisePdf:
    """Private pdf estimate of the sample distribution on [0, 1].

    Deterministic given the sample order and ``cfg.seed``.
    """
    tree = estimate_tree(samples, cfg)
    if cfg.postprocess:
        tree = postprocess(tree)
    return reconstruct_pdf(tree)


def postprocess(tree: CoefficientTree) -> CoefficientTree:
    """Clip each level's coefficients so the reconstructed pdf stays >= 0.

    Walks levels from the constant function upward.  On the support of one
    level-j coefficient the partial reconstruction is a single height H, and
    refining splits it into H +- a * 2**(j/2); clipping a to |a| <= H * 2**(-j/2)
    keeps both halves non-negative and leaves the integral at exactly one.
    The nudge loop below retightens the clip when the product rounds above H.
    """
    heights = np.ones(1)
    levels: list[np.ndarray] = []
    for j in range(tree.max_level + 1):
        amp = amplitude(j)
        cap = heights / amp
        clipped = np.clip(tree.levels[j], -cap, cap)
        over = np.abs(clipped) * amp > heights
        while over.any():
            clipped[over] = np.nextafter(clipped[over], 0.0)
            over = np.abs(clipped) * amp > heights
        levels.append(clipped)
        delta = clipped * amp
        nxt = np.empty(2 * heights.size)
        nxt[0::2] = heights + delta
        nxt[1::2] = heights - delta
        heights = nxt
    return CoefficientTree(tree.max_level, levels)


def compute_bound(n: int, J: int, epsilon: float) -> float:
    """Non-asymptotic mean Wasserstein error bound for given n, J, epsilon.

    Approximation floor 2**(-(J+1)) plus the root of the summed per-level
    estimation variance 2**(-(2j+2)) V_j / n_j under the allocation plan.
    """
    plan = allocate(n, J, epsilon)
    V = _variance_factors(J, epsilon)
    total = sum(
        4.0 ** -(j + 1) * V[j] / plan.counts[j] for j in range(J + 1)
    )
    return 2.0 ** -(J + 1) + math.sqrt(total)
