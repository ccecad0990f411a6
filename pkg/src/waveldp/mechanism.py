"""Signed subset-selection randomizer for private wavelet coefficients.

A user's sample is encoded at level j as a 1-sparse vector v in {-1,0,1}**d
with d = 2**j: the nonzero coordinate marks the wavelet cell holding the
sample and its sign marks the half of that cell.  The randomizer emits an
m-sparse vector y in {-1,0,1}**d whose law favours agreement with the input:

    P(y | v) = e**eps / Omega   if <y, v> = 1,
    P(y | v) = 1 / Omega        otherwise,

with one normalizer Omega shared by every input, so the pmf ratio between
any two inputs never exceeds e**eps.

The per-coordinate marginals that drive calibration and variance are

    p = P(Y(k) = 1 | v(k) = 1),
    q = P(Y(k) = 1 | v(k) = 0),
    P(Y(k) = 1 | v(k) = -1) = p * e**(-eps),

computed here in ratio form rather than through raw binomial coefficients so
they stay finite for d up to 2**20 and beyond.

The fast sampler draws the input's own coordinate from its three-point
marginal (keep the sign with probability p, flip it with probability
p*e**(-eps), drop it otherwise), then scatters the remaining nonzero slots
uniformly over the other coordinates with independent uniform signs.  That
decomposition reproduces the two-valued pmf above exactly.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .haar import level_cells

__all__ = [
    "EncodedReport",
    "PerturbedReport",
    "MechanismParams",
    "LevelVariance",
    "derive_params",
    "optimal_m",
    "encode",
    "encode_batch",
    "perturb_fast",
    "perturb_fast_batch",
    "perturb_sum",
    "sample_fast",
    "perturb_reference",
    "sample_reference",
    "enumerate_outputs",
    "output_pmf",
    "ldp_ratio_audit",
    "aggregate_level",
    "aggregate_sums",
    "level_variance",
]

_WIRE_RE = re.compile(r"^(\d+):((?:\d+[+-],)*\d+[+-])$")


def _check_epsilon(epsilon: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")


@dataclass(frozen=True)
class EncodedReport:
    """One user's encoded sample at a level: the nonzero coordinate of v."""

    level: int
    position: int
    sign: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= self.position < 2**self.level:
            raise ValueError(f"position {self.position} out of range at level {self.level}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be -1 or +1, got {self.sign}")


@dataclass
class PerturbedReport:
    """A randomized report: the m nonzero coordinates of y, position-sorted."""

    level: int
    positions: np.ndarray
    signs: np.ndarray

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.int64)
        sgn = np.asarray(self.signs, dtype=np.int8)
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if pos.ndim != 1 or pos.shape != sgn.shape or pos.size == 0:
            raise ValueError("positions and signs must be matching non-empty vectors")
        order = np.argsort(pos)
        pos, sgn = pos[order], sgn[order]
        d = 2**self.level
        if pos[0] < 0 or pos[-1] >= d:
            raise ValueError(f"positions out of range for level {self.level}")
        if pos.size > 1 and (np.diff(pos) == 0).any():
            raise ValueError("positions must be distinct")
        if not np.isin(sgn, (-1, 1)).all():
            raise ValueError("signs must be -1 or +1")
        self.positions, self.signs = pos, sgn

    @property
    def sparsity(self) -> int:
        return int(self.positions.size)

    def to_dense(self) -> np.ndarray:
        y = np.zeros(2**self.level, dtype=np.int8)
        y[self.positions] = self.signs
        return y

    def to_wire(self) -> str:
        """Text form ``"j:pos+,pos-,..."`` with entries in position order."""
        body = ",".join(
            f"{p}{'+' if s > 0 else '-'}" for p, s in zip(self.positions, self.signs)
        )
        return f"{self.level}:{body}"

    @classmethod
    def from_wire(cls, text: str) -> "PerturbedReport":
        m = _WIRE_RE.match(text)
        if m is None:
            raise ValueError(f"malformed report: {text!r}")
        level = int(m.group(1))
        pos, sgn = [], []
        for item in m.group(2).split(","):
            pos.append(int(item[:-1]))
            sgn.append(1 if item[-1] == "+" else -1)
        return cls(level, np.array(pos), np.array(sgn))


@dataclass(frozen=True)
class MechanismParams:
    """Calibration of the randomizer for one (d, m, epsilon) triple."""

    d: int
    m: int
    epsilon: float
    p: float
    q: float
    log_omega: float

    def __post_init__(self) -> None:
        # p -> 1 as epsilon grows, and the float value reaches 1.0 exactly
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"q must lie in [0, 1), got {self.q}")
        if self.p * (1.0 + math.exp(-self.epsilon)) > 1.0 + 1e-12:
            raise ValueError("keep/flip mass exceeds 1")

    @property
    def level(self) -> int:
        return int(self.d).bit_length() - 1


def derive_params(d: int, m: int, epsilon: float) -> MechanismParams:
    """Calibrate p, q and log(Omega) for subset size m over d coordinates.

    Ratio forms; the leading binomial factors cancel:

        p = e**eps / (e**eps + 1 + 2(d-m)/m)
        q = p e**(-eps) [ (m-1)(e**eps+1) / (2(d-1)) + (d-m)/(d-1) ]

    For m = 1 the bracket collapses to 1 (q = p e**(-eps) = 1/Omega) and for
    d = 1 there is no off coordinate, so q = 0.
    """
    _check_epsilon(epsilon)
    if d < 1 or (d & (d - 1)):
        raise ValueError(f"d must be a power of two, got {d}")
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in [1, {d}], got {m}")
    ee = math.exp(epsilon)
    tail = 2.0 * (d - m) / m
    p = ee / (ee + 1.0 + tail)
    if d == 1:
        q = 0.0
    else:
        q = p * math.exp(-epsilon) * (
            (m - 1.0) * (ee + 1.0) / (2.0 * (d - 1.0)) + (d - m) / (d - 1.0)
        )
    log_omega = (
        math.lgamma(d)
        - math.lgamma(m)
        - math.lgamma(d - m + 1)
        + (m - 1.0) * math.log(2.0)
        + math.log(ee + 1.0 + tail)
    )
    return MechanismParams(d=d, m=m, epsilon=epsilon, p=p, q=q, log_omega=log_omega)


@lru_cache(maxsize=None)
def optimal_m(d: int, epsilon: float) -> int:
    """Subset size minimizing the per-level variance factor, ties to smaller m.

    Brute-force sweep of m = 1..d over the factor

        (1 + e**(-eps)) / (p (1 - e**(-eps))**2)
          + 2 q (d-1) / (p**2 (1 - e**(-eps))**2).
    """
    _check_epsilon(epsilon)
    if d < 1 or (d & (d - 1)):
        raise ValueError(f"d must be a power of two, got {d}")
    if d == 1:
        return 1
    ee = math.exp(epsilon)
    een = math.exp(-epsilon)
    m = np.arange(1, d + 1, dtype=np.float64)
    p = ee / (ee + 1.0 + 2.0 * (d - m) / m)
    q = p * een * ((m - 1.0) * (ee + 1.0) / (2.0 * (d - 1.0)) + (d - m) / (d - 1.0))
    denom = (1.0 - een) ** 2
    obj = (1.0 + een) / (p * denom) + 2.0 * q * (d - 1.0) / (p * p * denom)
    return int(np.argmin(obj)) + 1


def encode(x: float, level: int) -> EncodedReport:
    """Encode one sample at one level as the nonzero coordinate of v."""
    pos, sign = level_cells(np.array([x], dtype=np.float64), level)
    return EncodedReport(level, int(pos[0]), int(sign[0]))


def encode_batch(x, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions and signs of the encoded vectors for a whole sample array."""
    return level_cells(np.asarray(x, dtype=np.float64), level)


def _flip_threshold(params: MechanismParams) -> float:
    # For m = d the drop branch has probability exactly zero; pinning the
    # threshold at 1 keeps rounding from opening an impossible branch.
    if params.m == params.d:
        return 1.0
    return params.p * (1.0 + math.exp(-params.epsilon))


def _sample_level(
    positions: np.ndarray,
    signs: np.ndarray,
    params: MechanismParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized fast sampler, one row per user.

    Returns (special, picks, pick_signs, valid): the drawn value of each
    user's own coordinate, a matrix of candidate off-coordinate positions,
    their uniform signs, and the mask of slots actually in the output.
    Users whose own coordinate survived use one slot fewer.
    """
    d, m = params.d, params.m
    n = positions.size
    u = rng.random(n)
    keep = u < params.p
    flip = ~keep & (u < _flip_threshold(params))
    special = np.zeros(n, dtype=np.int8)
    special[keep] = signs[keep]
    special[flip] = -signs[flip]
    dropped = ~(keep | flip)

    if m == 1:
        picks = np.full((n, 1), -1, dtype=np.int64)
        if d > 1:
            ridx = rng.integers(0, d - 1, size=n)
            picks[:, 0] = ridx + (ridx >= positions)
        pick_signs = (rng.integers(0, 2, size=(n, 1), dtype=np.int8) << 1) - 1
        valid = dropped[:, None] & (picks >= 0)
    elif m == d:
        base = np.arange(d - 1, dtype=np.int64)
        picks = base[None, :] + (base[None, :] >= positions[:, None])
        pick_signs = (rng.integers(0, 2, size=(n, d - 1), dtype=np.int8) << 1) - 1
        valid = np.ones((n, d - 1), dtype=bool)
    else:
        keys = rng.random((n, d))
        keys[np.arange(n), positions] = 2.0
        picks = np.argpartition(keys, m - 1, axis=1)[:, :m]
        pick_signs = (rng.integers(0, 2, size=(n, m), dtype=np.int8) << 1) - 1
        valid = np.ones((n, m), dtype=bool)
        valid[~dropped, m - 1] = False
    return special, picks, pick_signs, valid


def perturb_sum(
    positions: np.ndarray,
    signs: np.ndarray,
    params: MechanismParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Coordinate sums of fast-sampler outputs over a batch of users.

    Distributionally identical to summing per-user ``perturb_fast`` reports.
    For m = d every off coordinate of every user is an independent uniform
    sign, so the off-coordinate column sums are shifted binomials and no
    per-user matrix is needed; other subset sizes materialize reports.
    """
    positions = np.asarray(positions, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.int8)
    if positions.size == 0:
        return np.zeros(params.d)
    if params.m == params.d:
        u = rng.random(positions.size)
        special = np.where(u < params.p, signs, -signs).astype(np.float64)
        out = np.bincount(positions, weights=special, minlength=params.d)
        others = positions.size - np.bincount(positions, minlength=params.d)
        out += 2.0 * rng.binomial(others, 0.5) - others
        return out
    special, picks, pick_signs, valid = _sample_level(positions, signs, params, rng)
    nz = special != 0
    # bincount returns int64 for empty index arrays, so accumulate into floats
    out = np.zeros(params.d)
    out += np.bincount(
        positions[nz], weights=special[nz].astype(np.float64), minlength=params.d
    )
    flat = picks[valid]
    if flat.size:
        out += np.bincount(
            flat, weights=pick_signs[valid].astype(np.float64), minlength=params.d
        )
    return out


def perturb_fast_batch(
    positions: np.ndarray,
    signs: np.ndarray,
    params: MechanismParams,
    rng: np.random.Generator,
) -> list[PerturbedReport]:
    """Fast-sampler outputs for a batch of users, as report objects."""
    pos_mat, sign_mat = _sample_support(
        np.asarray(positions, dtype=np.int64),
        np.asarray(signs, dtype=np.int8),
        params,
        rng,
    )
    level = params.level
    return [
        PerturbedReport(level, pos_mat[i], sign_mat[i]) for i in range(pos_mat.shape[0])
    ]


def _sample_support(
    positions: np.ndarray,
    signs: np.ndarray,
    params: MechanismParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the fast sampler and pack each user's m support entries, sorted."""
    special, picks, pick_signs, valid = _sample_level(positions, signs, params, rng)
    n, m = positions.size, params.m
    nz = special != 0
    sup_pos = np.empty((n, m), dtype=np.int64)
    sup_sgn = np.empty((n, m), dtype=np.int8)
    if m > 1:
        sup_pos[:, : m - 1] = picks[:, : m - 1]
        sup_sgn[:, : m - 1] = pick_signs[:, : m - 1]
    if picks.shape[1] == m:
        sup_pos[:, m - 1] = np.where(nz, positions, picks[:, m - 1])
        sup_sgn[:, m - 1] = np.where(nz, special, pick_signs[:, m - 1])
    else:
        # m == d: the drop branch has probability zero, so the user's own
        # coordinate always fills the last slot.
        sup_pos[:, m - 1] = positions
        sup_sgn[:, m - 1] = special
    order = np.argsort(sup_pos, axis=1)
    return np.take_along_axis(sup_pos, order, axis=1), np.take_along_axis(
        sup_sgn, order, axis=1
    )


def perturb_fast(
    report: EncodedReport, params: MechanismParams, rng: np.random.Generator
) -> PerturbedReport:
    """Randomize one encoded report with the fast sampler."""
    _check_level(report, params)
    out = perturb_fast_batch(
        np.array([report.position]), np.array([report.sign], dtype=np.int8), params, rng
    )
    return out[0]


def sample_fast(
    report: EncodedReport, params: MechanismParams, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Many independent fast-sampler draws for one input, as packed arrays."""
    _check_level(report, params)
    positions = np.full(size, report.position, dtype=np.int64)
    signs = np.full(size, report.sign, dtype=np.int8)
    return _sample_support(positions, signs, params, rng)


def sample_reference(
    report: EncodedReport, params: MechanismParams, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Rejection sampler against the two-valued pmf, as packed arrays.

    Proposes uniformly over the m-sparse signed vectors and accepts with
    probability 1 when <y, v> = 1 and e**(-eps) otherwise, which yields the
    target law exactly.  Kept deliberately independent of the fast sampler
    so the two can be checked against each other.
    """
    _check_level(report, params)
    d, m = params.d, params.m
    een = math.exp(-params.epsilon)
    out_pos = np.empty((size, m), dtype=np.int64)
    out_sgn = np.empty((size, m), dtype=np.int8)
    pending = np.arange(size)
    while pending.size:
        k = pending.size
        keys = rng.random((k, d))
        props = np.argpartition(keys, m - 1, axis=1)[:, :m]
        sgns = (rng.integers(0, 2, size=(k, m), dtype=np.int8) << 1) - 1
        dot = ((props == report.position) * sgns).sum(axis=1) * report.sign
        accept = (dot == 1) | (rng.random(k) < een)
        rows = pending[accept]
        out_pos[rows] = props[accept]
        out_sgn[rows] = sgns[accept]
        pending = pending[~accept]
    order = np.argsort(out_pos, axis=1)
    return np.take_along_axis(out_pos, order, axis=1), np.take_along_axis(
        out_sgn, order, axis=1
    )


def perturb_reference(
    report: EncodedReport, params: MechanismParams, rng: np.random.Generator
) -> PerturbedReport:
    """Randomize one encoded report with the rejection sampler."""
    pos, sgn = sample_reference(report, params, 1, rng)
    return PerturbedReport(report.level, pos[0], sgn[0])


def _check_level(report: EncodedReport, params: MechanismParams) -> None:
    if 2**report.level != params.d:
        raise ValueError(
            f"report level {report.level} does not match d = {params.d}"
        )


def enumerate_outputs(d: int, m: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All m-sparse signed vectors as (positions, signs) tuples.

    Guarded to d <= 8 and m <= 3 to keep the enumeration small.
    """
    if d > 8 or m > 3:
        raise ValueError("enumeration is guarded to d <= 8 and m <= 3")
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in [1, {d}], got {m}")
    outs = []
    for pos in itertools.combinations(range(d), m):
        for sgn in itertools.product((1, -1), repeat=m):
            outs.append((pos, sgn))
    return outs


def _inner(
    output: tuple[tuple[int, ...], tuple[int, ...]], report: EncodedReport
) -> int:
    pos, sgn = output
    for pp, ss in zip(pos, sgn):
        if pp == report.position:
            return ss * report.sign
    return 0


def output_pmf(
    params: MechanismParams, report: EncodedReport
) -> tuple[list[tuple[tuple[int, ...], tuple[int, ...]]], np.ndarray]:
    """Exhaustive pmf of the randomizer for one input, by direct enumeration."""
    _check_level(report, params)
    outs = enumerate_outputs(params.d, params.m)
    ee = math.exp(params.epsilon)
    weights = np.array([ee if _inner(y, report) == 1 else 1.0 for y in outs])
    return outs, weights / weights.sum()


def ldp_ratio_audit(params: MechanismParams) -> float:
    """Largest pmf ratio over all input pairs and outputs, by enumeration.

    A correctly calibrated randomizer returns exactly e**epsilon.
    """
    level = params.level
    inputs = [
        EncodedReport(level, k, s) for k in range(params.d) for s in (1, -1)
    ]
    pmfs = np.stack([output_pmf(params, v)[1] for v in inputs])
    ratios = pmfs[:, None, :] / pmfs[None, :, :]
    return float(ratios.max())


def aggregate_sums(
    sums: np.ndarray, params: MechanismParams, n_j: int
) -> np.ndarray:
    """Unbiased coefficient estimates from coordinate sums of n_j reports."""
    if n_j < 1:
        raise ValueError("need a positive report count")
    scale = math.sqrt(params.d) / (
        n_j * params.p * (1.0 - math.exp(-params.epsilon))
    )
    return np.asarray(sums, dtype=np.float64) * scale


def aggregate_level(
    reports: Sequence[PerturbedReport], params: MechanismParams, n_j: int
) -> np.ndarray:
    """Coefficient estimates for one level from its randomized reports."""
    if len(reports) == 0:
        raise ValueError("need at least one report")
    if n_j != len(reports):
        raise ValueError(f"n_j = {n_j} does not match {len(reports)} reports")
    sums = np.zeros(params.d)
    for r in reports:
        if 2**r.level != params.d:
            raise ValueError("reports must all sit at the params level")
        np.add.at(sums, r.positions, r.signs)
    return aggregate_sums(sums, params, n_j)


class LevelVariance(NamedTuple):
    exact: float
    bound: float


def level_variance(params: MechanismParams, n_j: int) -> LevelVariance:
    """Total variance of one level's coefficient estimates over n_j users.

    ``exact`` is the conditional variance given which users landed on the
    level.  ``bound`` drops the -1 term, which also absorbs the randomness
    of the user split; allocation and the error bound use that form.

    A coordinate carrying the input contributes variance
    p(1+e**(-eps)) - p**2 (1-e**(-eps))**2; each of the d-1 off coordinates
    is +-1 with probability q each, contributing 2q.
    """
    if n_j < 1:
        raise ValueError("need a positive user count")
    een = math.exp(-params.epsilon)
    denom = params.p * (1.0 - een) ** 2
    base = (1.0 + een) / denom
    cross = 2.0 * params.q * (params.d - 1.0) / (params.p * denom)
    scale = params.d / n_j
    return LevelVariance(
        exact=scale * (base - 1.0 + cross), bound=scale * (base + cross)
    )
