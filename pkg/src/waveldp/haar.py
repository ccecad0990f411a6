"""Haar wavelet machinery on the unit interval.

Basis evaluation, empirical expansion coefficients, reconstruction of an
expansion as a piecewise-constant density on the dyadic grid, and exact cdf
evaluation of that density.

Every wavelet interval is half-open on the right, and x = 1 is folded into
the rightmost interval, so all operations are total on [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HaarIndex",
    "CoefficientTree",
    "PiecewisePdf",
    "StepCdf",
    "amplitude",
    "eval_psi",
    "level_cells",
    "exact_coefficients",
    "reconstruct_pdf",
    "cdf_of",
]


def amplitude(level: int) -> float:
    """Peak magnitude 2**(level/2) of a wavelet at this level."""
    return 2.0 ** (0.5 * level)


@dataclass(frozen=True)
class HaarIndex:
    """Level/shift pair (j, k) naming one wavelet; requires 0 <= k < 2**j."""

    j: int
    k: int

    def __post_init__(self) -> None:
        if self.j < 0:
            raise ValueError(f"level must be >= 0, got {self.j}")
        if not 0 <= self.k < 2**self.j:
            raise ValueError(f"shift {self.k} out of range for level {self.j}")


@dataclass
class CoefficientTree:
    """Expansion coefficients for levels 0..max_level.

    ``levels[j]`` holds the 2**j coefficients of level j, indexed by shift,
    so the tree stores 2**(max_level+1) - 1 numbers in total.
    """

    max_level: int
    levels: list[np.ndarray]

    def __post_init__(self) -> None:
        if self.max_level < 0:
            raise ValueError("max_level must be >= 0")
        if len(self.levels) != self.max_level + 1:
            raise ValueError("need one coefficient array per level")
        self.levels = [np.asarray(a, dtype=np.float64) for a in self.levels]
        for j, arr in enumerate(self.levels):
            if arr.shape != (2**j,):
                raise ValueError(f"level {j} must hold {2**j} coefficients")

    @property
    def size(self) -> int:
        return 2 ** (self.max_level + 1) - 1

    def coefficient(self, j: int, k: int) -> float:
        idx = HaarIndex(j, k)
        if idx.j > self.max_level:
            raise ValueError(f"tree stops at level {self.max_level}")
        return float(self.levels[idx.j][idx.k])


@dataclass
class PiecewisePdf:
    """Piecewise-constant density given by bin heights on the dyadic grid."""

    heights: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.heights, dtype=np.float64)
        if h.ndim != 1 or h.size < 2 or (h.size & (h.size - 1)):
            raise ValueError("heights must be a 1-d vector of length 2**(J+1)")
        self.heights = h

    @property
    def max_level(self) -> int:
        return int(self.heights.size).bit_length() - 2

    def integral(self) -> float:
        """Total mass; equals the mean height because all bins have width 1/len."""
        return float(self.heights.mean())


@dataclass
class StepCdf:
    """Cdf values sampled at the grid points i/G for i = 0..G."""

    knots: np.ndarray
    monotone: bool = field(init=False)

    def __post_init__(self) -> None:
        k = np.asarray(self.knots, dtype=np.float64)
        if k.ndim != 1 or k.size < 2:
            raise ValueError("knots must hold at least the two endpoints")
        self.knots = k
        self.monotone = bool(np.all(np.diff(k) >= 0.0))

    @property
    def grid(self) -> int:
        return self.knots.size - 1


def level_cells(x: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Map points of [0, 1] to (shift, sign) pairs at one level.

    The shift names the wavelet whose support holds the point; the sign is
    +1 on the left half of that support and -1 on the right half.  Scaling
    by a power of two is exact in binary floating point, so points sitting
    on dyadic boundaries land in a well-defined cell.
    """
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    x = np.asarray(x, dtype=np.float64)
    if x.size and (np.min(x) < 0.0 or np.max(x) > 1.0):
        raise ValueError("samples must lie in [0, 1]")
    half = (x * (2 ** (level + 1))).astype(np.int64)
    np.minimum(half, 2 ** (level + 1) - 1, out=half)
    return half >> 1, (1 - ((half & 1) << 1)).astype(np.int8)


def eval_psi(index: HaarIndex, x: float) -> float:
    """Value of one wavelet at a single point of [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    pos, sign = level_cells(np.array([x]), index.j)
    if pos[0] != index.k:
        return 0.0
    return float(sign[0]) * amplitude(index.j)


def exact_coefficients(samples, max_level: int) -> CoefficientTree:
    """Empirical expansion coefficients: per-wavelet averages over the sample.

    Per-level tallies are integer counts, so each coefficient is exact up to
    a single floating division however large the sample is.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("need at least one sample")
    levels = []
    for j in range(max_level + 1):
        pos, sign = level_cells(x, j)
        net = np.bincount(pos, weights=sign.astype(np.float64), minlength=2**j)
        levels.append(amplitude(j) * net / x.size)
    return CoefficientTree(max_level, levels)


def reconstruct_pdf(tree: CoefficientTree) -> PiecewisePdf:
    """Bin heights of the expansion on the grid of 2**(max_level+1) cells.

    Each refinement step splits every cell in two and moves coefficient mass
    between the halves, which keeps the mean height (the total mass) at 1.
    """
    heights = np.ones(1)
    for j, coeffs in enumerate(tree.levels):
        delta = coeffs * amplitude(j)
        nxt = np.empty(2 * heights.size)
        nxt[0::2] = heights + delta
        nxt[1::2] = heights - delta
        heights = nxt
    return PiecewisePdf(heights)


def cdf_of(pdf: PiecewisePdf, grid: int) -> StepCdf:
    """Exact integral of the piecewise-constant density at the points i/grid."""
    if grid < 1:
        raise ValueError(f"grid must be >= 1, got {grid}")
    h = pdf.heights
    bins = h.size
    cum = np.concatenate(([0.0], np.cumsum(h))) / bins
    pts = np.arange(grid + 1) / grid
    cell = np.minimum((pts * bins).astype(np.int64), bins - 1)
    knots = cum[cell] + h[cell] * (pts - cell / bins)
    return StepCdf(knots)
