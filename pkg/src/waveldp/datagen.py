"""Synthetic sample generators and plain-text dataset ingestion.

Everything downstream works on values in [0, 1], so generators emit that
range directly and ``ingest`` affinely maps external data into it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "gen_beta",
    "gen_squarewave",
    "ingest",
    "write_values",
]


@dataclass(frozen=True)
class Dataset:
    """Sample values in [0, 1] plus a short provenance label."""

    values: np.ndarray
    label: str

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a non-empty 1-d array")
        if not (np.isfinite(v).all() and v.min() >= 0.0 and v.max() <= 1.0):
            raise ValueError("values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)


def gen_beta(n: int, a: int, b: int, rng: np.random.Generator) -> Dataset:
    """Beta(a, b) samples for integer a, b >= 1 via order statistics.

    The a-th smallest of a+b-1 independent uniforms is Beta(a, b) exactly,
    so a partition per row suffices and no special functions are involved.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if not (isinstance(a, int) and isinstance(b, int) and a >= 1 and b >= 1):
        raise ValueError("shape parameters must be integers >= 1")
    u = rng.random((n, a + b - 1))
    if a + b == 2:
        values = u[:, 0]
    else:
        values = np.partition(u, a - 1, axis=1)[:, a - 1]
    return Dataset(values, f"beta({a},{b})")


_SQUAREWAVE_WIDTHS = (0.5, 0.25, 0.125, 0.0625)


def gen_squarewave(n: int, h: float, rng: np.random.Generator) -> Dataset:
    """Samples from a square-wave density of strip width h.

    The density is 0.5 on strips with even floor(x / h) and 1.5 on odd ones;
    with an even strip count the total mass is exactly one.  Sampling picks a
    strip by inverse cdf, then a uniform point inside it.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if h not in _SQUAREWAVE_WIDTHS:
        raise ValueError(f"strip width must be one of {_SQUAREWAVE_WIDTHS}, got {h}")
    strips = round(1.0 / h)
    weights = np.where(np.arange(strips) % 2 == 0, 0.5 * h, 1.5 * h)
    edges = np.cumsum(weights)
    idx = np.searchsorted(edges, rng.random(n), side="right")
    values = (idx + rng.random(n)) * h
    return Dataset(values, f"squarewave(h=1/{strips})")


def ingest(
    path: str,
    min_override: float | None = None,
    max_override: float | None = None,
    cap: float | None = None,
) -> Dataset:
    """Load one number per line and map the values affinely into [0, 1].

    Values >= ``cap`` are dropped before anything else.  The map uses the
    observed min/max unless overridden; overridden endpoints inside the data
    range clip the mapped values to [0, 1].  Blank lines are skipped; any
    other unparsable line raises with its line number.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    raw = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {text!r}") from None
        if not math.isfinite(value):
            raise ValueError(f"{path}:{lineno}: not finite: {text!r}")
        raw.append(value)
    values = np.array(raw, dtype=np.float64)
    if cap is not None:
        values = values[values < cap]
    if values.size == 0:
        raise ValueError(f"{path}: no usable values")
    lo = float(values.min()) if min_override is None else float(min_override)
    hi = float(values.max()) if max_override is None else float(max_override)
    if not lo < hi:
        raise ValueError(f"{path}: need min < max, got [{lo}, {hi}]")
    mapped = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return Dataset(mapped, f"file:{path}[{lo:g},{hi:g}]")


def write_values(path: str, values) -> None:
    """Write samples one per line, full float64 round-trip precision."""
    v = np.asarray(values, dtype=np.float64)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for x in v:
                fh.write(format(float(x), ".17g"))
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
