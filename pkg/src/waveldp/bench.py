"""Seeded benchmark harness: wavelet estimator vs. binning baselines.

A run is described by an ``ExperimentSpec``: one dataset, a list of methods
("wavelet" or "binning-<d>"), a list of privacy budgets, metrics, and a
repetition count.  Every trial derives its own RNG seed by hashing
(master seed, method, epsilon, trial index), so adding a method or metric
never changes another method's draws, and identical specs give byte-identical
CSV output.  The empirical cdf used as ground truth is computed once per
dataset from the raw values and never randomized.

Wall-time measurement is off by default so the determinism contract covers
the whole output file; pass ``timing = on`` to fill the ms column.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass

import numpy as np

from .baselines import binned_cdf, binning_estimate
from .datagen import Dataset, gen_beta, gen_squarewave, ingest
from .estimator import EstimatorConfig, compute_bound, estimate
from .haar import StepCdf, cdf_of
from .metrics import empirical_cdf, ks, range_query_mae, wasserstein

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "derive_seed",
    "run",
    "jsweep",
    "emit",
    "parse_config",
    "build_spec",
]


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: str
    n: int = 100_000
    methods: tuple[str, ...] = ("wavelet",)
    epsilons: tuple[float, ...] = (1.0,)
    reps: int = 100
    metrics: tuple[str, ...] = ("wasserstein", "ks")
    seed: int = 0
    grid: int = 256
    J: int | None = None
    j_range: tuple[int, int] | None = None
    rq_trials: int = 1000
    timing: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.methods:
            raise ValueError("need at least one method")
        if not self.epsilons or any(
            not (math.isfinite(e) and e > 0) for e in self.epsilons
        ):
            raise ValueError("epsilons must be a non-empty list of positive reals")
        if not self.metrics:
            raise ValueError("need at least one metric")
        if self.grid < 1:
            raise ValueError("grid must be positive")
        if self.rq_trials < 1:
            raise ValueError("rq_trials must be positive")
        for m in self.methods:
            _parse_method(m)
        for m in self.metrics:
            _parse_metric(m)
        _parse_dataset_name(self.dataset)
        if self.j_range is not None:
            lo, hi = self.j_range
            if not 0 <= lo <= hi <= 20:
                raise ValueError(f"J range must satisfy 0 <= lo <= hi <= 20, got {self.j_range}")


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    method: str
    epsilon: float
    metric: str
    mean: float
    sd: float
    reps: int
    seed: int
    ms: float


def derive_seed(master: int, method: str, epsilon: float, trial: int, tag: str = "") -> int:
    """Stable per-trial seed from the master seed and trial coordinates."""
    text = f"{master}|{method}|{format(epsilon, '.12g')}|{trial}|{tag}"
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _parse_method(method: str) -> tuple[str, int | None]:
    if method == "wavelet":
        return "wavelet", None
    if method.startswith("binning-"):
        try:
            d = int(method.removeprefix("binning-"))
        except ValueError:
            raise ValueError(f"unknown method: {method}") from None
        if d < 2:
            raise ValueError(f"binning needs at least 2 bins, got {method}")
        return "binning", d
    raise ValueError(f"unknown method: {method}")


def _parse_metric(metric: str) -> tuple[str, float | None]:
    if metric in ("wasserstein", "ks"):
        return metric, None
    if metric.startswith("rq-mae(") and metric.endswith(")"):
        try:
            alpha = float(metric[len("rq-mae(") : -1])
        except ValueError:
            raise ValueError(f"unknown metric: {metric}") from None
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"rq-mae width must lie in (0, 1), got {alpha}")
        return "rq-mae", alpha
    raise ValueError(f"unknown metric: {metric}")


def _parse_dataset_name(name: str) -> tuple[str, tuple]:
    if name == "uniform":
        return "beta", (1, 1)
    if name.startswith("beta:"):
        parts = name.removeprefix("beta:").split(",")
        if len(parts) != 2:
            raise ValueError(f"beta dataset needs two shape parameters: {name}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"beta shape parameters must be integers: {name}") from None
        return "beta", (a, b)
    if name.startswith("squarewave:"):
        text = name.removeprefix("squarewave:")
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                h = float(num) / float(den)
            else:
                h = float(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad strip width: {name}") from None
        return "squarewave", (h,)
    if name.startswith("file:"):
        return "file", (name.removeprefix("file:"),)
    raise ValueError(f"unknown dataset: {name}")


def load_dataset(spec: ExperimentSpec) -> Dataset:
    """Materialize the spec's dataset, seeded independently of all trials."""
    kind, args = _parse_dataset_name(spec.dataset)
    rng = np.random.default_rng(derive_seed(spec.seed, "dataset", 0.0, 0))
    if kind == "beta":
        return gen_beta(spec.n, args[0], args[1], rng)
    if kind == "squarewave":
        return gen_squarewave(spec.n, args[0], rng)
    return ingest(args[0])


def _trial_cdf(
    method: str, values: np.ndarray, epsilon: float, spec: ExperimentSpec, seed: int
) -> StepCdf:
    kind, d = _parse_method(method)
    if kind == "wavelet":
        cfg = EstimatorConfig(epsilon=epsilon, J=spec.J, seed=seed)
        return cdf_of(estimate(values, cfg), spec.grid)
    rng = np.random.default_rng(seed)
    return binned_cdf(binning_estimate(values, d, epsilon, rng), spec.grid)


def _summaries(per_metric: dict[str, list[float]], reps: int) -> dict[str, tuple[float, float]]:
    out = {}
    for name, vals in per_metric.items():
        arr = np.array(vals)
        out[name] = (float(arr.mean()), float(arr.std(ddof=1)) if reps > 1 else 0.0)
    return out


def run(spec: ExperimentSpec) -> list[ResultRow]:
    """Execute every (method, epsilon) cell of the spec for reps trials."""
    dataset = load_dataset(spec)
    values = dataset.values
    emp = empirical_cdf(values, spec.grid)
    rows: list[ResultRow] = []
    for method in spec.methods:
        for eps in spec.epsilons:
            per_metric: dict[str, list[float]] = {m: [] for m in spec.metrics}
            ms_total = 0.0
            for trial in range(spec.reps):
                seed = derive_seed(spec.seed, method, eps, trial)
                start = time.perf_counter() if spec.timing else 0.0
                est = _trial_cdf(method, values, eps, spec, seed)
                if spec.timing:
                    ms_total += (time.perf_counter() - start) * 1000.0
                for metric in spec.metrics:
                    name, alpha = _parse_metric(metric)
                    if name == "wasserstein":
                        value = wasserstein(est, emp)
                    elif name == "ks":
                        value = ks(est, emp)
                    else:
                        rq_rng = np.random.default_rng(
                            derive_seed(spec.seed, method, eps, trial, tag="rq")
                        )
                        value = range_query_mae(
                            est, values, alpha, spec.rq_trials, rq_rng
                        )
                    per_metric[metric].append(value)
            stats = _summaries(per_metric, spec.reps)
            for metric in spec.metrics:
                mean, sd = stats[metric]
                rows.append(
                    ResultRow(
                        spec.dataset, method, eps, metric,
                        mean, sd, spec.reps, spec.seed, ms_total,
                    )
                )
    return rows


def jsweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Sweep the top level J: empirical mean error next to the computed bound.

    Emits two rows per (J, epsilon): metric ``wasserstein`` with the observed
    mean and sd, and metric ``bound`` with the computable error bound.
    """
    if spec.j_range is None:
        raise ValueError("jsweep needs a J range, e.g. J = 1..10")
    dataset = load_dataset(spec)
    values = dataset.values
    emp = empirical_cdf(values, spec.grid)
    rows: list[ResultRow] = []
    lo, hi = spec.j_range
    for J in range(lo, hi + 1):
        method = f"wavelet-J{J}"
        for eps in spec.epsilons:
            dists = []
            for trial in range(spec.reps):
                seed = derive_seed(spec.seed, method, eps, trial)
                cfg = EstimatorConfig(epsilon=eps, J=J, seed=seed)
                est = cdf_of(estimate(values, cfg), spec.grid)
                dists.append(wasserstein(est, emp))
            arr = np.array(dists)
            sd = float(arr.std(ddof=1)) if spec.reps > 1 else 0.0
            rows.append(
                ResultRow(
                    spec.dataset, method, eps, "wasserstein",
                    float(arr.mean()), sd, spec.reps, spec.seed, 0.0,
                )
            )
            rows.append(
                ResultRow(
                    spec.dataset, method, eps, "bound",
                    compute_bound(values.size, J, eps), 0.0,
                    spec.reps, spec.seed, 0.0,
                )
            )
    return rows


def emit(rows: list[ResultRow], path: str) -> None:
    """Write rows as CSV, deterministically ordered and formatted."""
    ordered = sorted(rows, key=lambda r: (r.dataset, r.method, r.epsilon, r.metric))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["dataset", "method", "epsilon", "metric", "mean", "sd", "reps", "seed", "ms"]
            )
            for r in ordered:
                writer.writerow(
                    [
                        r.dataset,
                        r.method,
                        format(r.epsilon, ".12g"),
                        r.metric,
                        format(r.mean, ".12g"),
                        format(r.sd, ".12g"),
                        str(r.reps),
                        str(r.seed),
                        format(r.ms, ".12g"),
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


_CONFIG_KEYS = {
    "dataset", "n", "methods", "epsilons", "reps", "metrics",
    "seed", "grid", "J", "rq_trials", "timing", "out",
}

_TRUTHY = {"1", "true", "on", "yes"}
_FALSY = {"0", "false", "off", "no"}


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; blank lines and # comment lines skipped."""
    conf: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected key = value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in conf:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        conf[key] = value
    return conf


def build_spec(conf: dict[str, str]) -> ExperimentSpec:
    """Turn a parsed config mapping into a validated ExperimentSpec."""
    if "dataset" not in conf:
        raise ValueError("config needs a dataset")
    kwargs: dict = {"dataset": conf["dataset"]}
    if "n" in conf:
        kwargs["n"] = _parse_int(conf["n"], "n")
    if "methods" in conf:
        kwargs["methods"] = tuple(s.strip() for s in conf["methods"].split(",") if s.strip())
    if "epsilons" in conf:
        kwargs["epsilons"] = tuple(
            _parse_float(s.strip(), "epsilons") for s in conf["epsilons"].split(",") if s.strip()
        )
    if "reps" in conf:
        kwargs["reps"] = _parse_int(conf["reps"], "reps")
    if "metrics" in conf:
        kwargs["metrics"] = tuple(s.strip() for s in conf["metrics"].split(",") if s.strip())
    if "seed" in conf:
        kwargs["seed"] = _parse_int(conf["seed"], "seed")
    if "grid" in conf:
        kwargs["grid"] = _parse_int(conf["grid"], "grid")
    if "J" in conf:
        text = conf["J"]
        if text == "auto":
            pass
        elif ".." in text:
            lo, _, hi = text.partition("..")
            kwargs["j_range"] = (_parse_int(lo, "J"), _parse_int(hi, "J"))
        else:
            kwargs["J"] = _parse_int(text, "J")
    if "rq_trials" in conf:
        kwargs["rq_trials"] = _parse_int(conf["rq_trials"], "rq_trials")
    if "timing" in conf:
        text = conf["timing"].lower()
        if text not in _TRUTHY | _FALSY:
            raise ValueError(f"timing must be a boolean, got {conf['timing']!r}")
        kwargs["timing"] = text in _TRUTHY
    return ExperimentSpec(**kwargs)


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{key} must be an integer, got {text!r}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{key} must be a number, got {text!r}") from None
