"""Command-line front end.

Subcommands:
  estimate   private pdf estimate of a one-number-per-line file
  bench      run a config-driven benchmark and write a CSV
  jsweep     sweep the top level J against the computed error bound
  gen-data   write synthetic samples to a file
  bound      print the computable error bound for (n, J, epsilon)

Exit codes: 0 success, 1 bad arguments or config, 2 file I/O failure,
3 unexpected internal error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench, datagen
from .estimator import EstimatorConfig, compute_bound, estimate, select_J

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that through the
    # validation exit code instead.
    def error(self, message: str) -> None:
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="waveldp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a pdf from a sample file")
    p.add_argument("file", help="one number per line; values are mapped into [0, 1]")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--J", type=int, default=None, help="top level (default: from n)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-postprocess", action="store_true")
    p.add_argument("--min", type=float, default=None, dest="min_override")
    p.add_argument("--max", type=float, default=None, dest="max_override")

    p = sub.add_parser("bench", help="run a benchmark config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="CSV path (default: from config or results.csv)")

    p = sub.add_parser("jsweep", help="sweep J and compare with the bound")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("gen-data", help="write synthetic samples")
    p.add_argument("kind", choices=["beta", "squarewave"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=int, default=5)
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--h", type=float, default=0.0625)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bound", help="print the error bound for n, J, epsilon")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--J", type=int, default=None)
    return parser


def _cmd_estimate(args: argparse.Namespace) -> None:
    dataset = datagen.ingest(args.file, args.min_override, args.max_override)
    cfg = EstimatorConfig(
        epsilon=args.epsilon,
        J=args.J,
        seed=args.seed,
        postprocess=not args.no_postprocess,
    )
    pdf = estimate(dataset.values, cfg)
    for height in pdf.heights:
        print(format(height, ".12g"))


def _load_config(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    return bench.parse_config(text)


def _cmd_bench(args: argparse.Namespace) -> None:
    conf = _load_config(args.config)
    spec = bench.build_spec(conf)
    out = args.out or conf.get("out") or "results.csv"
    rows = bench.run(spec)
    bench.emit(rows, out)
    print(f"{len(rows)} rows -> {out}")


def _cmd_jsweep(args: argparse.Namespace) -> None:
    conf = _load_config(args.config)
    spec = bench.build_spec(conf)
    out = args.out or conf.get("out") or "jsweep.csv"
    rows = bench.jsweep(spec)
    bench.emit(rows, out)
    print(f"{len(rows)} rows -> {out}")


def _cmd_gen_data(args: argparse.Namespace) -> None:
    rng = np.random.default_rng(args.seed)
    if args.kind == "beta":
        dataset = datagen.gen_beta(args.n, args.a, args.b, rng)
    else:
        dataset = datagen.gen_squarewave(args.n, args.h, rng)
    datagen.write_values(args.out, dataset.values)
    print(f"{dataset.n} samples ({dataset.label}) -> {args.out}")


def _cmd_bound(args: argparse.Namespace) -> None:
    J = args.J if args.J is not None else select_J(args.n)
    print(format(compute_bound(args.n, J, args.epsilon), ".12g"))


_COMMANDS = {
    "estimate": _cmd_estimate,
    "bench": _cmd_bench,
    "jsweep": _cmd_jsweep,
    "gen-data": _cmd_gen_data,
    "bound": _cmd_bound,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except (_UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
