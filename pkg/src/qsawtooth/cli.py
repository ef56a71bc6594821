"""Command-line front end.

Exit status: 0 on success, 1 when the configuration is rejected, 2 when a
run or fit fails (outputs for the points that did succeed are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from . import harness
from .harness import ExperimentConfig, ValidationError

COMMANDS = {
    "single": ("single_run", harness.run_single),
    "gamma-vs-k": ("gamma_vs_K", harness.run_gamma_vs_K),
    "residual-vs-g": ("residual_vs_g", harness.run_residual_vs_g),
    "noise-single": ("noise_single", harness.run_noise_single),
    "noise-scaling": ("noise_scaling", harness.run_noise_scaling),
    "classical-d0": ("gamma_vs_K", harness.run_classical_d0),
}

# single-valued defaults per command: (n_q, K, L, epsilon)
DEFAULTS = {
    "single": ([12], [0.5], [4], [0.0]),
    "gamma-vs-k": ([12], [0.3, 0.5, 1.0, 2.0], [4], [0.0]),
    "residual-vs-g": ([8, 10, 12, 14], [0.5], [4], [0.0]),
    "noise-single": ([12], [0.5], [4], [0.003]),
    "noise-scaling": ([8, 10, 12], [0.5], [4], [0.004, 0.007, 0.01]),
    "classical-d0": ([2], [0.1, 0.5, 1.0, 2.0], [4], [0.0]),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsawtooth", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMANDS[name][1].__doc__.splitlines()[0])
        sp.add_argument("--nq", type=int, nargs="+", help="qubit counts")
        sp.add_argument("--K", type=float, nargs="+", help="chaos parameter values")
        sp.add_argument("--L", type=int, nargs="+", help="cell counts (multiples of 4)")
        sp.add_argument("--eps", type=float, nargs="+", help="gate noise amplitudes")
        sp.add_argument("--t-max", type=int, default=10_000)
        sp.add_argument("--realizations", type=int, default=20)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="results")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--plateau-start", type=int, default=None,
                        help="override ceil(7 / gamma_c)")
        sp.add_argument("--window", type=int, default=100, help="moving-average window")
        sp.add_argument("--ratio-floor", type=float, default=None,
                        help="end the noise fit where the smoothed ratio first drops to this level")
        sp.add_argument("--trajectories", type=int, default=100_000,
                        help="classical ensemble size for D0")
        sp.add_argument("--classical-t-max", type=int, default=1000)
        sp.add_argument("--noisy-swaps", action="store_true",
                        help="apply swaps as physical noisy gates instead of relabeling")
        sp.add_argument("--op-budget", type=float, default=1e13)
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kind = COMMANDS[args.command][0]
    nq, K, L, eps = DEFAULTS[args.command]
    return ExperimentConfig(
        kind=kind, n_q=args.nq or nq, K=args.K or K, L=args.L or L,
        epsilon=args.eps if args.eps is not None else eps,
        t_max=args.t_max, realizations=args.realizations, seed=args.seed, out=args.out,
        format=args.format, workers=args.workers, plateau_start=args.plateau_start,
        moving_window=args.window, ratio_floor=args.ratio_floor,
        classical_M=args.trajectories, classical_t_max=args.classical_t_max,
        noisy_swaps=args.noisy_swaps, op_budget=args.op_budget,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        result = COMMANDS[args.command][1](cfg)
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"run failed: {exc!r}", file=sys.stderr)
        return 2
    for row in result.rows:
        print("  ".join(f"{k}={harness._fmt(v)}" for k, v in row.items()))
    print(f"wrote {len(result.manifest.files)} files to {cfg.out}")
    return 0 if result.ok else 2


if __name__ == "__main__":
    sys.exit(main())
