"""Command line interface.

Exit codes: 0 success, 2 usage or input-format problems, 3 statistical
preconditions (ties under the error policy, sample too small, degenerate
columns, infeasible block lengths).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import blocksize
from .bootstrap import BootstrapConfig
from .errors import XimaxError
from .ingest import MatrixFormatError, load_matrix
from .ranks import TieBreakConfig
from .simlab import ModelSpec, results_to_csv, run_rejection_study
from .testing import TestConfig, max_test, stepdown


def _default_threads() -> int:
    raw = os.environ.get("XIMAX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_test_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("input", help="CSV/TSV file with a header row")
    sub.add_argument("--x-col", required=True,
                     help="conditioning column: header name, or 0-based index if numeric")
    sub.add_argument("--delimiter", choices=["comma", "tab"],
                     help="field delimiter (default: by file extension)")
    sub.add_argument("--alpha", type=float, default=0.05, help="test level")
    sub.add_argument("--bootstrap", type=int, default=999, metavar="B",
                     help="bootstrap replications")
    sub.add_argument("--q", default="auto", help="block length, or 'auto'")
    sub.add_argument("--studentize", choices=["none", "fixed", "empirical"],
                     default="fixed", help="draw scaling variant")
    sub.add_argument("--seed", type=int, default=0, help="multiplier stream seed")
    sub.add_argument("--ties", choices=["error", "jitter"], default="error",
                     help="duplicate-value policy")
    sub.add_argument("--jitter-scale", type=float, default=1e-9,
                     help="jitter half-width relative to the smallest gap")
    sub.add_argument("--storage", choices=["dense", "streaming", "auto"],
                     default="auto", help="bootstrap draw storage")
    sub.add_argument("--threads", type=int, default=_default_threads(),
                     help="worker threads (results do not depend on this)")
    sub.add_argument("--out-json", metavar="PATH",
                     help="write the JSON report here instead of stdout")
    sub.add_argument("--out-csv", metavar="PATH",
                     help="also write per-hypothesis rows here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ximax",
        description="Max rank-correlation independence screening",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    test_cmd = commands.add_parser("test", help="single-step max test")
    _add_test_flags(test_cmd)
    test_cmd.set_defaults(handler=_cmd_test)

    screen_cmd = commands.add_parser("screen", help="stepdown hypothesis screening")
    _add_test_flags(screen_cmd)
    screen_cmd.set_defaults(handler=_cmd_screen)

    block_cmd = commands.add_parser("blocksize", help="optimal block length for n")
    block_cmd.add_argument("--n", type=int, required=True, help="sample size")
    block_cmd.add_argument("--grid", action="store_true",
                           help="print the full q,mse grid")
    block_cmd.set_defaults(handler=_cmd_blocksize)

    sim_cmd = commands.add_parser("simulate", help="Monte Carlo rejection rates")
    sim_cmd.add_argument("--model", choices=["1", "2", "3"], required=True)
    sim_cmd.add_argument("--n", type=int, required=True)
    sim_cmd.add_argument("--p", type=int, required=True)
    sim_cmd.add_argument("--rho", type=float, default=0.0, help="signal strength")
    sim_cmd.add_argument("--tau", type=float, default=0.0, help="noise correlation")
    sim_cmd.add_argument("--q", default="auto",
                         help="comma-separated block lengths and/or 'auto'")
    sim_cmd.add_argument("--variant", choices=["bmb0", "bmb1", "bmb2"],
                         default="bmb1", help="draw scaling variant")
    sim_cmd.add_argument("--S", type=int, default=100, dest="s_reps",
                         help="Monte Carlo replicates per cell")
    sim_cmd.add_argument("--B", type=int, default=199, dest="b_reps",
                         help="bootstrap replications per test")
    sim_cmd.add_argument("--alpha", type=float, default=0.05)
    sim_cmd.add_argument("--seed", type=int, default=0)
    sim_cmd.add_argument("--threads", type=int, default=_default_threads())
    sim_cmd.add_argument("--out", metavar="PATH",
                         help="write the CSV here instead of stdout")
    sim_cmd.set_defaults(handler=_cmd_simulate)

    return parser


def _check_alpha(parser: argparse.ArgumentParser, alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        parser.error(f"--alpha must be in (0, 1), got {alpha}")


def _parse_q(parser: argparse.ArgumentParser, raw: str):
    if raw == "auto":
        return "auto"
    try:
        q = int(raw)
    except ValueError:
        parser.error(f"--q must be 'auto' or a positive integer, got {raw!r}")
    if q < 1:
        parser.error(f"--q must be >= 1, got {q}")
    return q


def _x_col(raw: str) -> int | str:
    try:
        return int(raw)
    except ValueError:
        return raw


def _test_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> TestConfig:
    _check_alpha(parser, args.alpha)
    if args.bootstrap < 1:
        parser.error(f"--bootstrap must be >= 1, got {args.bootstrap}")
    if args.threads < 1:
        parser.error(f"--threads must be >= 1, got {args.threads}")
    if not 0.0 < args.jitter_scale < 0.5:
        parser.error(f"--jitter-scale must be in (0, 0.5), got {args.jitter_scale}")
    return TestConfig(
        bootstrap=BootstrapConfig(
            b_reps=args.bootstrap,
            q_choice=_parse_q(parser, args.q),
            studentize=args.studentize,
            alpha=args.alpha,
            seed=args.seed,
            storage=args.storage,
        ),
        tie_break=TieBreakConfig(
            policy=args.ties,
            jitter_relative_scale=args.jitter_scale,
            seed=args.seed,
        ),
    )


def _config_echo(args: argparse.Namespace, cfg: TestConfig) -> dict:
    return {
        "alpha": cfg.bootstrap.alpha,
        "b_reps": cfg.bootstrap.b_reps,
        "q": cfg.bootstrap.q_choice,
        "studentize": cfg.bootstrap.studentize,
        "seed": cfg.bootstrap.seed,
        "ties": cfg.tie_break.policy,
        "jitter_scale": cfg.tie_break.jitter_relative_scale,
        "storage": cfg.bootstrap.storage,
    }


def _emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_test(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _test_config(parser, args)
    sample = load_matrix(args.input, _x_col(args.x_col), args.delimiter)
    res = max_test(sample, cfg, threads=args.threads)
    payload = {
        "command": "test",
        "input": {"path": args.input, "x_col": args.x_col,
                  "n": sample.n, "p": sample.p},
        "config": _config_echo(args, cfg),
        "result": {
            "t_stat": res.t_stat,
            "critical": res.critical,
            "reject": res.reject,
            "p_value": res.p_value,
            "q_used": res.q_used,
            "m": res.m,
            "r": res.r,
        },
    }
    _emit_json(payload, args.out_json)
    if args.out_csv:
        with open(args.out_csv, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["name", "xi", "statistic"])
            for j, name in enumerate(res.names):
                writer.writerow([name, res.xi[j], res.statistics[j]])
    return 0


def _cmd_screen(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _test_config(parser, args)
    sample = load_matrix(args.input, _x_col(args.x_col), args.delimiter)
    res = stepdown(sample, cfg, threads=args.threads)
    payload = {
        "command": "screen",
        "input": {"path": args.input, "x_col": args.x_col,
                  "n": sample.n, "p": sample.p},
        "config": _config_echo(args, cfg),
        "result": {
            "steps": [
                {
                    "step": s,
                    "active": int(step.active.size),
                    "t_stat": step.t_stat,
                    "critical": step.critical,
                    "rejected": int(step.rejected.size),
                }
                for s, step in enumerate(res.steps)
            ],
            "final_rejected": int(res.final_rejected.size),
            "final_survivors": int(res.final_survivors.size),
            "q_used": res.q_used,
            "m": res.m,
            "r": res.r,
        },
    }
    _emit_json(payload, args.out_json)
    if args.out_csv:
        step_of = {}
        for s, step in enumerate(res.steps):
            for j in step.rejected:
                step_of[int(j)] = s
        order = sorted(res.final_rejected,
                       key=lambda j: -res.statistics[int(j)])
        with open(args.out_csv, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["name", "xi", "statistic", "step"])
            for j in order:
                j = int(j)
                writer.writerow(
                    [res.names[j], res.xi[j], res.statistics[j], step_of[j]]
                )
    return 0


def _cmd_blocksize(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.n < 3:
        parser.error(f"--n must be >= 3, got {args.n}")
    lines = [
        f"n {args.n}",
        f"optimal_q {blocksize.optimal_block_size(args.n)}",
        f"approx_q {blocksize.approx_block_size(args.n)}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    if args.grid:
        sys.stdout.write("q,mse\n")
        for q in range(1, (args.n - 1) // 2 + 1):
            sys.stdout.write(f"{q},{blocksize.block_size_mse(args.n, q)}\n")
    return 0


def _cmd_simulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    _check_alpha(parser, args.alpha)
    if args.s_reps < 1:
        parser.error(f"--S must be >= 1, got {args.s_reps}")
    if args.b_reps < 1:
        parser.error(f"--B must be >= 1, got {args.b_reps}")
    if args.threads < 1:
        parser.error(f"--threads must be >= 1, got {args.threads}")
    grid = [_parse_q(parser, tok.strip()) for tok in args.q.split(",") if tok.strip()]
    if not grid:
        parser.error("--q grid is empty")
    spec = ModelSpec(
        model=f"model{args.model}",
        n=args.n,
        p=args.p,
        rho=args.rho,
        tau=args.tau,
        seed=args.seed,
    )
    results = run_rejection_study(
        spec, grid, args.variant, args.s_reps, args.b_reps, args.alpha,
        seed=args.seed, threads=args.threads,
    )
    buffer = io.StringIO()
    results_to_csv(results, buffer)
    if args.out:
        with open(args.out, "w", newline="") as handle:
            handle.write(buffer.getvalue())
    else:
        sys.stdout.write(buffer.getvalue())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except (MatrixFormatError, OSError, ValueError) as err:
        print(f"ximax: {err}", file=sys.stderr)
        return 2
    except XimaxError as err:
        print(f"ximax: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
