"""Command line entry point: ``run``, ``sweep``, ``price`` and ``payoffs``."""

from __future__ import annotations

import argparse
import json
import sys

from .. import incentive
from ..errors import OracleError
from .config import RunConfig
from .csvio import emit_csv
from .runner import METRICS_COLUMNS, payoff_experiment, run, sweep

SWEEP_COLUMNS = [
    "axis", "value", "alpha_eff", "mode", "seeds", "reveal_variance", "reveal_variance_se",
    "survivor_variance", "aggregate_variance", "malicious_selected", "committee_size",
]
PAYOFF_COLUMNS = ["publisher_strategy", "malicious_strategy", "trials", "seeds", "mean_u1", "mean_u2"]


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _parse_values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_run(args) -> int:
    cfg = _config(args)
    n = emit_csv(run(cfg), args.out, METRICS_COLUMNS)
    print(json.dumps({"rows": n, "out": args.out, "seed": cfg.seed}))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    table = sweep(cfg, args.axis, _parse_values(args.values), seeds=args.seeds, workers=args.workers)
    emit_csv(table, args.out or sys.stdout, SWEEP_COLUMNS)
    return 0


def cmd_price(args) -> int:
    eq = incentive.equilibrium(args.alpha, args.k, args.n)
    print(
        json.dumps(
            {
                "K": args.k,
                "u": args.alpha,
                "n": args.n,
                "alpha_eff": eq.alpha_eff,
                "P": eq.fee,
                "delta": eq.delta,
                "U1": eq.payoffs.leader,
                "U2": eq.payoffs.follower,
            }
        )
    )
    return 0


def cmd_payoffs(args) -> int:
    cfg = _config(args)
    table = payoff_experiment(cfg, trials=args.trials, seeds=args.seeds, workers=args.workers)
    emit_csv(table, args.out or sys.stdout, PAYOFF_COLUMNS)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oraclegame", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one run and write per-task metrics as CSV")
    r.add_argument("--config", help="JSON file with RunConfig fields")
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep one parameter over both selection modes")
    s.add_argument("--axis", required=True, choices=["u", "lambda", "M", "K"])
    s.add_argument("--values", required=True, help="comma separated, e.g. 0.3,0.4,0.5")
    s.add_argument("--config")
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    q = sub.add_parser("price", help="recommended fee and equilibrium payoffs")
    q.add_argument("--k", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True, help="normalised quality weight in [0, 1]")
    q.add_argument("--n", type=int, default=5)
    q.set_defaults(func=cmd_price)

    y = sub.add_parser("payoffs", help="realised payoffs under recommended vs random strategies")
    y.add_argument("--trials", type=int, default=50)
    y.add_argument("--seeds", type=int, default=10)
    y.add_argument("--workers", type=int, default=1)
    y.add_argument("--config")
    y.add_argument("--seed", type=int)
    y.add_argument("--out")
    y.set_defaults(func=cmd_payoffs)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
