"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import bench
from .bench import ExperimentConfig, rows_to_csv
from .citest import ESTIMATED, GROUND_TRUTH, OLS, WLS, CITestSpec, run_ci_test
from .data import Dataset, atomic_write_text
from .errors import ConfigError, HetcdError, InvalidSpec, UnknownVariable
from .scm_sim import LINEAR, PERIODIC, ScmSpec, random_scm, scaling_for, simulate, simulate_bivariate
from .stats_dist import make_rng
from .variance_weights import PARENT, HeteroSpec


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> list:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_bench_args(p: argparse.ArgumentParser, pc: bool) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--strengths", type=_floats)
    p.add_argument("--reps", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lam", type=int, help="window length for variance estimation")
    p.add_argument("--variants", type=_names, help=f"subset of {','.join(bench.VARIANTS)}")
    p.add_argument("--shape", choices=[LINEAR, PERIODIC, "mixed"])
    p.add_argument("--driver", choices=["z", "index", "mixed"])
    p.add_argument("--coeff", type=float)
    p.add_argument("--bootstrap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    p.add_argument("--threads", type=int, help="worker processes (default: $HETCD_THREADS or CPU count)")
    if pc:
        p.add_argument("--d", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--hetero-fraction", dest="hetero_fraction", type=float)
    else:
        p.add_argument("--placement", choices=["x-only", "both"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hetcd", description="Heteroskedasticity-aware partial-correlation CI tests and PC-stable.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("citest-bench", help="calibration (KS) and power (AUPC) of the CI tests")
    _add_bench_args(p, pc=False)
    p = sub.add_parser("pc-bench", help="graph recovery of PC-stable with each CI test")
    _add_bench_args(p, pc=True)

    p = sub.add_parser("simulate", help="draw data from an SCM and write CSV files")
    p.add_argument("--spec", help="SCM spec JSON; otherwise a random SCM or --bivariate model")
    p.add_argument("--bivariate", action="store_true", help="confounded X, Y, Z model")
    p.add_argument("--c", type=float, default=0.5, help="confounding strength (bivariate)")
    p.add_argument("--placement", choices=["none", "x-only", "both"], default="x-only")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--strength", type=float, default=0.0)
    p.add_argument("--shape", choices=[LINEAR, PERIODIC, "mixed"], default=LINEAR)
    p.add_argument("--driver", choices=["z", "index", "mixed"], default="z")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", required=True, help="data CSV path")
    p.add_argument("--sigma-output", help="CSV of true noise standard deviations")
    p.add_argument("--spec-output", help="write the SCM spec (and expert knowledge) as JSON")

    p = sub.add_parser("ci-single", help="run one CI test on a CSV file")
    p.add_argument("data")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--cond", type=_names, default=[])
    p.add_argument("--knowledge", help="JSON map variable -> none | sampling_index | parent:NAME")
    p.add_argument("--variant", choices=[OLS, WLS], default=None,
                   help="default: wls when --knowledge is given, else ols")
    p.add_argument("--weight-mode", dest="weight_mode", choices=[ESTIMATED, GROUND_TRUTH], default=ESTIMATED)
    p.add_argument("--sigma", help="CSV of true noise standard deviations (ground_truth mode)")
    p.add_argument("--lam", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.05)

    p = sub.add_parser("selftest", help="quick numerical self-checks")
    return parser


def _load_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid {what} JSON: {exc.msg}") from None


def _experiment_config(kind: str, args) -> ExperimentConfig:
    base = {}
    if args.config:
        base = _load_json(args.config, "config")
        if not isinstance(base, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
    base["experiment"] = kind
    if kind == "pc-bench":
        base.setdefault("placement", "random-graph")
        base.setdefault("shape", "mixed")
        base.setdefault("driver", "mixed")
    for key in ("strengths", "reps", "n", "alpha", "lam", "variants", "shape", "driver", "coeff",
                "bootstrap", "seed", "output", "d", "m", "hetero_fraction", "placement"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    try:
        return ExperimentConfig.from_dict(base)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def cmd_bench(kind: str, args) -> int:
    cfg = _experiment_config(kind, args)
    runner = bench.run_citest_bench if kind == "citest-bench" else bench.run_pc_bench
    rows = runner(cfg, workers=args.threads)
    _emit(rows_to_csv(rows), cfg.output)
    return 0


def parse_knowledge(obj, names: Sequence[str]) -> dict:
    """Validate a knowledge map against the dataset's variable names."""
    if not isinstance(obj, dict):
        raise ConfigError("knowledge file must contain a JSON object")
    out = {}
    for key, value in obj.items():
        if key not in names:
            raise ConfigError(f"knowledge key {key!r}: not a variable in the data")
        try:
            spec = HeteroSpec.from_json(value)
        except ConfigError as exc:
            raise ConfigError(f"knowledge key {key!r}: {exc}") from None
        if spec.kind == PARENT and spec.driver not in names:
            raise ConfigError(f"knowledge key {key!r}: driver {spec.driver!r} is not a variable in the data")
        out[key] = spec
    return out


def cmd_ci_single(args) -> int:
    data = Dataset.read_csv(args.data)
    knowledge = {}
    if args.knowledge:
        knowledge = parse_knowledge(_load_json(args.knowledge, "knowledge"), data.names)
    variant = args.variant or (WLS if knowledge else OLS)
    sigma = None
    if args.sigma:
        sig = Dataset.read_csv(args.sigma)
        sigma = {v: sig.column(v) for v in sig.names}
    elif variant == WLS and args.weight_mode == GROUND_TRUTH:
        raise ConfigError("--weight-mode ground_truth needs --sigma")
    spec = CITestSpec(variant, knowledge, args.lam, args.weight_mode, args.alpha)
    res = run_ci_test(data, args.x, args.y, args.cond, spec, sigma)
    print(json.dumps({"x": args.x, "y": args.y, "cond": list(args.cond), "variant": variant,
                      "rho_hat": res.rho_hat, "statistic": res.statistic, "dof": res.dof,
                      "p_value": res.p_value, "dependent": res.dependent, "alpha": args.alpha}))
    return 0


def cmd_simulate(args) -> int:
    spec_dict = None
    knowledge = None
    if args.spec:
        spec = ScmSpec.from_dict(_load_json(args.spec, "SCM spec"))
        out = simulate(spec, args.n, args.seed)
        spec_dict, knowledge = spec.to_dict(), spec.knowledge()
    elif args.bivariate:
        if args.driver == "mixed" or args.shape == "mixed":
            raise ConfigError("--bivariate needs a single --shape and --driver")
        h = scaling_for(args.shape, args.strength, "Z" if args.driver == "z" else None)
        hx = h if args.placement in ("x-only", "both") else None
        hy = h if args.placement == "both" else None
        out = simulate_bivariate(0.5, 0.5, args.c, hx, hy, args.n, args.seed)
        knowledge = {"X": hx.knowledge() if hx else HeteroSpec(),
                     "Y": hy.knowledge() if hy else HeteroSpec(), "Z": HeteroSpec()}
    else:
        rng = make_rng(args.seed)
        shapes = (LINEAR, PERIODIC) if args.shape == "mixed" else (args.shape,)
        drivers = {"mixed": ("parent", "sampling_index"), "z": ("parent",),
                   "index": ("sampling_index",)}[args.driver]
        spec = random_scm(args.d, args.m, args.strength, rng, shapes=shapes, drivers=drivers)
        out = simulate(spec, args.n, rng)
        spec_dict, knowledge = spec.to_dict(), spec.knowledge()
    atomic_write_text(args.output, out.data.to_csv_text())
    if args.sigma_output:
        sig = Dataset(out.data.names, np.column_stack([out.true_sigma[v] for v in out.data.names]))
        atomic_write_text(args.sigma_output, sig.to_csv_text())
    if args.spec_output:
        payload = {"spec": spec_dict,
                   "knowledge": {v: k.to_json() for v, k in knowledge.items()}}
        atomic_write_text(args.spec_output, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest(print) else 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"hetcd: error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        if args.command in ("citest-bench", "pc-bench"):
            return cmd_bench(args.command, args)
        if args.command == "ci-single":
            return cmd_ci_single(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_selftest(args)
    except (ConfigError, InvalidSpec, UnknownVariable) as exc:
        print(f"hetcd: error: {exc}", file=sys.stderr)
        return 1
    except (HetcdError, OSError, ArithmeticError) as exc:
        print(f"hetcd: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
