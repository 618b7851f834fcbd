"""Command-line interface: ``sparse-preden <command> [flags]``.

Exit status is 0 on success, 1 for malformed flags (with a usage message)
and 2 when the parameters are well formed but infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .estimators import MODEL_BUILDERS, BayesDiscrete
from .gaussian_core import default_quad
from .minimax import (
    asymptotic_minimax,
    independent_blocks_bound,
    lf_suboptimality_check,
    spike_prior_mc,
    spike_tau,
)
from .priors import cluster_prior, k_count_limit, three_point_lf, two_point
from .problem import build_problem, multivariate_problem, oracle_variance
from .risk import connecting_equation_rhs, kl_risk, risk_curve
from .svg import render_risk_curve

TABLE_K_R = (0.1073, 0.1235, 0.1465, 0.1826, 0.2485, 0.4196, 1.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_grid(text):
    """``lo:hi:step`` to an array of grid points, endpoints included."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:step, got {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and step > 0 and hi >= lo):
        raise argparse.ArgumentTypeError("grid needs finite lo <= hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count > 100_000:
        raise argparse.ArgumentTypeError("grid has more than 100000 points")
    return lo + step * np.arange(count)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_rows(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _problem(args):
    if args.n is not None or args.s is not None:
        if args.n is None or args.s is None:
            raise UsageError("--n and --s must be given together")
        return multivariate_problem(args.r, args.n, args.s)
    if args.eta is None:
        raise UsageError("give --eta, or --n and --s")
    return build_problem(args.r, args.eta)


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing required flag(s): {', '.join(missing)}")


# -- commands -----------------------------------------------------------------

def cmd_thresholds(args):
    _need(args, "r")
    d = _problem(args).to_dict()
    d["level"] = d["lambda_f"] ** 2 / (2.0 * d["r"])
    if args.format == "csv":
        return _csv_rows(("key", "value"), sorted(d.items()))
    return _dump_json(d)


def cmd_table_k(args):
    extra = args.r or []
    rows = [(r, k_count_limit(r)) for r in (*TABLE_K_R, *extra)]
    if args.format == "csv":
        return _csv_rows(("r", "K"), rows)
    return _dump_json({"rows": [{"r": r, "K": k} for r, k in rows]})


def cmd_risk_curve(args):
    _need(args, "r")
    problem = _problem(args)
    model = MODEL_BUILDERS[args.model](problem)
    grid = args.grid
    if grid is None:
        hi = problem.lambda_e + problem.a + 3.0
        grid = np.arange(0.0, hi + 1e-12, problem.lambda_f / 50.0)
    curve = risk_curve(
        model, problem, grid, default_quad(), component=args.component, tag=args.model,
        workers=args.workers,
    )
    prior = getattr(model.below, "prior", None)
    atoms = [loc for loc in prior.locations if loc > 0] if prior is not None else []
    meta = {
        "model": args.model,
        "r": problem.r,
        "eta": problem.eta,
        "lambda_e": problem.lambda_e,
        "lambda_f": problem.lambda_f,
        "a": problem.a,
        "level": problem.level,
    }
    curve = type(curve)(curve.model_tag, problem, curve.theta_grid, curve.values, curve.component, meta)
    if args.format == "csv":
        return curve.to_csv()
    if args.format == "svg":
        title = f"{args.model} r={problem.r:g} eta={problem.eta:.4g} ({curve.component})"
        return render_risk_curve(curve, problem.level, atoms, title)
    return _dump_json(
        {
            **meta,
            "component": curve.component,
            "atoms": atoms,
            "theta": list(curve.theta_grid),
            "value": list(curve.values),
        }
    )


def cmd_minimax_summary(args):
    _need(args, "r", "n", "s")
    summary = asymptotic_minimax(args.r, args.n, args.s)
    if args.format == "csv":
        d = summary.to_dict()
        return _csv_rows(tuple(d), [tuple(d.values())])
    return _dump_json(summary.to_dict())


def cmd_connect_check(args):
    _need(args, "r")
    problem = _problem(args)
    quad = default_quad()
    thetas = (
        args.grid
        if args.grid is not None
        else np.array([0.0, problem.nu_eta, problem.lambda_f, problem.lambda_e])
    )
    priors = {
        "two_point": two_point(problem.eta, problem.nu_eta),
        "three_point": three_point_lf(problem),
        "cluster": cluster_prior(problem),
    }
    by_prior = {}
    for name, prior in priors.items():
        model = BayesDiscrete(problem.r, prior)
        by_prior[name] = max(
            abs(kl_risk(model, t, quad) - connecting_equation_rhs(prior, t, problem, quad))
            for t in thetas
        )
    out = {
        "r": problem.r,
        "eta": problem.eta,
        "theta": [float(t) for t in thetas],
        "max_abs_diff": max(by_prior.values()),
        "by_prior": by_prior,
    }
    if args.format == "csv":
        return _csv_rows(("prior", "max_abs_diff"), sorted(by_prior.items()))
    return _dump_json(out)


def cmd_spike_mc(args):
    _need(args, "n")
    tau = args.tau if args.tau is not None else args.tau_factor * spike_tau(args.n)
    est, se = spike_prior_mc(args.n, tau, args.samples, args.seed)
    out = {"n": args.n, "tau": tau, "samples": args.samples, "seed": args.seed,
           "estimate": est, "std_error": se}
    if args.format == "csv":
        return _csv_rows(tuple(out), [tuple(out.values())])
    return _dump_json(out)


def cmd_blocks_bound(args):
    _need(args, "r", "n", "s")
    bound = independent_blocks_bound(args.r, args.n, args.s, args.samples, args.seed, default_quad())
    m = args.n // args.s
    reference = args.s * oracle_variance(args.r) * spike_tau(m) ** 2 / (2.0 * args.r)
    out = {
        "r": args.r, "n": args.n, "s": args.s, "m": m, "samples": args.samples,
        "seed": args.seed, "bound": bound, "reference": reference,
        "ratio": bound / reference,
    }
    if args.s < args.n:
        out["risk_all"] = asymptotic_minimax(args.r, args.n, args.s).risk_all
    if args.format == "csv":
        return _csv_rows(tuple(out), [tuple(out.values())])
    return _dump_json(out)


def cmd_lf_subopt(args):
    _need(args, "r", "eta")
    ratio = lf_suboptimality_check(args.r, args.eta, default_quad())
    problem = build_problem(args.r, args.eta)
    out = {
        "r": args.r,
        "eta": args.eta,
        "theta_star": 2.0 * (1.0 + args.r) * problem.nu_eta,
        "ratio": ratio,
        "ceiling": 1.0 + 1.0 / args.r,
    }
    if args.format == "csv":
        return _csv_rows(tuple(out), [tuple(out.values())])
    return _dump_json(out)


COMMANDS = {
    "thresholds": (cmd_thresholds, "json", "problem bundle derived from r and eta"),
    "table-k": (cmd_table_k, "csv", "number of positive cluster atoms in the small-eta limit"),
    "risk-curve": (cmd_risk_curve, "csv", "KL risk function of a threshold rule on a theta grid"),
    "minimax-summary": (cmd_minimax_summary, "json", "leading-order minimax risks by class"),
    "connect-check": (cmd_connect_check, "json", "largest connecting-identity discrepancy"),
    "spike-mc": (cmd_spike_mc, "json", "Monte Carlo miss probability under a single spike prior"),
    "blocks-bound": (cmd_blocks_bound, "json", "independent-blocks Monte Carlo lower bound"),
    "lf-subopt": (cmd_lf_subopt, "json", "risk ratio showing the three-point rule is sub-optimal"),
}


def build_parser():
    parser = _Parser(prog="sparse-preden", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, fmt, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        if name == "table-k":
            p.add_argument("--r", type=float, action="append",
                           help="extra variance ratio to tabulate (repeatable)")
        else:
            p.add_argument("--r", type=float, help="variance ratio of future to past observations")
        p.add_argument("--eta", type=float, help="sparsity level in (0, 1)")
        p.add_argument("--n", type=_positive_int, help="dimension")
        p.add_argument("--s", type=_positive_int, help="number of nonzero means")
        p.add_argument("--out", help="output file (default: standard output)")
        formats = ("csv", "json", "svg") if name == "risk-curve" else ("csv", "json")
        p.add_argument("--format", choices=formats, default=fmt)
        if name in ("risk-curve", "connect-check"):
            p.add_argument("--grid", type=parse_grid, help="theta grid as lo:hi:step")
        if name == "risk-curve":
            p.add_argument("--model", choices=sorted(MODEL_BUILDERS), default="cluster")
            p.add_argument("--component", choices=("total", "rho_A", "rho_B"), default="total")
            p.add_argument("--workers", type=_positive_int, default=None,
                           help="threads for grid evaluation")
        if name in ("spike-mc", "blocks-bound"):
            p.add_argument("--seed", type=_seed, default=0)
            p.add_argument("--samples", type=_positive_int, default=10_000)
        if name == "spike-mc":
            p.add_argument("--tau", type=float, help="spike height (default: tau_factor * tau_n)")
            p.add_argument("--tau-factor", type=float, default=0.8)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        text = fn(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sparse-preden {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"sparse-preden {args.command}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"sparse-preden {args.command}: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
