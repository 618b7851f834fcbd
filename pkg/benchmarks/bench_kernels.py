"""Timing of the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each kernel
is called on identical inputs through both backends; the script reports the
best-of-N wall time per call, the speed-up and the largest absolute
difference between the two outputs.
"""
import argparse
import math
import timeit

import numpy as np

from sparse_preden import _kernels_py
from sparse_preden.gaussian_core import QuadratureSpec, normal_legendre_nodes
from sparse_preden.priors import cluster_prior
from sparse_preden.problem import build_problem

try:
    from sparse_preden import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def cases():
    p = build_problem(0.25, math.exp(-20))
    prior = cluster_prior(p)
    locs = np.asarray(prior.locations, dtype=float)
    logw = np.log(np.asarray(prior.weights, dtype=float))
    x, _ = normal_legendre_nodes(p.lambda_f, 1.0, QuadratureSpec())
    y, wy = normal_legendre_nodes(p.lambda_f, math.sqrt(p.r), QuadratureSpec())
    z = np.random.Generator(np.random.Philox(0)).standard_normal((256, 10_000))
    return {
        "bayes_kl_loss": lambda k: k.bayes_kl_loss(p.lambda_f, x, locs, logw, p.r, y, wy),
        "posterior_mean": lambda k: k.posterior_mean(np.linspace(-8, 8, 20_000), locs, logw, 1.0),
        "bayes_log_predictive": lambda k: k.bayes_log_predictive(x, y[None, :].repeat(len(x), 0), locs, logw, p.r),
        "spike_miss_sq": lambda k: k.spike_miss_sq(z, 3.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<22}{'python ms':>12}{'compiled ms':>14}{'speed-up':>10}{'max |diff|':>13}")
    for name, call in cases().items():
        t_py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: call(_kernels_c), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(np.asarray(call(_kernels_py)) - np.asarray(call(_kernels_c)))))
        print(f"{name:<22}{1e3 * t_py:>12.3f}{1e3 * t_c:>14.3f}{t_py / t_c:>10.2f}{diff:>13.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
