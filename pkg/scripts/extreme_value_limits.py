"""Block extremes of the ELG distribution at growing block sizes.

Minima scaled by c_n = F^-1(1/n) approach 1 - exp(-x^alpha); maxima
centred at F^-1(1 - 1/n) and scaled by theta approach the Gumbel law.
Prints KS distances to the limits and to an n = 1e9 empirical reference
(same uniforms at every n)."""

import argparse

import numpy as np
from scipy.stats import ks_2samp

from elgdist import distributions as d


def ks(sample, cdf):
    x = np.sort(sample)
    F = cdf(x)
    i = np.arange(1, x.size + 1)
    return max(float((i / x.size - F).max()), float((F - (i - 1) / x.size).max()))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args(argv)

    par = d.ElgParams(args.alpha, args.theta, args.p)
    ref_n = 10 ** 9
    ref = d.block_minima(par, ref_n, args.reps, args.seed) / d.minima_scale(par, ref_n)
    limit = lambda x: d.minima_limit_cdf(x, par.alpha)  # noqa: E731
    print(f"{par}, {args.reps} replicates")
    print(f"{'n':>8} {'min: KS limit':>14} {'KS ref':>8} {'max: KS Gumbel':>15}")
    for k in range(2, 8):
        n = 10 ** k
        m = d.block_minima(par, n, args.reps, args.seed) / d.minima_scale(par, n)
        a, b = d.norming_constants(par, n)
        mx = a * (d.block_maxima(par, n, args.reps, args.seed + 1) - b)
        print(f"{n:>8} {ks(m, limit):>14.4f} {ks_2samp(m, ref, method='asymp').statistic:>8.4f} "
              f"{ks(mx, d.gumbel_cdf):>15.4f}")


if __name__ == "__main__":
    main()
