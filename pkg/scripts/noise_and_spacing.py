#!/usr/bin/env python3
"""Noise propagation and random-spacing studies against their closed forms.

Prints Monte Carlo output variances for the exponential and window rules next
to the analytic formulas, the window/exponential variance-match ratios, and a
random-spacing run for both gap laws.
"""
import argparse
import math

from lacsim import (ExpGaps, ExponentialWeighting, FiniteWindow, GlobalAverage,
                    SpacingModel, UniformGaps, monte_carlo_noise, monte_carlo_spacing,
                    noise_var_exp, noise_var_window, variance_match_rho)


def noise_table(replicates, seed):
    print(f"{'target':>16} {'analytic':>10} {'sampled':>10} {'rel err':>9}")
    rows = [(f"exp rho={r}", ExponentialWeighting(r), noise_var_exp(r))
            for r in (0.3, 0.5, 0.7, 0.9)]
    rows += [(f"window L={L}", FiniteWindow(L), noise_var_window(L)) for L in (2, 5, 10)]
    rows.append(("global N=100", GlobalAverage(100), 0.01))
    for name, target, analytic in rows:
        rep = monte_carlo_noise(target, 1.0, replicates, seed)
        rel = abs(rep.sampled_variance - analytic) / analytic
        print(f"{name:>16} {analytic:10.6f} {rep.sampled_variance:10.6f} {rel:9.2%}")


def match_table():
    print(f"{'L':>4} {'matched rho':>12} {'exp var':>10} {'window var':>11} {'ratio':>8}")
    for L in (2, 5, 10, 20, 50, 200):
        m = variance_match_rho(L)
        print(f"{L:4d} {m.rho:12.6f} {m.exp_variance:10.6f} "
              f"{m.window_variance:11.6f} {m.exp_variance / m.window_variance:8.4f}")


def spacing_table(replicates, seed):
    print(f"{'law':>18} {'rho':>8} {'K':>8} {'mean':>8} {'var':>9} {'var analytic':>13}")
    for law, rho in ((ExpGaps(), math.exp(-1)), (ExpGaps(), 0.5),
                     (UniformGaps(0.3), 0.9)):
        rep = monte_carlo_spacing(rho, SpacingModel(law, seed), replicates)
        var_a = "-" if rep.var_analytic is None else f"{rep.var_analytic:13.6f}"
        print(f"{rep.law:>18} {rho:8.4f} {rep.k_analytic:8.4f} "
              f"{rep.mean:8.5f} {rep.var_sampled:9.6f} {var_a:>13}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    noise_table(args.replicates, args.seed)
    print()
    match_table()
    print()
    spacing_table(max(args.replicates, 1000), args.seed)


if __name__ == "__main__":
    main()
