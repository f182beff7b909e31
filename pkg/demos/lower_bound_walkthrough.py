"""Walk through the annulus lower estimate for one order, then watch it grow with n.

The estimate compares two square functions of modulated triangle pieces:
L (after the annulus multiplier, measured on a window) and R (before it).
C_lower = L / (K R) is then a lower bound for the multiplier norm on L^p.
"""

import argparse

import numpy as np

from vkakeya.counterexample import (
    ExampleParams,
    convolve_on_reach,
    kernel_K_nu,
    lower_bound_estimate,
    plate_minimum,
    scaling_study,
    verify_frequency_claim,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--n-max", type=int, default=5)
    args = ap.parse_args()

    P = ExampleParams(args.n, p=args.p)
    print(f"order n={P.n}: {P.count} directions, frequency radius {P.radius:g}, eps={P.eps:g}")

    rep = verify_frequency_claim(P, P.count - 1, 50_000)
    print(f"frequency box, last direction: along {rep.along_max:.3f}, across {rep.perp_max:.3f} (both <= 1)")

    k0 = kernel_K_nu(P, 0, np.zeros(2))
    print(f"K_0(0) = {k0.real:.4g}; plate minimum / (eps^3 2^n) = {plate_minimum(P, 0):.4f}")

    c = [convolve_on_reach(P, nu).min() for nu in range(P.count)]
    print(f"|K * f| on the reaches: min {min(c):.4g}, spread {max(c) / min(c):.3f}")

    C, led = lower_bound_estimate(P)
    d = led.details
    print(f"L = {led.L:.4g} (mirror-sheet allowance {d['mirror_sheet_bound']:.2g})")
    print(f"R = {led.R:.4g} (tail allowance {led.truncation_estimate:.2g})")
    print(f"C_lower = L / ({led.K_pprime:.4f} R) = {C:.4g}")

    res = scaling_study(args.p, range(3, args.n_max + 1))
    for n, value in res.rows:
        print(f"  n={n}: C_lower {value:.4g}")
    if res.slope is not None:
        print(f"log-log slope {res.slope:.3f}")


if __name__ == "__main__":
    main()
