"""Small-grid versions of the two circular-mean studies.

The square-function statistic Q should stay nearly flat in lambda at p=2
and grow slowly at p=4; the radial derivative of the circular mean of a
lambda-band-limited field should be at most a constant times lambda.
The full-size runs are the `vkakeya squarefn` and `vkakeya derivative-bound`
commands; this script uses 256^2 grids so it finishes in seconds.
"""

import argparse

from vkakeya.studies import derivative_bound_study, squarefn_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--trials", type=int, default=4)
    args = ap.parse_args()

    print("square function  lambda    max Q(p=2)  max Q(p=4)")
    for lam in (8.0, 16.0, 32.0, 64.0):
        res = squarefn_study(lam, trials=args.trials, size=args.size)
        print(f"{'':17}{lam:>6g}    {res.max(2.0):>10.4f}  {res.max(4.0):>10.4f}")

    print("\nderivative bound lambda    ratio(p=2)  ratio(p=4)")
    for lam in (8.0, 32.0):
        res = derivative_bound_study(lam, trials=args.trials, size=args.size)
        print(f"{'':17}{lam:>6g}    {res.max(2.0):>10.4f}  {res.max(4.0):>10.4f}")


if __name__ == "__main__":
    main()
