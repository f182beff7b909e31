"""Variation norms of t -> A_t f(0) for a few fixed profiles.

For each profile we sample the circular mean at the origin on [1, 2),
compute the r-variation for several r, and compare the dyadic Besov
seminorm with the calibrated multiple of the 2-variation.
"""

from vkakeya.studies import DEMO_PROFILES, variation_demo


def main() -> None:
    rs = (1.0, 1.5, 2.0, 3.0)
    header = "  ".join(f"V_{r:g}".rjust(9) for r in rs)
    print(f"{'profile':>9}  {header}  {'Besov':>9}  {'bound':>9}  refinement")
    for name in sorted(DEMO_PROFILES):
        d = variation_demo(name, rs)
        vals = "  ".join(f"{d.variation[r]:>9.4g}" for r in rs)
        drift = max(abs(x) for x in d.refinement.values())
        print(f"{name:>9}  {vals}  {d.besov:>9.4g}  {d.embedding_bound:>9.4g}  {drift:.2g}")
        assert all(dp == bf for _, dp, bf in d.coarse_checks)
    print("\nvariation is non-increasing in r; the dynamic programme matched brute force on every coarse subsample")


if __name__ == "__main__":
    main()
