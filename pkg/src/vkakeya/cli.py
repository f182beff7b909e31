"""Command-line entry point: ``vkakeya <command> [flags]``.

Every command writes runs/<run_id>/{manifest.json, results.csv, ...} under
--out-dir (default $VK_OUT_DIR or ./runs).  Exit status is 0 on success,
2 for usage errors and out-of-contract parameters, and 3 when a gate or a
declared tolerance fails.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import besicovitch as geo
from .counterexample import (
    ExampleParams,
    OutOfContract,
    QuadratureError,
    TruncationError,
    khinchine_crossval,
    lower_bound_estimate,
    scaling_study,
    verify_frequency_claim,
)
from .counterexample.lower_bound import convolution_heatmap
from .field import write_pgm
from .runs import RunWriter, read_manifest, read_results
from .varnorm import write_series_csv
from .studies import DEMO_PROFILES, derivative_bound_study, squarefn_study, variation_demo

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 2, 3

# sup_t ||d/dt A_t f||_p <= C lambda ||f||_p for lambda-band-limited f
DERIVATIVE_CONSTANT = 1.5
SQUAREFN_QUADRATURE_TOL = 1e-8


class ToleranceFailure(RuntimeError):
    pass


def _fraction(text: str) -> float:
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)


def _cmd_geometry(args, run: RunWriter) -> None:
    for n in args.n:
        fam = geo.keich_family(n)
        ua = geo.union_area_report(fam)
        gap = fam.provenance["min_reach_gap"]
        geo.write_family(fam, run.path(f"family_n{n}.json"), run.path(f"family_n{n}.svg"))
        run.add("triangle_count", len(fam.segments), n=n)
        run.add("union_area", ua.area, ua.error_bound, n=n)
        run.add("n_times_union_area", n * ua.area, n * ua.error_bound, n=n)
        run.add("min_reach_gap", gap, geo.EPS_GEOM, n=n)


def _cmd_freq_claim(args, run: RunWriter) -> None:
    if args.samples < 1:
        raise ValueError("--samples must be positive")
    bad = 0
    for n in args.n:
        for eps in args.eps:
            params = ExampleParams(n, eps)
            nus = range(params.count) if args.nu is None else [args.nu]
            along = perp = 0.0
            for nu in nus:
                rep = verify_frequency_claim(params, nu, args.samples, seed=args.seed + nu, raise_on_violation=False)
                along, perp = max(along, rep.along_max), max(perp, rep.perp_max)
                bad += rep.violations
                if rep.violations:
                    run.add("freq_violations", rep.violations, n=n, eps=eps, nu=nu)
            run.add("freq_along_max", along, n=n, eps=eps)
            run.add("freq_perp_max", perp, n=n, eps=eps)
    if bad:
        raise ToleranceFailure(f"{bad} sampled frequencies violate the box bounds")


def _ledger_rows(run: RunWriter, led) -> None:
    idx = dict(n=led.n, eps=led.eps, p=led.p)
    qerr = led.details["kernel_quadrature_rel_error"] + led.details["interpolation_rel_error"]
    run.add("C_lower", led.C_lower, qerr * led.C_lower, **idx)
    run.add("L", led.L, led.details["mirror_sheet_bound"], **idx)
    run.add("R", led.R, led.truncation_estimate, **idx)
    run.add("c_reach", led.c_reach, **idx)
    run.add("truncation_estimate", led.truncation_estimate, **idx)
    run.add("reach_comparator", led.details["reach_comparator"], **idx)


def _cmd_lower_bound(args, run: RunWriter) -> None:
    params = ExampleParams(args.n[0], args.eps[0], args.p[0])
    C, led = lower_bound_estimate(params, tuple(args.window), seed=args.seed)
    run.path("ledger.json").write_text(led.to_json())
    _ledger_rows(run, led)
    for nu in sorted({0, params.count - 1}):
        write_pgm(convolution_heatmap(params, nu, tuple(args.window), args.heatmap_size), run.path(f"reach_nu{nu}.pgm"))


def _cmd_scaling(args, run: RunWriter) -> None:
    ns = list(range(args.n_min, args.n_max + 1))
    if not ns:
        raise ValueError(f"empty range n_min={args.n_min} > n_max={args.n_max}")
    res = scaling_study(args.p[0], ns, args.eps[0], tuple(args.window), args.seed)
    for led in res.ledgers:
        _ledger_rows(run, led)
    if res.slope is not None:
        run.add("scaling_slope", res.slope, p=args.p[0], eps=args.eps[0])
    run.path("scaling.json").write_text(
        json.dumps({"p": res.p, "rows": res.rows, "slope": res.slope, "intercept": res.intercept}, indent=1)
    )


def _cmd_khinchine(args, run: RunWriter) -> None:
    params = ExampleParams(args.n[0], args.eps[0], args.p[0])
    chk = khinchine_crossval(params, args.trials, args.seed, args.grid_size, args.grid_side)
    idx = dict(n=params.n, eps=params.eps, p=params.p)
    run.add("khinchine_C_hat", chk.C_hat, float(chk.C_hat - chk.ratios.min()), **idx)
    run.add("khinchine_margin", chk.grid_margin, **idx)
    if not chk.passed:
        raise ToleranceFailure(f"L > K C_hat R on the grid (margin {chk.grid_margin:.4g})")


def _cmd_squarefn(args, run: RunWriter) -> None:
    worst = 0.0
    for lam in args.lam:
        res = squarefn_study(lam, tuple(args.p), args.trials, args.seed, args.grid_size, args.grid_side)
        worst = max(worst, res.quadrature_error)
        for p in res.ps:
            err = res.quadrature_error * np.sqrt(lam)
            run.add("squarefn_Q_max", res.max(p), err, p=p, **{"lambda": lam})
            run.add("squarefn_Q_median", res.median(p), err, p=p, **{"lambda": lam})
    if worst > SQUAREFN_QUADRATURE_TOL:
        raise ToleranceFailure(f"angular quadrature doubling error {worst:.3g} > {SQUAREFN_QUADRATURE_TOL:g}")


def _cmd_derivative_bound(args, run: RunWriter) -> None:
    worst = 0.0
    for lam in args.lam:
        res = derivative_bound_study(lam, tuple(args.p), args.trials, args.seed, args.grid_size, args.grid_side)
        for p in res.ps:
            worst = max(worst, res.max(p))
            run.add("derivative_ratio_max", res.max(p), 1e-12, p=p, **{"lambda": lam})
            run.add("derivative_ratio_median", float(np.median(res.ratios[p])), 1e-12, p=p, **{"lambda": lam})
    if worst > DERIVATIVE_CONSTANT:
        raise ToleranceFailure(f"derivative ratio {worst:.4g} exceeds {DERIVATIVE_CONSTANT}")


def _cmd_variation_demo(args, run: RunWriter) -> None:
    demo = variation_demo(args.profile)
    for r, v in demo.variation.items():
        run.add("variation", v, abs(demo.refinement[r]), p=r)
    run.add("besov", demo.besov)
    run.add("embedding_bound", demo.embedding_bound)
    gap = max(abs(dp - bf) for _, dp, bf in demo.coarse_checks)
    run.add("variation_brute_force_gap", gap)
    write_series_csv(demo.series, run.path("series.csv"))
    if gap != 0.0:
        raise ToleranceFailure(f"dynamic programme and brute force differ by {gap:.3g}")
    if demo.besov > demo.embedding_bound * (1 + 1e-12):
        raise ToleranceFailure("Besov seminorm exceeds the calibrated embedding bound")


COMMANDS = {
    "geometry": _cmd_geometry,
    "freq-claim": _cmd_freq_claim,
    "lower-bound": _cmd_lower_bound,
    "scaling": _cmd_scaling,
    "khinchine": _cmd_khinchine,
    "squarefn": _cmd_squarefn,
    "derivative-bound": _cmd_derivative_bound,
    "variation-demo": _cmd_variation_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vkakeya", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, seed: int = 0) -> None:
        p.add_argument("--seed", type=int, default=seed)
        p.add_argument("--out-dir", default=None, help="results root (default $VK_OUT_DIR or ./runs)")

    def counter(p, n, p_default):
        p.add_argument("--n", type=int, nargs="+", default=n)
        p.add_argument("--eps", type=_fraction, nargs="+", default=[2.0**-5])
        p.add_argument("--p", type=float, nargs="+", default=[p_default])
        p.add_argument("--window", type=float, nargs=2, default=[-1.0, 5.0], metavar=("LO", "HI"))

    p = sub.add_parser("geometry", help="build triangle families and check their gates")
    p.add_argument("--n", type=int, nargs="+", default=[2])
    common(p)

    p = sub.add_parser("freq-claim", help="sample the annulus-strip support against the frequency box")
    p.add_argument("--n", type=int, nargs="+", default=[10])
    p.add_argument("--eps", type=_fraction, nargs="+", default=[2.0**-5])
    p.add_argument("--nu", type=int, default=None, help="single direction (default: all)")
    p.add_argument("--samples", type=int, default=100_000)
    common(p)

    p = sub.add_parser("lower-bound", help="certified lower estimate for one n")
    counter(p, [3], 4.0)
    p.add_argument("--heatmap-size", type=int, default=256)
    common(p)

    p = sub.add_parser("scaling", help="lower estimates over a range of n and their log-log slope")
    counter(p, [3], 4.0)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    common(p)

    p = sub.add_parser("khinchine", help="random-sign check of the square-function inequality on a torus")
    counter(p, [3], 4.0)
    p.add_argument("--trials", type=int, default=64, help="number of sign draws")
    p.add_argument("--grid-size", type=int, default=1024)
    p.add_argument("--grid-side", type=float, default=32.0)
    common(p)

    for name, side, lams, helptext in (
        ("squarefn", float(np.pi), [32.0, 64.0, 128.0, 256.0], "localized square function of circular means"),
        ("derivative-bound", 8.0, [32.0, 128.0], "ratio of the radial derivative of circular means to lambda"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=lams)
        p.add_argument("--p", type=float, nargs="+", default=[2.0, 4.0])
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--grid-size", type=int, default=1024)
        p.add_argument("--grid-side", type=float, default=side)
        common(p)

    p = sub.add_parser("variation-demo", help="variation norms of t -> A_t f(0) for a canned f")
    p.add_argument("--profile", choices=sorted(DEMO_PROFILES), default="gaussian")
    common(p)

    p = sub.add_parser("replay", help="rerun a recorded run and compare results bit for bit")
    p.add_argument("run_dir")
    p.add_argument("--out-dir", default=None)
    return parser


def _parameters(args) -> dict:
    skip = {"command", "seed", "out_dir"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def execute(command: str, parameters: dict, seed: int, out_dir) -> tuple[int, Path]:
    args = argparse.Namespace(command=command, seed=seed, out_dir=out_dir, **parameters)
    run = RunWriter(command, parameters, seed, out_dir)
    try:
        COMMANDS[command](args, run)
        code = EXIT_OK
    except (ToleranceFailure, geo.GateViolation, QuadratureError, TruncationError, AssertionError) as exc:
        print(f"vkakeya {command}: tolerance failure: {exc}", file=sys.stderr)
        code = EXIT_TOLERANCE
    except (ValueError, IndexError):
        shutil.rmtree(run.dir, ignore_errors=True)
        raise
    return code, run.finish()


def _replay(args) -> int:
    old = read_manifest(args.run_dir)
    out_dir = args.out_dir or tempfile.mkdtemp(prefix="vkakeya-replay-")
    code, new_dir = execute(old.command, old.parameters, old.seed, out_dir)
    new = read_manifest(new_dir)
    cols = ("quantity", "n", "eps", "p", "lambda", "nu", "value", "error_estimate")
    a = [tuple(r[c] for c in cols) for r in read_results(args.run_dir)]
    b = [tuple(r[c] for c in cols) for r in read_results(new_dir)]
    same = a == b and old.reproducible_part() == new.reproducible_part()
    print(f"replay {old.run_id} -> {new.run_id}: {'identical' if same else 'DIFFERENT'} ({len(a)} rows)")
    return EXIT_OK if same and code == EXIT_OK else EXIT_TOLERANCE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return _replay(args)
        code, out = execute(args.command, _parameters(args), args.seed, args.out_dir)
    except (ValueError, OutOfContract, IndexError) as exc:
        print(f"vkakeya {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
