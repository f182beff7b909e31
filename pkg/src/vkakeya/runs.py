"""Run manifests, result rows and the on-disk layout runs/<run_id>/."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

__all__ = [
    "RNG_ALGORITHM",
    "QUANTITIES",
    "INDEX_KEYS",
    "RunManifest",
    "ResultRow",
    "RunWriter",
    "code_version",
    "default_out_dir",
    "read_results",
    "read_manifest",
]

RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence"
INDEX_KEYS = ("n", "eps", "p", "lambda", "nu")
CSV_FIELDS = ("run_id", "quantity", *INDEX_KEYS, "value", "error_estimate")

QUANTITIES = {
    "union_area": "measure of the union of the family's triangles",
    "n_times_union_area": "n times the union measure",
    "min_reach_gap": "smallest separating gap between two reaches (positive means disjoint)",
    "triangle_count": "number of triangles in the family",
    "freq_along_max": "max over samples of |<e, xi - R e>| / (64 eps^2)",
    "freq_perp_max": "max over samples of |<xi, e_perp>| / (2^(n+2) eps)",
    "freq_violations": "number of sampled points breaking either frequency bound",
    "C_lower": "certified lower estimate of the annulus multiplier norm",
    "L": "L^{p'} norm of the annulus square function on the window",
    "R": "L^{p'} norm of the strip square function, tail included",
    "c_reach": "min over reach samples of |K_nu * f_nu|",
    "truncation_estimate": "tail contribution added to R",
    "reach_comparator": "2^(-1/p') c_reach (sum of reach areas)^(1/p')",
    "scaling_slope": "least-squares slope of log C_lower against log n",
    "khinchine_C_hat": "largest sign-draw ratio of the annulus multiplier on the torus",
    "khinchine_margin": "K C_hat R_grid / L_grid (>= 1 when the inequality holds)",
    "squarefn_Q_max": "max over trials of the localized square-function statistic",
    "squarefn_Q_median": "median over trials of the localized square-function statistic",
    "derivative_ratio_max": "max over trials of sup_t ||d/dt A_t f||_p / (lambda ||f||_p)",
    "derivative_ratio_median": "median over trials of the same ratio",
    "variation": "r-variation of t -> A_t f(x0) (r stored in the p column)",
    "besov": "dyadic Besov 1/2 seminorm of t -> A_t f(x0)",
    "embedding_bound": "calibrated constant times the 2-variation",
    "variation_brute_force_gap": "|dynamic programme - brute force| on a coarse subsample",
}


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def default_out_dir() -> Path:
    return Path(os.environ.get("VK_OUT_DIR", "runs"))


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="microseconds")


@dataclass
class RunManifest:
    run_id: str
    command: str
    parameters: dict
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    code_version: str = field(default_factory=code_version)
    started: str = field(default_factory=_now)
    finished: str | None = None

    @staticmethod
    def make_id(command: str, parameters: dict, seed: int, started: str) -> str:
        digest = hashlib.sha256(json.dumps([command, parameters, seed], sort_keys=True).encode()).hexdigest()[:10]
        stamp = started.replace("-", "").replace(":", "").replace("+0000", "").split(".")[0]
        return f"{command}-{stamp}-{digest}"

    @classmethod
    def start(cls, command: str, parameters: dict, seed: int) -> "RunManifest":
        started = _now()
        return cls(cls.make_id(command, parameters, seed, started), command, parameters, seed, started=started)

    def reproducible_part(self) -> dict:
        d = asdict(self)
        for k in ("run_id", "started", "finished"):
            d.pop(k)
        return d


@dataclass
class ResultRow:
    run_id: str
    quantity: str
    value: float
    error_estimate: float = 0.0
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"undocumented quantity {self.quantity!r}")
        unknown = set(self.index) - set(INDEX_KEYS)
        if unknown:
            raise ValueError(f"unknown index keys {sorted(unknown)}")

    def as_csv(self) -> dict:
        out = {"run_id": self.run_id, "quantity": self.quantity}
        for k in INDEX_KEYS:
            v = self.index.get(k)
            out[k] = "" if v is None else (str(v) if isinstance(v, int) else f"{float(v):.16e}")
        out["value"] = f"{float(self.value):.16e}"
        out["error_estimate"] = f"{float(self.error_estimate):.16e}"
        return out


class RunWriter:
    """Collects rows and artefacts of one command and writes them under out_dir/<run_id>/."""

    def __init__(self, command: str, parameters: dict, seed: int, out_dir: str | Path | None = None):
        self.manifest = RunManifest.start(command, parameters, seed)
        root = Path(out_dir if out_dir is not None else default_out_dir())
        root.mkdir(parents=True, exist_ok=True)
        base, k = self.manifest.run_id, 1
        # ids have one-second resolution; repeat runs within that second get a suffix
        while True:
            try:
                (root / self.manifest.run_id).mkdir()
                break
            except FileExistsError:
                k += 1
                self.manifest.run_id = f"{base}-{k}"
        self.dir = root / self.manifest.run_id
        self.rows: list[ResultRow] = []

    @property
    def run_id(self) -> str:
        return self.manifest.run_id

    def add(self, quantity: str, value: float, error_estimate: float = 0.0, **index) -> ResultRow:
        row = ResultRow(self.run_id, quantity, float(value), float(error_estimate), index)
        self.rows.append(row)
        return row

    def path(self, name: str) -> Path:
        return self.dir / name

    def finish(self) -> Path:
        self.manifest.finished = _now()
        with open(self.dir / "results.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            w.writeheader()
            for row in self.rows:
                w.writerow(row.as_csv())
        (self.dir / "manifest.json").write_text(json.dumps(asdict(self.manifest), indent=1, sort_keys=True))
        return self.dir


def read_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    return RunManifest(**json.loads(path.read_text()))


def read_results(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.is_dir():
        path = path / "results.csv"
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def finite_or_nan(x) -> float:
    x = float(x)
    return x if math.isfinite(x) else float("nan")
