"""Experiment harness: dataset bundles, seeded benchmark runners, and the
command-line interface.

Bundle files carry one JSON manifest line followed by the matrices, either
as diff-able decimal CSV rows (one flattened row-major matrix per line) or
as a little-endian float64 binary block. Every runner is deterministic
given (config, seed): trial i draws from ``numpy.random.default_rng(seed
^ i)``, and CSV outputs separate value columns from timing columns so the
value files are byte-reproducible.

CLI subcommands: sample, fm, bench, gof, pga, kmeans, arma. Exit codes:
0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import permutations
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import estimators, gaussian, grassmann, mstats, stiefel
from .errors import (
    BundleFormatError,
    InsufficientData,
    InvalidMatrix,
    StiefelStatsError,
)
from .gaussian import GaussianParams, coords_to_lift
from .stiefel import StiefelPoint, manifold_dim, origin

# ---------------------------------------------------------------------------
# matrix bundles


@dataclass
class MatrixBundle:
    """A manifest plus a sequence of equally-shaped matrices."""

    n: int
    p: int
    payload: list[np.ndarray]
    manifold: str = "stiefel"  # "stiefel" or "dense"
    encoding: str = "csv"  # "csv" or "binary"
    labels: Optional[list[int]] = None

    @property
    def count(self) -> int:
        return len(self.payload)

    def points(self) -> list[StiefelPoint]:
        if self.manifold != "stiefel":
            raise BundleFormatError(f"bundle is tagged {self.manifold!r}, not stiefel")
        return [StiefelPoint(m) for m in self.payload]


def save_bundle(bundle: MatrixBundle, path) -> None:
    manifest = {
        "manifold": bundle.manifold,
        "n": bundle.n,
        "p": bundle.p,
        "count": bundle.count,
        "encoding": bundle.encoding,
    }
    if bundle.labels is not None:
        manifest["labels"] = list(map(int, bundle.labels))
    with open(path, "wb") as fh:
        fh.write((json.dumps(manifest) + "\n").encode())
        if bundle.encoding == "csv":
            for m in bundle.payload:
                row = ",".join("%.17g" % v for v in np.asarray(m).ravel())
                fh.write((row + "\n").encode())
        elif bundle.encoding == "binary":
            for m in bundle.payload:
                fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
        else:
            raise BundleFormatError(f"unknown encoding {bundle.encoding!r}")


def load_bundle(path) -> MatrixBundle:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(
            f"dataset {path} not found; supply a bundle file (JSON manifest "
            "line + CSV or little-endian float64 rows) or generate one with "
            "the `sample` subcommand"
        )
    with open(path, "rb") as fh:
        header = fh.readline()
        try:
            manifest = json.loads(header.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BundleFormatError(f"{path}: malformed manifest line: {exc}") from None
        for key in ("manifold", "n", "p", "count", "encoding"):
            if key not in manifest:
                raise BundleFormatError(f"{path}: manifest is missing {key!r}")
        n, p, count = manifest["n"], manifest["p"], manifest["count"]
        if not (isinstance(n, int) and isinstance(p, int) and isinstance(count, int)
                and n >= 1 and p >= 1 and count >= 0):
            raise BundleFormatError(f"{path}: bad dimensions in manifest")
        payload: list[np.ndarray] = []
        if manifest["encoding"] == "csv":
            for i in range(count):
                line = fh.readline().decode()
                if not line:
                    raise BundleFormatError(f"{path}: record {i}: unexpected end of file")
                try:
                    vals = np.array([float(v) for v in line.strip().split(",")])
                except ValueError as exc:
                    raise BundleFormatError(f"{path}: record {i}: {exc}") from None
                if vals.size != n * p:
                    raise BundleFormatError(
                        f"{path}: record {i}: expected {n * p} values, got {vals.size}"
                    )
                payload.append(vals.reshape(n, p))
        elif manifest["encoding"] == "binary":
            raw = fh.read(count * n * p * 8)
            if len(raw) != count * n * p * 8:
                raise BundleFormatError(f"{path}: binary payload truncated")
            payload = list(np.frombuffer(raw, dtype="<f8").reshape(count, n, p).copy())
        else:
            raise BundleFormatError(f"{path}: unknown encoding {manifest['encoding']!r}")
    if manifest["manifold"] == "stiefel":
        for i, m in enumerate(payload):
            try:
                StiefelPoint(m)
            except InvalidMatrix as exc:
                raise BundleFormatError(f"{path}: record {i}: {exc}") from None
    labels = manifest.get("labels")
    if labels is not None and len(labels) != count:
        raise BundleFormatError(f"{path}: label count {len(labels)} != {count}")
    return MatrixBundle(n, p, payload, manifest["manifold"], manifest["encoding"], labels)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    n: int = 50
    p: int = 10
    sigma: float = 0.25
    n_samples: int = 1000
    trials: int = 100
    seed: int = 0
    estimator: str = "ifme"  # ifme | batch | sgd
    sgd_a: float = 1.0
    sgd_b: float = 1.0
    passes: int = 1
    tolerance: float = 0.05  # time-to-tolerance target
    grid: list[int] = field(default_factory=lambda: [10, 100, 1000])
    components: int = 2  # PGA
    clusters: int = 3  # kmeans
    horizon: int = 200  # ARMA time columns
    state_dim: int = 3  # ARMA state dimension
    bundle: Optional[str] = None  # input dataset path
    threads: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if not (self.n >= self.p >= 1):
            raise InvalidMatrix(f"need n >= p >= 1, got ({self.n}, {self.p})")
        for name in ("sigma", "n_samples", "trials", "tolerance", "passes",
                     "clusters", "horizon", "state_dim", "threads"):
            if getattr(self, name) <= 0:
                raise InvalidMatrix(f"config field {name} must be positive")
        if self.estimator not in ("ifme", "batch", "sgd"):
            raise InvalidMatrix(f"unknown estimator {self.estimator!r}")
        self.grid = sorted(set(int(g) for g in self.grid if g <= self.n_samples))
        if not self.grid:
            self.grid = [self.n_samples]


def load_config(path) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidMatrix(f"{path}: config must be a JSON object")
    valid = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - valid
    if unknown:
        raise InvalidMatrix(f"{path}: unknown config keys {sorted(unknown)}")
    return raw


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Documented substream rule: trial i uses default_rng(seed XOR i)."""
    return np.random.default_rng(seed ^ trial)


def _map_trials(fn: Callable[[int], object], trials: int, threads: int) -> list:
    """Run fn over trial indices, optionally on a thread pool; results are
    merged in trial order either way."""
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# synthetic data generators


def geodesic_line_points(n: int, p: int, count: int,
                         rng: np.random.Generator,
                         spread: float = 0.3) -> list[StiefelPoint]:
    """Points on a single chart geodesic through the origin (rank-1 tangent
    variation; the PGA calibration dataset)."""
    o = origin(n, p)
    w = coords_to_lift(rng.standard_normal(manifold_dim(n, p)), n, p)
    w = w.scaled(1.0 / w.norm())
    return [stiefel.retract(o, w.scaled(t)) for t in rng.uniform(-spread, spread, count)]


def cluster_points(n: int, p: int, k: int, per_cluster: int, sigma: float,
                   rng: np.random.Generator,
                   center_norm: float = 0.45) -> tuple[list[StiefelPoint], list[int]]:
    """k Gaussian clusters with centers on distinct tangent axes at the
    origin; pairwise center distance is center_norm * sqrt(2)."""
    dim = manifold_dim(n, p)
    if k > dim:
        raise InvalidMatrix(f"at most {dim} separated centers on St({p},{n})")
    o = origin(n, p)
    pts: list[StiefelPoint] = []
    labels: list[int] = []
    for j in range(k):
        e = np.zeros(dim)
        e[j] = center_norm
        center = stiefel.retract(o, coords_to_lift(e, n, p))
        pts.extend(gaussian.sample(GaussianParams(center, sigma), per_cluster, rng))
        labels.extend([j] * per_cluster)
    return pts, labels


def cardiogram_surrogate(count: int, rng: np.random.Generator) -> list[StiefelPoint]:
    """Synthetic stand-in for the 98-frame St(2, 3) orientation dataset:
    two dominant tangent modes plus a small isotropic remainder."""
    o = origin(3, 2)
    dim = manifold_dim(3, 2)
    scales = np.array([0.25, 0.12] + [0.02] * (dim - 2))
    coords = rng.standard_normal((count, dim)) * scales
    return [stiefel.retract(o, coords_to_lift(c, 3, 2)) for c in coords]


def arma_system(n: int, p: int, rng: np.random.Generator,
                radius: float = 0.9) -> tuple[np.ndarray, np.ndarray]:
    """A stable transition matrix (spectral radius = radius) and an
    orthonormal measurement matrix."""
    a = rng.standard_normal((p, p))
    a *= radius / np.abs(np.linalg.eigvals(a)).max()
    c = stiefel.random_haar(n, p, rng).matrix
    return a, c


def arma_features(a: np.ndarray, c: np.ndarray, horizon: int,
                  rng: np.random.Generator, noise: float = 0.0) -> np.ndarray:
    """Simulate f(t) = C z(t) + w(t), z(t+1) = A z(t) for t = 1..horizon."""
    p, n = a.shape[0], c.shape[0]
    z = rng.standard_normal(p)
    f = np.empty((n, horizon))
    for t in range(horizon):
        f[:, t] = c @ z
        z = a @ z
    if noise > 0:
        f += noise * rng.standard_normal(f.shape)
    return f


# ---------------------------------------------------------------------------
# benchmark runners


@dataclass(frozen=True)
class BenchRow:
    estimator: str
    n_samples: int
    mean_error: float
    mean_time: float
    passes: int
    seed: int


def bench_fm(config: ExperimentConfig) -> list[BenchRow]:
    """Error-vs-N and time-vs-N for the inductive estimator and batch
    descent, averaged over config.trials seeded trials.

    The mean is the origin frame; errors use the translate-to-origin rule.
    Batch runs at each grid size are independent solves from the first
    sample (the incremental warm-start timing has its own runner).
    """
    mean = origin(config.n, config.p)
    grid = config.grid
    ref = estimators._ReferenceError(mean)

    def one_trial(t: int):
        rng = trial_rng(config.seed, t)
        pts = gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)
        out = {}
        r = estimators.ifme(pts, reference=mean)
        by_k = {tr.k: tr for tr in r.trace}
        for g in grid:
            tr = by_k[g]
            out[("ifme", g)] = (tr.error_to_reference, tr.elapsed)
        for g in grid:
            b = estimators.batch_fm(pts[:g], init=pts[0], tol=1e-6, max_iter=100)
            out[("batch", g)] = (ref(b.estimate), b.wall_time)
        return out

    results = _map_trials(one_trial, config.trials, config.threads)
    rows = []
    for name in ("ifme", "batch"):
        for g in grid:
            errs = [r[(name, g)][0] for r in results]
            times = [r[(name, g)][1] for r in results]
            rows.append(BenchRow(name, g, float(np.mean(errs)),
                                 float(np.mean(times)), 1, config.seed))
    return rows


def bench_incremental(config: ExperimentConfig) -> list[BenchRow]:
    """Total wall time on the incremental workload (re-estimate after every
    arrival) for the single-pass estimator vs warm-started batch descent."""
    mean = origin(config.n, config.p)
    grid = config.grid

    def one_trial(t: int):
        rng = trial_rng(config.seed, t)
        pts = gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)
        out = {}
        r = estimators.ifme(pts, reference=mean)
        by_k = {tr.k: tr for tr in r.trace}
        for g in grid:
            out[("ifme", g)] = (by_k[g].error_to_reference, by_k[g].elapsed)
        ref = estimators._ReferenceError(mean)
        t0 = time.perf_counter()
        m = pts[0]
        for k in range(2, config.n_samples + 1):
            m = estimators.batch_fm(pts[:k], init=m, tol=1e-8, max_iter=50).estimate
            if k in grid:
                out[("batch-incremental", k)] = (ref(m), time.perf_counter() - t0)
        if 1 in grid:
            out[("batch-incremental", 1)] = (ref(pts[0]), 0.0)
        return out

    results = _map_trials(one_trial, config.trials, config.threads)
    rows = []
    for name in ("ifme", "batch-incremental"):
        for g in grid:
            if (name, g) not in results[0]:
                continue
            errs = [r[(name, g)][0] for r in results]
            times = [r[(name, g)][1] for r in results]
            rows.append(BenchRow(name, g, float(np.mean(errs)),
                                 float(np.mean(times)), 1, config.seed))
    return rows


def bench_sgd(config: ExperimentConfig,
              sweep: tuple[float, ...] = (0.5, 1.0, 2.0),
              max_passes: int = 20) -> list[BenchRow]:
    """SGD step-size sweep against the one-pass inductive estimator, plus
    the pass count SGD needs to reach the inductive error (0 = never
    within max_passes).

    The pass count comes from one continued multi-pass run, reading the
    reference error at pass boundaries off the trace.
    """
    mean = origin(config.n, config.p)
    ref = estimators._ReferenceError(mean)

    def one_trial(t: int):
        rng = trial_rng(config.seed, t)
        pts = gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)
        r = estimators.ifme(pts)
        target = ref(r.estimate)
        out = {"ifme": (target, r.wall_time, 1)}
        for a in sweep:
            cfg = estimators.SgdConfig(step_a=a, step_b=config.sgd_b,
                                       passes=1, shuffle_seed=config.seed ^ t)
            s = estimators.sgd_fm(pts, cfg, init=pts[0])
            out[f"sgd[a={a:g}]"] = (ref(s.estimate), s.wall_time, 1)
        cfg = estimators.SgdConfig(step_a=config.sgd_a, step_b=config.sgd_b,
                                   passes=max_passes, shuffle_seed=config.seed ^ t)
        s = estimators.sgd_fm(pts, cfg, init=pts[0], reference=mean)
        n_visited = len(s.trace) // max_passes  # = n_samples unless skips occurred
        pass_errors = [s.trace[(i + 1) * n_visited - 1].error_to_reference
                       for i in range(max_passes)]
        matched = next((i + 1 for i, e in enumerate(pass_errors) if e <= target), 0)
        out["sgd-to-match"] = (pass_errors[-1], s.wall_time, matched)
        return out

    results = _map_trials(one_trial, config.trials, config.threads)
    rows = []
    for name in results[0]:
        errs = [r[name][0] for r in results]
        times = [r[name][1] for r in results]
        passes = int(round(np.mean([r[name][2] for r in results])))
        rows.append(BenchRow(name, config.n_samples, float(np.mean(errs)),
                             float(np.mean(times)), passes, config.seed))
    return rows


def time_to_tolerance(rows: list[BenchRow], tolerance: float) -> list[BenchRow]:
    """Per estimator, the cheapest benchmark row whose mean error is below
    the tolerance (empty if none reaches it)."""
    out = []
    for name in dict.fromkeys(r.estimator for r in rows):
        hits = [r for r in rows if r.estimator == name and r.mean_error < tolerance]
        if hits:
            out.append(min(hits, key=lambda r: r.mean_time))
    return out


def _bench_csvs(rows: list[BenchRow], out_dir: Path, stem: str) -> None:
    """Value and timing tables; the value table is byte-deterministic."""
    _write_csv(out_dir / f"{stem}_error.csv",
               ["estimator", "n_samples", "mean_error", "passes", "seed"],
               [[r.estimator, r.n_samples, "%.17g" % r.mean_error, r.passes, r.seed]
                for r in rows])
    _write_csv(out_dir / f"{stem}_time.csv",
               ["estimator", "n_samples", "mean_time", "passes", "seed"],
               [[r.estimator, r.n_samples, "%.6f" % r.mean_time, r.passes, r.seed]
                for r in rows])


# ---------------------------------------------------------------------------
# subcommand drivers


def run_sample(config: ExperimentConfig, out_dir: Path) -> None:
    rng = trial_rng(config.seed, 0)
    mean = origin(config.n, config.p)
    pts = gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)
    bundle = MatrixBundle(config.n, config.p, [x.matrix for x in pts])
    save_bundle(bundle, out_dir / "samples.bundle")


def _input_points(config: ExperimentConfig) -> list[StiefelPoint]:
    if config.bundle is not None:
        return load_bundle(config.bundle).points()
    rng = trial_rng(config.seed, 0)
    mean = origin(config.n, config.p)
    return gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)


def run_fm(config: ExperimentConfig, out_dir: Path) -> None:
    pts = _input_points(config)
    if config.estimator == "batch":
        r = estimators.batch_fm(pts, init=pts[0], tol=1e-6, max_iter=200)
    elif config.estimator == "sgd":
        cfg = estimators.SgdConfig(step_a=config.sgd_a, step_b=config.sgd_b,
                                   passes=config.passes, shuffle_seed=config.seed)
        r = estimators.sgd_fm(pts, cfg, init=pts[0])
    else:
        r = estimators.ifme(pts)
    save_bundle(MatrixBundle(pts[0].n, pts[0].p, [r.estimate.matrix]),
                out_dir / "fm_estimate.bundle")
    _write_csv(out_dir / "fm_summary.csv",
               ["estimator", "steps", "skipped", "converged", "wall_time"],
               [[config.estimator, r.steps, r.skipped, r.converged, "%.6f" % r.wall_time]])


def run_bench(config: ExperimentConfig, out_dir: Path) -> None:
    rows = bench_fm(config)
    _bench_csvs(rows, out_dir, "bench")
    _bench_csvs(time_to_tolerance(rows, config.tolerance), out_dir, "bench_tolerance")
    inc = replace(config, trials=min(config.trials, 3))
    _bench_csvs(bench_incremental(inc), out_dir, "bench_incremental")
    sgd_cfg = replace(config, n_samples=min(config.n_samples, 100),
                      trials=min(config.trials, 5), sigma=0.05)
    _bench_csvs(bench_sgd(sgd_cfg), out_dir, "bench_sgd")


def run_gof(config: ExperimentConfig, out_dir: Path) -> None:
    rng = trial_rng(config.seed, 0)
    mean = origin(config.n, config.p)
    pts = gaussian.sample(GaussianParams(mean, config.sigma), config.n_samples, rng)
    mats = np.stack([x.matrix for x in pts])
    d = gaussian.origin_chart_distances(mats, config.p)
    report = gaussian.gof_halfnormal(d, sigma=config.sigma)
    _write_csv(out_dir / "gof.csv",
               ["statistic", "dof", "p_value", "sigma", "sigma_fitted", "n_samples"],
               [["%.17g" % report.statistic, report.dof, "%.17g" % report.p_value,
                 "%.17g" % report.sigma, report.sigma_fitted, config.n_samples]])


def run_pga(config: ExperimentConfig, out_dir: Path) -> None:
    if config.bundle is not None:
        pts = load_bundle(config.bundle).points()
    else:
        pts = geodesic_line_points(config.n, config.p, config.n_samples,
                                   trial_rng(config.seed, 0))
    model = mstats.pga_fit(pts, k=config.components)
    total = float(model.explained_variance.sum())
    _write_csv(out_dir / "pga_spectrum.csv",
               ["component", "variance", "share"],
               [[i, "%.17g" % v, "%.17g" % (v / total if total else 0.0)]
                for i, v in enumerate(model.explained_variance, start=1)])
    errs = [stiefel.distance(x, mstats.pga_reconstruct(model, x)) for x in pts]
    _write_csv(out_dir / "pga_reconstruction.csv",
               ["record", "error"],
               [[i, "%.17g" % e] for i, e in enumerate(errs)])


def label_accuracy(labels, truth, k: int) -> float:
    """Best assignment accuracy over label permutations (k is small)."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    return max(float(np.mean(np.array(pm)[labels] == truth))
               for pm in permutations(range(k)))


def run_kmeans(config: ExperimentConfig, out_dir: Path) -> None:
    rng = trial_rng(config.seed, 0)
    if config.bundle is not None:
        bundle = load_bundle(config.bundle)
        pts = bundle.points()
        truth = bundle.labels
    else:
        per = max(config.n_samples // config.clusters, 2)
        pts, truth = cluster_points(config.n, config.p, config.clusters, per,
                                    config.sigma, rng)
    product = [mstats.ProductPoint(x) for x in pts]
    result = mstats.kmeans(product, config.clusters, rng)
    rows = [[i, int(l)] + ([int(truth[i])] if truth is not None else [])
            for i, l in enumerate(result.labels)]
    header = ["record", "label"] + (["truth"] if truth is not None else [])
    _write_csv(out_dir / "kmeans_labels.csv", header, rows)
    summary = [["inertia", "%.17g" % result.inertia], ["iterations", result.n_iter]]
    if truth is not None:
        summary.append(["accuracy",
                        "%.17g" % label_accuracy(result.labels, truth, config.clusters)])
    _write_csv(out_dir / "kmeans_summary.csv", ["key", "value"], summary)


def run_arma(config: ExperimentConfig, out_dir: Path) -> None:
    rng = trial_rng(config.seed, 0)
    if config.bundle is not None:
        features = load_bundle(config.bundle).payload[0]
        model = mstats.arma_decompose(features, config.state_dim)
        rows = [["spectral_radius", "%.17g" % model.spectral_radius]]
    else:
        a, c = arma_system(config.n, config.state_dim, rng)
        features = arma_features(a, c, config.horizon, rng)
        model = mstats.arma_decompose(features, config.state_dim)
        span_err = grassmann.principal_angle_distance(model.c, StiefelPoint(c))
        eig_err = float(np.max(np.abs(np.sort_complex(np.linalg.eigvals(model.a))
                                      - np.sort_complex(np.linalg.eigvals(a)))))
        rows = [["span_error", "%.17g" % span_err],
                ["eigenvalue_error", "%.17g" % eig_err],
                ["spectral_radius", "%.17g" % model.spectral_radius]]
    _write_csv(out_dir / "arma.csv", ["key", "value"], rows)


# ---------------------------------------------------------------------------
# CLI

_COMMANDS = {
    "sample": run_sample,
    "fm": run_fm,
    "bench": run_bench,
    "gof": run_gof,
    "pga": run_pga,
    "kmeans": run_kmeans,
    "arma": run_arma,
}

_DEFAULTS = {
    "sample": {"n_samples": 100},
    "fm": {"n_samples": 100},
    "bench": {"trials": 100},
    "gof": {"n": 2, "p": 1, "sigma": 0.3, "n_samples": 10000},
    "pga": {"n": 10, "p": 3, "n_samples": 200},
    "kmeans": {"sigma": 0.05, "n_samples": 90},
    "arma": {"n": 10},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve
        self.print_usage(sys.stderr)  # that for numerical failures
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stiefelstats",
                     description="Seeded Stiefel-manifold statistics experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, default=None,
                       help="base RNG seed (trial i uses seed XOR i)")
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        raw = dict(_DEFAULTS.get(args.command, {}))
        if args.config is not None:
            raw.update(load_config(args.config))
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.trials is not None:
            raw["trials"] = args.trials
        if args.threads is not None:
            raw["threads"] = args.threads
        if "seed" not in raw:
            sys.stderr.write("error: --seed is required (or a seed in the config)\n")
            return 1
        config = ExperimentConfig(**raw)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](config, out_dir)
        return 0
    except (BundleFormatError, InvalidMatrix, InsufficientData,
            FileNotFoundError, json.JSONDecodeError, TypeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except StiefelStatsError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
