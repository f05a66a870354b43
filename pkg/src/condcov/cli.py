"""Command-line interface.

Subcommands: estimate (apply the cross-fit estimator to a CSV), gen
(write a synthetic dataset), and the three studies (doppler-sweep,
holder-sim, diagnose). Exit codes: 0 ok, 2 data error, 3 config error,
4 output-dir collision. Flag precedence for studies: flags > config file
> defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .bandwidths import AdaptiveKnn10, FixedBandwidth, UndersmoothedLpr
from .datagen import HolderFunctionSpec, build_holder_function, gen_doppler_dataset, gen_holder_dataset
from .dataset import DatasetFormatError, read_csv, write_csv
from .estimators import cycle_folds_average, equal_split
from .harness import (
    ConfigError,
    ExperimentConfig,
    run_diagnostics,
    run_doppler_sweep,
    run_holder_inference,
)
from .kernels import build_higher_order_kernel
from .regressors import (
    CenteredForestRegressor,
    DensityAdaptedKernelRegressor,
    KnnRegressor,
    LocalPolynomialRegressor,
)

EXIT_OK = 0
EXIT_DATA = 2
EXIT_CONFIG = 3
EXIT_COLLISION = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _nuisance_from_flags(method: str, args, d: int) -> object:
    if method == "knn":
        return KnnRegressor(k=args.k if args.k else 10)
    if method == "lpr":
        bw = FixedBandwidth(args.bandwidth) if args.bandwidth else AdaptiveKnn10()
        return LocalPolynomialRegressor(bandwidth=bw)
    if method == "cda":
        bw = FixedBandwidth(args.bandwidth) if args.bandwidth else UndersmoothedLpr()
        kern = (
            build_higher_order_kernel(args.kernel_order, d)
            if args.kernel_order and args.kernel_order > 2
            else None
        )
        return DensityAdaptedKernelRegressor(bandwidth=bw, kernel=kern)
    if method == "forest":
        return CenteredForestRegressor(k_n=args.k or 16)
    raise CliError(EXIT_CONFIG, f"unknown nuisance method {method!r}")


def cmd_estimate(args) -> int:
    if not 0.0 < args.alpha < 1.0:
        raise CliError(EXIT_CONFIG, f"alpha must be in (0, 1), got {args.alpha}")
    if args.k is not None and args.k < 1:
        raise CliError(EXIT_CONFIG, f"k must be >= 1, got {args.k}")
    if args.bandwidth is not None and args.bandwidth <= 0:
        raise CliError(EXIT_CONFIG, f"bandwidth must be positive, got {args.bandwidth}")
    try:
        ds = read_csv(args.csv)
    except DatasetFormatError as exc:
        raise CliError(EXIT_DATA, str(exc))
    except OSError as exc:
        raise CliError(EXIT_DATA, f"cannot read {args.csv}: {exc}")
    mu = _nuisance_from_flags(args.mu, args, ds.d)
    pi = _nuisance_from_flags(args.pi, args, ds.d)
    try:
        # seeded permutation split: user CSVs may be sorted by covariate
        split = equal_split(ds.n, seed=args.split_seed)
        est = cycle_folds_average(ds, mu, pi, alpha=args.alpha, split=split)
    except ValueError as exc:
        raise CliError(EXIT_DATA, str(exc))
    payload = est.to_json()
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        if args.dgp == "doppler":
            ds = gen_doppler_dataset(args.n, args.noise_variance, args.seed)
        else:
            spec = HolderFunctionSpec(
                s=args.s, d=args.d, n_ref=args.n_ref or args.n,
                amplitude=args.amplitude, seed=args.seed,
            )
            ds = gen_holder_dataset(spec, args.n, args.noise_variance, args.seed)
            if args.curves_out:
                _write_holder_curves(spec, Path(args.curves_out))
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc))
    write_csv(ds, args.out)
    print(f"wrote {args.n} rows to {args.out} (psi_true={ds.psi_true})")
    return EXIT_OK


def _write_holder_curves(spec: HolderFunctionSpec, path: Path, points: int = 2000) -> None:
    """Sampled function values for the example-function figure (d=1 axis 0)."""
    import csv as _csv

    g = build_holder_function(spec)
    xs = np.linspace(0.0, 1.0, points)
    grid = np.zeros((points, spec.d))
    grid[:, 0] = xs
    vals = g(grid)
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["s", "n_ref", "x", "g"])
        for x, v in zip(xs, vals):
            w.writerow([repr(float(spec.s)), spec.n_ref, repr(float(x)), repr(float(v))])


def _study_config(args, study: str) -> ExperimentConfig:
    file_cfg: Dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise CliError(EXIT_CONFIG, f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_CONFIG, f"malformed config {args.config}: {exc}")
    merged = dict(file_cfg)
    merged["study"] = study
    if args.out is not None:
        merged["output_dir"] = args.out
    if "output_dir" not in merged:
        raise CliError(EXIT_CONFIG, "an output directory is required (--out)")
    for flag, key in [
        ("sims", "n_sims"),
        ("scale", "scale"),
        ("seed", "seed"),
        ("jobs", "jobs"),
        ("alpha", "alpha"),
        ("noise_variance", "noise_variance"),
        ("amplitude", "amplitude"),
    ]:
        val = getattr(args, flag, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "fold_sizes", None):
        merged["fold_sizes"] = tuple(args.fold_sizes)
    if getattr(args, "smoothness", None):
        merged["smoothness_grid"] = tuple(args.smoothness)
    if getattr(args, "dims", None):
        merged["dims"] = tuple(args.dims)
    try:
        return ExperimentConfig.from_json(merged)
    except (ConfigError, TypeError) as exc:
        raise CliError(EXIT_CONFIG, str(exc))


def _check_output_dir(cfg: ExperimentConfig, force: bool) -> None:
    out = Path(cfg.output_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise CliError(
            EXIT_COLLISION,
            f"output directory {out} is not empty; pass --force to overwrite",
        )
    out.mkdir(parents=True, exist_ok=True)


def cmd_study(args, study: str) -> int:
    cfg = _study_config(args, study)
    _check_output_dir(cfg, args.force)
    try:
        if study == "doppler_sweep":
            out = run_doppler_sweep(cfg)
            for fold, name, k in out["optimal_k"]:
                print(f"fold={fold} {name}: optimal k = {k}")
        elif study == "holder_inference":
            records = run_holder_inference(cfg)
            cells = sorted({(r.cell, r.estimator) for r in records})
            for cell, est in cells:
                grp = [r for r in records if r.cell == cell and r.estimator == est]
                cov = float(np.mean([r.covered for r in grp]))
                print(f"{cell} {est}: coverage {cov:.3f} over {len(grp)} sims")
        else:
            summary = run_diagnostics(cfg)
            for name, chk in sorted(summary["checks"].items()):
                print(f"{name}: {'PASS' if chk['pass'] else 'FAIL'}")
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, str(exc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="condcov",
        description="Cross-fit doubly robust estimation of the expected "
        "conditional covariance, plus its Monte Carlo studies.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("estimate", help="estimate the functional from a dataset CSV")
    pe.add_argument("csv", help="dataset CSV with header x1,...,xd,a,y")
    pe.add_argument("--mu", default="knn", choices=["knn", "lpr", "cda", "forest"],
                    help="outcome nuisance method")
    pe.add_argument("--pi", default="knn", choices=["knn", "lpr", "cda", "forest"],
                    help="exposure nuisance method")
    pe.add_argument("--k", type=int, default=None, help="neighbor count (knn/forest)")
    pe.add_argument("--bandwidth", type=float, default=None, help="fixed bandwidth (lpr/cda)")
    pe.add_argument("--kernel-order", type=int, default=None, help="kernel order (cda)")
    pe.add_argument("--alpha", type=float, default=0.05, help="1 - confidence level")
    pe.add_argument("--split-seed", type=int, default=0,
                    help="seed for the fold-assignment permutation")

    pg = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    pg.add_argument("--dgp", default="doppler", choices=["doppler", "holder"])
    pg.add_argument("--n", type=int, required=True, help="number of observations")
    pg.add_argument("--noise-variance", type=float, default=0.1,
                    help="noise variance = true functional value")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--s", type=float, default=0.6, help="smoothness (holder)")
    pg.add_argument("--d", type=int, default=1, help="dimension (holder)")
    pg.add_argument("--n-ref", type=int, default=None,
                    help="calibration size for the bump construction (holder)")
    pg.add_argument("--amplitude", type=float, default=1.0, help="bump amplitude (holder)")
    pg.add_argument("--curves-out", default=None,
                    help="also write sampled function values (s,n_ref,x,g) to this CSV")
    pg.add_argument("--out", required=True, help="output CSV path")

    for study, name, help_text in [
        ("doppler_sweep", "doppler-sweep", "optimal-k sweep on the Doppler design"),
        ("holder_inference", "holder-sim", "coverage/QQ study on smooth designs"),
        ("diagnostics", "diagnose", "structural-condition diagnostics"),
    ]:
        ps = sub.add_parser(name, help=help_text)
        ps.add_argument("--config", default=None, help="JSON config file")
        ps.add_argument("--out", default=None, help="output directory")
        ps.add_argument("--sims", type=int, default=None, help="simulations per cell")
        ps.add_argument("--scale", type=float, default=None,
                        help="multiplier on the default simulation count")
        ps.add_argument("--seed", type=int, default=None, help="master seed")
        ps.add_argument("--jobs", type=int, default=None, help="worker processes")
        ps.add_argument("--alpha", type=float, default=None)
        ps.add_argument("--noise-variance", dest="noise_variance", type=float, default=None)
        ps.add_argument("--force", action="store_true",
                        help="allow writing into a non-empty output directory")
        if study == "holder_inference":
            ps.add_argument("--fold-sizes", dest="fold_sizes", type=int, nargs="+", default=None)
            ps.add_argument("--smoothness", type=float, nargs="+", default=None)
            ps.add_argument("--dims", type=int, nargs="+", default=None)
            ps.add_argument("--amplitude", type=float, default=None)
        if study == "doppler_sweep":
            ps.add_argument("--fold-sizes", dest="fold_sizes", type=int, nargs="+", default=None)
        ps.set_defaults(study=study)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "gen":
            return cmd_gen(args)
        return cmd_study(args, args.study)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
