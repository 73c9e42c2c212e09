"""Command-line surface for batch use of the pipeline.

Subcommands: simulate, fpca, density, smbp, experiment.  Configs are flat
``key = value`` text files; every run writes its outputs atomically under
--out together with a manifest.json listing each output file with a content
hash, so reruns can be verified byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time

from . import __version__
from .density import EPANECHNIKOV, GAUSSIAN, DensityEstimator, KernelSpec, kde_evaluate_many, resolve_bandwidth
from .experiments import ExperimentConfig, run_experiment, write_ape_csv, write_table1_csv, write_table2_csv
from .fpca import fit_fpca, scores, select_dimension_fev, write_eigensystem_csv
from .grids import FunctionalSample, read_sample_csv, write_sample_csv
from .processes import (
    DISTRIBUTIONS,
    PROCESS_KINDS,
    SINE,
    STD_NORMAL,
    ProcessSpec,
    SeededRng,
    default_grid,
    sample_process,
)
from .smbp import factorize


class CliError(ValueError):
    """User-facing CLI failure with a one-line diagnostic."""


def parse_config_text(text: str) -> dict:
    """Parse flat key=value lines; '#' starts a comment, blank lines are skipped."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def process_spec_from_config(cfg: dict) -> ProcessSpec:
    kind = cfg.get("process", SINE)
    if kind not in PROCESS_KINDS:
        raise CliError(f"unknown process {kind!r}; choose from {PROCESS_KINDS}")
    dist = cfg.get("dist", STD_NORMAL)
    if dist not in DISTRIBUTIONS:
        raise CliError(f"unknown dist {dist!r}; choose from {DISTRIBUTIONS}")
    J = int(cfg.get("J", 50))
    lambdas = tuple(_floats(cfg["lambdas"])) if "lambdas" in cfg else ()
    q = float(cfg.get("q", 2.0))
    try:
        return ProcessSpec(kind=kind, dist=dist, J=J, lambdas=lambdas, q=q)
    except ValueError as exc:
        raise CliError(str(exc)) from None


class OutputWriter:
    """Atomic writes under one output directory, hashed into a manifest."""

    def __init__(self, out_dir: str, subcommand: str, seed, config: dict | None):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.manifest = {
            "subcommand": subcommand,
            "seed": seed,
            "config": config or {},
            "version": __version__,
            "started_unix": time.time(),
            "outputs": {},
        }

    def write(self, name: str, producer) -> str:
        """Produce ``name`` via a temp file + rename; record its SHA-256."""
        final = os.path.join(self.out_dir, name)
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=name + ".", suffix=".tmp")
        os.close(fd)
        try:
            producer(tmp)
            os.replace(tmp, final)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        with open(final, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.manifest["outputs"][name] = digest
        return final

    def finish(self) -> str:
        self.manifest["finished_unix"] = time.time()
        path = os.path.join(self.out_dir, "manifest.json")
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix="manifest.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
        return path


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else (int(cfg["seed"]) if "seed" in cfg else None)
    if seed is None:
        raise CliError("simulate needs a seed: pass --seed or put seed= in the config")
    spec = process_spec_from_config(cfg)
    n = args.n if args.n is not None else int(cfg.get("n", 100))
    sample = sample_process(spec, n, default_grid(spec.kind), SeededRng(seed, 0))
    writer = OutputWriter(args.out, "simulate", seed, cfg)
    writer.write("sample.csv", lambda p: write_sample_csv(sample, p))
    writer.finish()
    return 0


def cmd_fpca(args) -> int:
    sample = read_sample_csv(args.input)
    system = fit_fpca(sample)
    if args.fev is not None:
        d = select_dimension_fev(system.eigenvalues, args.fev)
    elif args.d is not None:
        d = args.d
    else:
        d = min(sample.n, sample.grid.size)
    score_matrix = scores(sample, system, d)
    writer = OutputWriter(args.out, "fpca", None, {"input": args.input, "d": d})

    writer.write("eigensystem.csv", lambda p: write_eigensystem_csv(system, p))
    writer.write(
        "mean.csv",
        lambda p: write_sample_csv(FunctionalSample(system.grid, system.mean[None, :]), p),
    )

    def write_scores(path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(f"score_{j + 1}" for j in range(d)) + "\n")
            for row in score_matrix.entries:
                fh.write(",".join(repr(v) for v in row.tolist()) + "\n")

    writer.write("scores.csv", write_scores)
    writer.finish()
    return 0


def cmd_density(args) -> int:
    sample = read_sample_csv(args.input)
    targets = read_sample_csv(args.targets)
    system = fit_fpca(sample)
    sample_scores = scores(sample, system, args.d)
    h = resolve_bandwidth(sample_scores, args.bandwidth_value or args.bandwidth)
    estimator = DensityEstimator(sample_scores, h, KernelSpec(args.kernel, args.d))
    target_scores = scores(targets, system, args.d).entries
    values = kde_evaluate_many(estimator, target_scores)
    writer = OutputWriter(
        args.out,
        "density",
        None,
        {"input": args.input, "targets": args.targets, "d": args.d, "kernel": args.kernel},
    )

    def write_density(path):
        with open(path, "w", encoding="utf-8") as fh:
            head = ",".join(f"score_{j + 1}" for j in range(args.d))
            fh.write(f"target,{head},f_hat\n")
            for i, (row, val) in enumerate(zip(target_scores, values.tolist())):
                cells = ",".join(repr(v) for v in row.tolist())
                fh.write(f"{i},{cells},{repr(val)}\n")

    writer.write("density.csv", write_density)
    writer.finish()
    return 0


def cmd_smbp(args) -> int:
    sample = read_sample_csv(args.input)
    target_sample = read_sample_csv(args.target)
    if target_sample.n != 1:
        raise CliError("the smbp target CSV must contain exactly one curve")
    x = target_sample.curve(0)
    system = fit_fpca(sample)
    sample_scores = scores(sample, system, args.d)
    h = resolve_bandwidth(sample_scores, args.bandwidth_value or args.bandwidth)
    estimator = DensityEstimator(sample_scores, h, KernelSpec(args.kernel, args.d))
    f_d = float(kde_evaluate_many(estimator, scores(x, system, args.d)[None, :])[0])
    reports = [
        factorize(sample, x, eps, args.d, system, f_d, args.J) for eps in args.eps
    ]
    writer = OutputWriter(
        args.out,
        "smbp",
        None,
        {"input": args.input, "target": args.target, "d": args.d, "J": args.J, "eps": args.eps},
    )

    def write_reports(path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("[" + ",\n".join(r.to_json() for r in reports) + "]\n")

    writer.write("factorization.json", write_reports)
    writer.finish()
    return 0


def cmd_experiment(args) -> int:
    if args.config is None:
        raise CliError("experiment needs --config")
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else (int(cfg["seed"]) if "seed" in cfg else None)
    if seed is None:
        raise CliError("experiment mode requires an explicit seed: pass --seed or seed= in the config")
    spec = process_spec_from_config(cfg)
    if "n" not in cfg:
        raise CliError("experiment config needs n= (one value or a comma list)")
    n_values = _ints(cfg["n"])
    d_values = tuple(_ints(cfg.get("d", "1")))
    reps = args.replications if args.replications is not None else int(cfg.get("reps", 200))
    kernel = args.kernel if args.kernel is not None else cfg.get("kernel", GAUSSIAN)
    bandwidth = args.bandwidth if args.bandwidth is not None else cfg.get("bandwidth", "normal-scale")
    results = []
    for n in n_values:
        config = ExperimentConfig(
            process=spec,
            n=n,
            d_values=d_values,
            replications=reps,
            base_seed=seed,
            kernel_family=kernel,
            bandwidth_rule=bandwidth,
        )
        results.append(run_experiment(config, threads=args.threads))
    writer = OutputWriter(args.out, "experiment", seed, cfg)
    table_name = "table1.csv" if spec.kind == SINE else "table2.csv"
    table_writer = write_table1_csv if spec.kind == SINE else write_table2_csv
    writer.write(table_name, lambda p: table_writer(results, p))
    writer.write("ape.csv", lambda p: write_ape_csv(results, p))
    writer.manifest["config_sha"] = [r.config_sha for r in results]
    writer.finish()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smallball",
        description="Small-ball surrogate intensity pipeline: simulate, FPCA, KDE, factorize, reproduce tables.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base seed for all randomness")
        p.add_argument("--threads", type=int, default=1, help="worker threads (never changes output bytes)")
        p.add_argument("--config", default=None, help="flat key=value config file")

    p = sub.add_parser("simulate", help="draw a seeded sample and write it as CSV")
    common(p)
    p.add_argument("--n", type=int, default=None, help="number of curves (overrides config)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fpca", help="eigendecompose a sample CSV")
    common(p)
    p.add_argument("--input", required=True, help="sample CSV")
    p.add_argument("--d", type=int, default=None, help="number of score columns to export")
    p.add_argument("--fev", type=float, default=None,
                   help="pick d as the smallest level whose explained-variance fraction reaches this threshold")
    p.set_defaults(func=cmd_fpca)

    p = sub.add_parser("density", help="estimate the surrogate density at target curves")
    common(p)
    p.add_argument("--input", required=True, help="sample CSV")
    p.add_argument("--targets", required=True, help="target curves CSV (same grid)")
    p.add_argument("--d", type=int, required=True, help="truncation level")
    p.add_argument("--kernel", default=EPANECHNIKOV, help="kernel family")
    p.add_argument("--bandwidth", default="normal-scale", help="bandwidth rule (normal-scale or rate)")
    p.add_argument("--bandwidth-value", type=float, default=None, help="explicit bandwidth override")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("smbp", help="small-ball factorization report at a target curve")
    common(p)
    p.add_argument("--input", required=True, help="sample CSV")
    p.add_argument("--target", required=True, help="CSV with the single center curve")
    p.add_argument("--eps", type=float, nargs="+", required=True, help="radii to evaluate")
    p.add_argument("--d", type=int, required=True, help="truncation level")
    p.add_argument("--J", type=int, required=True, help="tail cutoff for the correction factor")
    p.add_argument("--kernel", default=EPANECHNIKOV, help="kernel family for f_d")
    p.add_argument("--bandwidth", default="normal-scale", help="bandwidth rule")
    p.add_argument("--bandwidth-value", type=float, default=None, help="explicit bandwidth override")
    p.set_defaults(func=cmd_smbp)

    p = sub.add_parser("experiment", help="run a replicated Monte Carlo study from a config")
    common(p)
    p.add_argument("--replications", type=int, default=None, help="override the config replication count")
    p.add_argument("--kernel", default=None, help="override the config kernel family")
    p.add_argument("--bandwidth", default=None, help="override the config bandwidth rule")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
