"""Command-line front end.

Subcommands::

    superfid sample    --measure {hs,bures,g} --dim N --count K [--seed S]
                       [--workers W] [--format {csv,json}] [--out PATH]
                       [--full-matrix] [--max-proposals M]
    superfid estimate  --dim N --method {exact,jensen,series,mc,quadrature}
                       [--samples S] [--k-max K] [--seed S] [--format/--out]
    superfid grid      --measure {g,bures} --resolution R [--dim 3] [--out PATH]
    superfid verify    {metric,density,sampler,purity,all} [--seed S] [--scale X]

The master seed falls back to the SUPERFID_SEED environment variable, then 0.
Outputs carry no timestamps and format floats via ``repr``, so a fixed
(command line, seed, workers) triple reproduces byte-identical bytes.
Exit codes: 0 success, 1 verification failure, 2 usage error, 3 sampling
budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import eigendensities as ed
from . import samplers as sm
from . import verify as vf
from .errors import SamplingBudgetError, UnsupportedDimensionError
from .qstate import Measure
from .rng import RngStream, seed_from_env

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation parameters for one CLI command."""

    command: str
    measure: Measure = Measure.HILBERT_SCHMIDT
    dim: int = 2
    count: int = 1
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    full_matrix: bool = False
    resolution: int = 400
    method: str = "exact"
    samples: int = 100_000
    k_max: int = 20
    suite: str = "all"
    max_proposals: int = sm.DEFAULT_MAX_PROPOSALS
    scale: float = 1.0
    verify_dim: int | None = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.verify_dim is not None and self.verify_dim < 2:
            raise ValueError("dim must be >= 2")


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _chunk_sizes(count: int, workers: int) -> list[int]:
    base, rem = divmod(count, workers)
    return [base + (1 if w < rem else 0) for w in range(workers)]


def _sample_chunk(args):
    measure, dim, chunk, seed, worker, max_proposals, keep = args
    if chunk == 0:
        return None
    batch, mats, report = sm.sample_batch(measure, dim, chunk, RngStream(seed, worker),
                                          max_proposals=max_proposals, keep_matrices=keep)
    return batch.eigen_records, batch.purity_records, mats, report


def cmd_sample(cfg: RunConfig) -> int:
    jobs = [(cfg.measure, cfg.dim, chunk, cfg.seed, w, cfg.max_proposals, cfg.full_matrix)
            for w, chunk in enumerate(_chunk_sizes(cfg.count, cfg.workers))]
    try:
        if cfg.workers == 1:
            results = [_sample_chunk(jobs[0])]
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(_sample_chunk, jobs))
    except SamplingBudgetError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BUDGET
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE

    results = [r for r in results if r is not None]
    eigs = np.concatenate([r[0] for r in results])
    purity = np.concatenate([r[1] for r in results])
    mats = np.concatenate([r[2] for r in results]) if cfg.full_matrix else None
    reports = [r[3] for r in results if r[3] is not None]
    report = None
    if reports:
        report = reports[0]
        for extra in reports[1:]:
            report = report.merged(extra)

    if cfg.format == "csv":
        text = _sample_csv(cfg, eigs, purity, mats, report)
    else:
        text = _sample_json(cfg, eigs, purity, mats, report)
    _emit(text, cfg.out)
    return EXIT_OK


def _report_dict(report):
    return {
        "proposed": report.proposed,
        "accepted": report.accepted,
        "bound_constant": report.bound_constant,
        "empirical_rate": report.empirical_rate,
    }


def _sample_csv(cfg, eigs, purity, mats, report) -> str:
    lines = [
        f"# superfid sample schema_version={SCHEMA_VERSION}",
        f"# measure={cfg.measure.value} dim={cfg.dim} count={cfg.count} "
        f"seed={cfg.seed} workers={cfg.workers}",
    ]
    if report is not None:
        lines.append(f"# rejection proposed={report.proposed} accepted={report.accepted} "
                     f"bound_constant={_fmt(report.bound_constant)} "
                     f"empirical_rate={_fmt(report.empirical_rate)}")
    header = [f"lambda_{k + 1}" for k in range(cfg.dim)] + ["purity"]
    if mats is not None:
        for i in range(cfg.dim):
            for j in range(cfg.dim):
                header += [f"rho_{i}_{j}_re", f"rho_{i}_{j}_im"]
    lines.append(",".join(header))
    for idx in range(len(purity)):
        row = [_fmt(v) for v in eigs[idx]] + [_fmt(purity[idx])]
        if mats is not None:
            flat = mats[idx].reshape(-1)
            for z in flat:
                row += [_fmt(z.real), _fmt(z.imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _sample_json(cfg, eigs, purity, mats, report) -> str:
    records = []
    for idx in range(len(purity)):
        rec = {"eigenvalues": [float(v) for v in eigs[idx]], "purity": float(purity[idx])}
        if mats is not None:
            flat = mats[idx].reshape(-1)
            rec["matrix_re_im"] = [[float(z.real), float(z.imag)] for z in flat]
        records.append(rec)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "sample",
        "measure": cfg.measure.value,
        "dim": cfg.dim,
        "count": cfg.count,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "rejection": _report_dict(report) if report is not None else None,
        "records": records,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def cmd_estimate(cfg: RunConfig) -> int:
    rng = RngStream(cfg.seed)
    try:
        if cfg.method == "exact":
            est = ed.c_g_exact(cfg.dim)
        elif cfg.method == "jensen":
            est = ed.c_g_jensen_bound(cfg.dim)
        elif cfg.method == "series":
            est = ed.c_g_series(cfg.dim, cfg.k_max, rng, samples=cfg.samples)
        elif cfg.method == "mc":
            est = ed.c_g_monte_carlo(cfg.dim, cfg.samples, rng)
        elif cfg.method == "quadrature":
            est = ed.c_g_quadrature(cfg.dim)
        else:
            sys.stderr.write(f"error: unknown method {cfg.method!r}\n")
            return EXIT_USAGE
    except (UnsupportedDimensionError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE

    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "estimate",
        "dim": est.dim,
        "method": est.method,
        "value": est.value,
        "std_error": est.std_error,
        "terms_or_samples": est.terms_or_samples,
        "seed": cfg.seed,
    }
    if est.method == "jensen-upper-bound":
        doc["kind"] = "upper_bound"
    if est.truncation_last_term is not None:
        doc["truncation_last_term"] = est.truncation_last_term
    _emit(json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n", cfg.out)
    return EXIT_OK


def cmd_grid(cfg: RunConfig) -> int:
    if cfg.dim != 3:
        sys.stderr.write("error: density grids are defined for --dim 3\n")
        return EXIT_USAGE
    if cfg.measure is Measure.HILBERT_SCHMIDT:
        sys.stderr.write("error: grid supports --measure g or bures\n")
        return EXIT_USAGE
    try:
        grid = ed.density_grid_qutrit(cfg.resolution, cfg.measure)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    lines = [
        f"# superfid grid schema_version={SCHEMA_VERSION}",
        f"# measure={cfg.measure.value} dim=3 resolution={cfg.resolution}",
        "lambda_1,lambda_2,density",
    ]
    for l1, l2, d in zip(grid.lambda1, grid.lambda2, grid.density):
        lines.append(f"{_fmt(l1)},{_fmt(l2)},{_fmt(d) if np.isfinite(d) else 'nan'}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = vf.run_suite(cfg.suite, cfg.seed, cfg.scale, dim=cfg.verify_dim)
    failures = [r for r in results if not r.passed]
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.suite}/{r.name}: {r.detail}")
    lines.append(f"{len(results) - len(failures)}/{len(results)} checks passed"
                 + (f"; failures: {', '.join(r.name for r in failures)}" if failures else ""))
    human = "\n".join(lines) + "\n"
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "suite": cfg.suite,
        "seed": cfg.seed,
        "checks": [{"suite": r.suite, "name": r.name, "passed": r.passed,
                    "detail": r.detail} for r in results],
        "passed": not failures,
    }
    doc_json = json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n"
    if cfg.out is not None:
        # human summary on stdout, machine-readable report to the file
        _emit(doc_json, cfg.out)
        sys.stdout.write(human)
    elif cfg.format == "json":
        sys.stdout.write(doc_json)
    else:
        sys.stdout.write(human)
    return EXIT_OK if not failures else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superfid",
                                     description="Random density matrices under the "
                                                 "superfidelity-induced measure.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: SUPERFID_SEED env var, else 0)")
        p.add_argument("--out", type=str, default=None, help="output path (default stdout)")

    p = sub.add_parser("sample", help="draw random states and write eigenvalues/purity")
    p.add_argument("--measure", choices=[m.value for m in Measure], required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--full-matrix", action="store_true",
                   help="also emit row-major re,im matrix entries")
    p.add_argument("--max-proposals", type=int, default=sm.DEFAULT_MAX_PROPOSALS,
                   help="rejection budget per accepted sample (superfidelity, dim >= 3)")
    common(p)

    p = sub.add_parser("estimate", help="estimate the superfidelity normalization constant")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--method", choices=["exact", "jensen", "series", "mc", "quadrature"],
                   required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--k-max", type=int, default=20)
    common(p)

    p = sub.add_parser("grid", help="emit a qutrit eigenvalue-density grid as CSV")
    p.add_argument("--measure", choices=[m.value for m in Measure], default="g")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--resolution", type=int, default=400)
    common(p)

    p = sub.add_parser("verify", help="run a built-in verification suite")
    p.add_argument("suite", choices=list(vf.SUITE_NAMES))
    p.add_argument("--dim", type=int, default=None,
                   help="restrict the purity suite to one dimension")
    p.add_argument("--scale", type=float, default=1.0,
                   help="sample-size multiplier for the checks")
    p.add_argument("--format", choices=["text", "json"], default="text")
    common(p)
    return parser


def _config_from_args(args) -> RunConfig:
    seed = args.seed if args.seed is not None else seed_from_env()
    fields = {"command": args.command, "seed": seed, "out": args.out}
    if args.command == "sample":
        fields.update(measure=Measure(args.measure), dim=args.dim, count=args.count,
                      workers=args.workers, format=args.format,
                      full_matrix=args.full_matrix, max_proposals=args.max_proposals)
    elif args.command == "estimate":
        fields.update(dim=args.dim, method=args.method, samples=args.samples,
                      k_max=args.k_max, format="json")
    elif args.command == "grid":
        fields.update(measure=Measure(args.measure), dim=args.dim,
                      resolution=args.resolution)
    elif args.command == "verify":
        fields.update(suite=args.suite, scale=args.scale, format=args.format,
                      verify_dim=args.dim)
    return RunConfig(**fields)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    handler = {
        "sample": cmd_sample,
        "estimate": cmd_estimate,
        "grid": cmd_grid,
        "verify": cmd_verify,
    }[cfg.command]
    return handler(cfg)


if __name__ == "__main__":
    sys.exit(main())
