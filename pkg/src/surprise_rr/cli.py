"""Command-line entry point wiring files to operations.

Commands: validate | lock | rr | null | sweep | bootstrap | level | power.
Exit codes: 0 success, 2 validation failure (report still written), 1 I/O or
format error, 64 unknown command/flag. Reports are plain deterministic files;
the manifest written alongside carries the only timestamp.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import (
    bootstrap_variability,
    level_study,
    power_study,
    read_alternative_yaml,
    read_variants_yaml,
    scenario_sweep,
)
from .assumptions import (
    lock_hash,
    read_assumptions_yaml,
    read_lockfile,
    validate,
    write_lockfile,
)
from .engine import cluster_rr, lumped_statistic, read_cluster_yaml
from .errors import SurpriseRRError
from .nulldist import (
    estimate_tail_area,
    extract_configuration,
    tomb_correction,
)
from .onomasticon import read_onomasticon_csv
from .reports import (
    bootstrap_csv,
    file_sha256,
    fmt,
    render_null_report,
    render_rr_report,
    render_validate_report,
    study_csv,
    sweep_csv,
    write_manifest,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_USAGE = 64

THREADS_ENV = "SURPRISE_RR_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(parser: argparse.ArgumentParser, *, cluster: bool) -> None:
    parser.add_argument("--onomasticon", required=True, help="lexicon CSV path")
    parser.add_argument("--assumptions", required=True, help="assumption YAML path")
    if cluster:
        parser.add_argument("--cluster", required=True, help="cluster YAML path")
    parser.add_argument("--lockfile", help="refuse to run if this lockfile's digest mismatches")
    parser.add_argument("--seed", type=int, default=0, help="root RNG seed (default 0)")
    parser.add_argument("--sims", type=int, help="simulation count (overrides the file's mc_sims)")
    parser.add_argument("--tombs", type=int, help="tombsite count for corrections (overrides file)")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker pool size (default: {THREADS_ENV} or machine parallelism)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> _Parser:
    parser = _Parser(prog="surprise-rr", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", help="check assumptions against the lexicon")
    _add_common(p, cluster=False)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("lock", help="write the assumption lockfile")
    p.add_argument("--assumptions", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_lock)

    p = sub.add_parser("rr", help="observed cluster breakdown")
    _add_common(p, cluster=True)
    p.set_defaults(func=_cmd_rr)

    p = sub.add_parser("null", help="Monte Carlo tail area of the observed statistic")
    _add_common(p, cluster=True)
    p.add_argument("--stat", choices=("rr", "lumped"), default="rr")
    p.set_defaults(func=_cmd_null)

    p = sub.add_parser("sweep", help="assumption scenario sweep")
    _add_common(p, cluster=True)
    p.add_argument("--variants", required=True, help="variant YAML path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bootstrap", help="lexicon-bootstrap variability of p_hat")
    _add_common(p, cluster=True)
    p.add_argument("--replicates", type=int, default=200)
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("level", help="empirical level of the test on null clusters")
    _add_common(p, cluster=True)
    p.add_argument("--stat", choices=("rr", "lumped"), default="rr")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--draws", type=int, default=500, help="number of null clusters")
    p.set_defaults(func=_cmd_level)

    p = sub.add_parser("power", help="empirical power under a planted alternative")
    _add_common(p, cluster=True)
    p.add_argument("--stat", choices=("rr", "lumped"), default="rr")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--draws", type=int, default=500, help="number of alternative clusters")
    p.add_argument("--alternative", required=True, help="planted alternative YAML path")
    p.set_defaults(func=_cmd_power)

    return parser


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(args) -> int:
    return args.threads if args.threads and args.threads >= 1 else _default_threads()


def _check_lockfile(args, digest: str, out: Path, command: str, inputs) -> bool:
    """Returns True when a provided lockfile digest mismatches (exit 2 path)."""
    if not getattr(args, "lockfile", None):
        return False
    want, name = read_lockfile(args.lockfile)
    if want == digest:
        return False
    report = (
        f"command: {command}\n"
        f"status: refused\n"
        f"lockfile digest: {want}  ({name})\n"
        f"assumptions digest: {digest}\n"
    )
    (out / "report.txt").write_text(report, encoding="utf-8")
    write_manifest(out, command, inputs, digest, getattr(args, "seed", None))
    print("error: assumption lockfile digest mismatch", file=sys.stderr)
    return True


def _load_validated(args, out: Path, command: str, *, need_cluster: bool):
    """Load inputs, enforce the lockfile, and validate; None signals exit 2."""
    onom = read_onomasticon_csv(args.onomasticon)
    aset = read_assumptions_yaml(args.assumptions)
    digest = lock_hash(aset)
    inputs = {"onomasticon": args.onomasticon, "assumptions": args.assumptions}
    if need_cluster:
        inputs["cluster"] = args.cluster
    if _check_lockfile(args, digest, out, command, inputs):
        return None
    report = validate(aset, onom)
    if not report.ok:
        (out / "report.txt").write_text(
            render_validate_report(report.findings, digest), encoding="utf-8"
        )
        write_manifest(out, command, inputs, digest, getattr(args, "seed", None))
        print(
            f"error: assumption validation failed ({len(report.fatal)} fatal findings); "
            f"see {out / 'report.txt'}",
            file=sys.stderr,
        )
        return None
    cluster = read_cluster_yaml(args.cluster) if need_cluster else None
    return onom, aset, digest, report.onomasticon, cluster, inputs


def _cmd_validate(args) -> int:
    out = _out_dir(args)
    onom = read_onomasticon_csv(args.onomasticon)
    aset = read_assumptions_yaml(args.assumptions)
    digest = lock_hash(aset)
    inputs = {"onomasticon": args.onomasticon, "assumptions": args.assumptions}
    if _check_lockfile(args, digest, out, "validate", inputs):
        return EXIT_VALIDATION
    report = validate(aset, onom)
    (out / "report.txt").write_text(
        render_validate_report(report.findings, digest), encoding="utf-8"
    )
    write_manifest(out, "validate", inputs, digest, None)
    _say(args, f"findings: {len(report.findings)} ({len(report.fatal)} fatal)")
    _say(args, f"wrote {out / 'report.txt'}")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _cmd_lock(args) -> int:
    out = _out_dir(args)
    aset = read_assumptions_yaml(args.assumptions)
    digest = write_lockfile(out / "assumptions.lock", aset, Path(args.assumptions).name)
    write_manifest(out, "lock", {"assumptions": args.assumptions}, digest, None)
    print(f"{digest}  {Path(args.assumptions).name}")
    return EXIT_OK


def _cmd_rr(args) -> int:
    out = _out_dir(args)
    loaded = _load_validated(args, out, "rr", need_cluster=True)
    if loaded is None:
        return EXIT_VALIDATION
    _, aset, digest, onom_eff, cluster, inputs = loaded
    breakdown = cluster_rr(cluster, aset, onom_eff)
    lumped = lumped_statistic(cluster, aset, onom_eff)
    text = render_rr_report(
        cluster, breakdown, lumped, digest, file_sha256(args.onomasticon)
    )
    (out / "report.txt").write_text(text, encoding="utf-8")
    write_manifest(out, "rr", inputs, digest, None)
    _say(args, f"cluster rr product: {fmt(breakdown.product)}")
    _say(args, f"wrote {out / 'report.txt'}")
    return EXIT_OK


def _cmd_null(args) -> int:
    out = _out_dir(args)
    loaded = _load_validated(args, out, "null", need_cluster=True)
    if loaded is None:
        return EXIT_VALIDATION
    _, aset, digest, onom_eff, cluster, inputs = loaded
    n_sims = args.sims if args.sims is not None else aset.mc_sims
    _say(args, f"simulating {n_sims} null clusters ({args.stat})")
    est = estimate_tail_area(
        cluster,
        aset,
        onom_eff,
        statistic=args.stat,
        n_sims=n_sims,
        seed=args.seed,
        threads=_threads(args),
    )
    breakdown = cluster_rr(cluster, aset, onom_eff)
    tombs = args.tombs if args.tombs is not None else aset.tombs_count
    corrections = tomb_correction(est.p_hat, tombs)
    text = render_null_report(
        cluster, breakdown, est, corrections, tombs, digest, file_sha256(args.onomasticon)
    )
    (out / "report.txt").write_text(text, encoding="utf-8")
    write_manifest(
        out, "null", inputs, digest, args.seed,
        extra={"n_sims": est.n_sims, "statistic": est.statistic},
    )
    _say(args, f"p_hat: {fmt(est.p_hat)} (mc_se {fmt(est.mc_se)})")
    _say(args, f"wrote {out / 'report.txt'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    out = _out_dir(args)
    onom = read_onomasticon_csv(args.onomasticon)
    aset = read_assumptions_yaml(args.assumptions)
    digest = lock_hash(aset)
    inputs = {
        "onomasticon": args.onomasticon,
        "assumptions": args.assumptions,
        "cluster": args.cluster,
        "variants": args.variants,
    }
    if _check_lockfile(args, digest, out, "sweep", inputs):
        return EXIT_VALIDATION
    cluster = read_cluster_yaml(args.cluster)
    variants = read_variants_yaml(args.variants)
    _say(args, f"sweeping {len(variants)} variants plus base")
    rows = scenario_sweep(
        aset, variants, cluster, onom,
        n_sims=args.sims, seed=args.seed, threads=_threads(args),
    )
    meta = {
        "command": "sweep",
        "seed": args.seed,
        "base_lock_digest": digest,
        "onomasticon_sha256": file_sha256(args.onomasticon),
    }
    (out / "sweep.csv").write_text(sweep_csv(rows, meta), encoding="utf-8")
    write_manifest(out, "sweep", inputs, digest, args.seed)
    _say(args, f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def _cmd_bootstrap(args) -> int:
    out = _out_dir(args)
    loaded = _load_validated(args, out, "bootstrap", need_cluster=True)
    if loaded is None:
        return EXIT_VALIDATION
    onom, aset, digest, _, cluster, inputs = loaded
    n_sims = args.sims if args.sims is not None else aset.mc_sims
    _say(args, f"bootstrapping {args.replicates} lexicon replicates x {n_sims} sims")
    summary = bootstrap_variability(
        cluster, aset, onom,
        n_replicates=args.replicates, n_sims=n_sims,
        seed=args.seed, threads=_threads(args),
    )
    meta = {
        "command": "bootstrap",
        "seed": args.seed,
        "lock_digest": digest,
        "onomasticon_sha256": file_sha256(args.onomasticon),
        "replicates": args.replicates,
        "n_sims": n_sims,
    }
    (out / "bootstrap.csv").write_text(bootstrap_csv(summary, meta), encoding="utf-8")
    write_manifest(out, "bootstrap", inputs, digest, args.seed)
    _say(args, f"median p_hat: {fmt(summary.quantile(0.5))}")
    _say(args, f"wrote {out / 'bootstrap.csv'}")
    return EXIT_OK


def _cmd_level(args) -> int:
    out = _out_dir(args)
    loaded = _load_validated(args, out, "level", need_cluster=True)
    if loaded is None:
        return EXIT_VALIDATION
    _, aset, digest, onom_eff, cluster, inputs = loaded
    n_sims = args.sims if args.sims is not None else aset.mc_sims
    config = extract_configuration(cluster)
    _say(args, f"level study: {args.draws} null clusters x {n_sims} sims")
    result = level_study(
        aset, config, onom_eff,
        n_clusters=args.draws, n_sims=n_sims, alpha=args.alpha,
        seed=args.seed, statistic=args.stat, threads=_threads(args),
    )
    meta = {
        "command": "level",
        "seed": args.seed,
        "lock_digest": digest,
        "onomasticon_sha256": file_sha256(args.onomasticon),
        "statistic": args.stat,
    }
    (out / "level.csv").write_text(study_csv(result, "level", meta), encoding="utf-8")
    write_manifest(out, "level", inputs, digest, args.seed)
    _say(args, f"rejection rate at alpha={fmt(args.alpha)}: {fmt(result.rejection_rate)}")
    _say(args, f"wrote {out / 'level.csv'}")
    return EXIT_OK


def _cmd_power(args) -> int:
    out = _out_dir(args)
    loaded = _load_validated(args, out, "power", need_cluster=True)
    if loaded is None:
        return EXIT_VALIDATION
    _, aset, digest, onom_eff, cluster, inputs = loaded
    inputs["alternative"] = args.alternative
    alt = read_alternative_yaml(args.alternative)
    n_sims = args.sims if args.sims is not None else aset.mc_sims
    config = extract_configuration(cluster)
    _say(args, f"power study: {args.draws} alternative clusters x {n_sims} sims")
    result = power_study(
        aset, alt, config, onom_eff,
        n_clusters=args.draws, n_sims=n_sims, alpha=args.alpha,
        seed=args.seed, statistic=args.stat, threads=_threads(args),
    )
    meta = {
        "command": "power",
        "seed": args.seed,
        "lock_digest": digest,
        "onomasticon_sha256": file_sha256(args.onomasticon),
        "statistic": args.stat,
    }
    (out / "power.csv").write_text(study_csv(result, "power", meta), encoding="utf-8")
    write_manifest(out, "power", inputs, digest, args.seed)
    _say(args, f"power at alpha={fmt(args.alpha)}: {fmt(result.rejection_rate)}")
    _say(args, f"wrote {out / 'power.csv'}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SurpriseRRError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
