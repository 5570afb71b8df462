"""Deterministic report rendering: plain-text reports, CSV tables with
metadata preambles, and the per-run manifest.

Reports never contain timestamps, so identical inputs and seeds reproduce
them byte for byte; the manifest (written alongside) carries the timestamp.
All numeric output uses 12 significant digits.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .analysis import BootstrapSummary, LevelStudyResult, SweepRow
from .assumptions import Finding
from .engine import Cluster, RRBreakdown
from .nulldist import TailAreaEstimate

__all__ = [
    "fmt",
    "file_sha256",
    "write_manifest",
    "render_validate_report",
    "render_rr_report",
    "render_null_report",
    "sweep_csv",
    "bootstrap_csv",
    "study_csv",
]


def fmt(value: object) -> str:
    """Canonical numeric formatting: 12 significant digits for reals."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    if isinstance(value, Fraction):
        return format(float(value), ".12g")
    return str(value)


def exact_str(value: Fraction | int | None) -> str:
    if value is None:
        return "-"
    if isinstance(value, int):
        return str(value)
    return f"{value.numerator}/{value.denominator}"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(
    out_dir: str | Path,
    command: str,
    inputs: Mapping[str, str | Path],
    lock_digest: str | None,
    seed: int | None,
    extra: Mapping[str, object] | None = None,
) -> Path:
    """Write manifest.json next to the reports; carries the only timestamp."""
    payload: dict[str, object] = {
        "command": command,
        "inputs": {
            name: {"path": str(p), "sha256": file_sha256(p)} for name, p in inputs.items()
        },
        "lock_digest": lock_digest,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        payload.update(extra)
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def render_validate_report(findings: Sequence[Finding], lock_digest: str | None) -> str:
    lines = ["command: validate"]
    if lock_digest is not None:
        lines.append(f"assumption lock: {lock_digest}")
    lines.append(f"findings: {len(findings)}")
    for f in findings:
        lines.append(f"  [{f.severity}] {f.code}: {f.message}")
    lines.append("status: " + ("ok" if not any(f.severity == "fatal" for f in findings) else "fatal"))
    return "\n".join(lines) + "\n"


def _chain_str(cluster: Cluster, idx: int) -> str:
    insc = cluster.inscriptions[idx]
    names = "|".join(s.rendition_id for s in insc.slots)
    genders = " ".join(s.gender for s in insc.slots)
    return f"[{names}] ({genders})"


def render_rr_report(
    cluster: Cluster,
    breakdown: RRBreakdown,
    lumped: int,
    lock_digest: str,
    onom_digest: str,
) -> str:
    lines = [
        "command: rr",
        f"cluster: {cluster.cluster_id}",
        f"onomasticon sha256: {onom_digest}",
        f"assumption lock: {lock_digest}",
        f"disqualified: {fmt(breakdown.disqualified)}",
        f"cluster rr product: {fmt(breakdown.product)}"
        + (f" (exact {exact_str(breakdown.product_exact)})" if not breakdown.disqualified else ""),
        f"lumped statistic: {lumped}",
        "inscriptions:",
        "  idx  chain  factor  exact  assignment  neutralized",
    ]
    for i in range(len(cluster.inscriptions)):
        factor = breakdown.factors[i]
        lines.append(
            "  "
            + "  ".join(
                [
                    str(i),
                    _chain_str(cluster, i),
                    fmt(float(factor)),
                    exact_str(factor),
                    breakdown.assignment[i] or "-",
                    "yes" if i in breakdown.neutralized else "no",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _histogram_lines(est: TailAreaEstimate) -> list[str]:
    axis = "log10 rr" if est.statistic == "rr" else "lumped count"
    lines = [f"histogram ({axis}, bin width {fmt(est.bin_width)}):"]
    if not est.histogram:
        lines.append("  (empty)")
    for b, count in est.histogram:
        lo = b * est.bin_width
        hi = (b + 1) * est.bin_width
        lines.append(f"  [{fmt(lo)}, {fmt(hi)})  {count}")
    return lines


def render_null_report(
    cluster: Cluster,
    breakdown: RRBreakdown,
    est: TailAreaEstimate,
    corrections: tuple[float, float],
    tombs: int,
    lock_digest: str,
    onom_digest: str,
) -> str:
    lines = [
        "command: null",
        f"statistic: {est.statistic}",
        f"cluster: {cluster.cluster_id}",
        f"onomasticon sha256: {onom_digest}",
        f"assumption lock: {lock_digest}",
        f"seed: {est.seed if est.seed is not None else '-'}",
        f"n_sims: {est.n_sims}",
        f"observed: {fmt(est.observed)}"
        + ("" if est.observed_exact is None else f" (exact {exact_str(est.observed_exact)})"),
        f"observed disqualified: {fmt(est.observed_disqualified)}",
        "breakdown:",
    ]
    for i in range(len(cluster.inscriptions)):
        mark = " neutralized" if i in breakdown.neutralized else ""
        assigned = breakdown.assignment[i] or "-"
        lines.append(
            f"  {i}: {_chain_str(cluster, i)} factor {fmt(float(breakdown.factors[i]))}"
            f" assignment {assigned}{mark}"
        )
    lines += [
        f"n_hits: {est.n_hits}",
        f"simulated disqualified: {est.n_simulated_disqualified}",
        f"p_hat: {fmt(est.p_hat)}",
        f"mc_se: {fmt(est.mc_se)}",
        f"bonferroni corrected (T={tombs}): {fmt(corrections[0])}",
        f"exact corrected (T={tombs}): {fmt(corrections[1])}",
    ]
    lines += _histogram_lines(est)
    return "\n".join(lines) + "\n"


def _preamble(meta: Mapping[str, object]) -> list[str]:
    return [f"# {key}: {fmt(value)}" for key, value in meta.items()]


def sweep_csv(rows: Sequence[SweepRow], meta: Mapping[str, object]) -> str:
    lines = _preamble(meta)
    lines.append(
        "variant_id,lock_digest,observed_rr,p_hat,mc_se,bonferroni,exact_corrected,error"
    )
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.variant_id,
                    r.lock_digest or "",
                    fmt(r.observed) if r.observed is not None else "",
                    fmt(r.p_hat) if r.p_hat is not None else "",
                    fmt(r.mc_se) if r.mc_se is not None else "",
                    fmt(r.bonferroni) if r.bonferroni is not None else "",
                    fmt(r.exact_corrected) if r.exact_corrected is not None else "",
                    '"' + r.error.replace('"', "'") + '"' if r.error else "",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def bootstrap_csv(summary: BootstrapSummary, meta: Mapping[str, object]) -> str:
    lines = _preamble(meta)
    lines.append("quantile,p_hat")
    for level, value in summary.quantiles:
        lines.append(f"{fmt(level)},{fmt(value)}")
    return "\n".join(lines) + "\n"


def study_csv(result: LevelStudyResult, kind: str, meta: Mapping[str, object]) -> str:
    lines = _preamble(meta)
    lines.append("kind,alpha,n_clusters,n_sims,rejection_rate")
    lines.append(
        ",".join(
            [
                kind,
                fmt(result.alpha),
                str(result.n_clusters),
                str(result.n_sims),
                fmt(result.rejection_rate),
            ]
        )
    )
    return "\n".join(lines) + "\n"
