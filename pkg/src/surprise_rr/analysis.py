"""Sensitivity and study layer: assumption scenario sweeps, lexicon-bootstrap
variability of p-values, and level/power studies contrasting the RR statistic
with the lumped comparison statistic.

Every row/replicate/draw owns an independent substream keyed by a stable
identifier (never loop order), so adding a variant or reordering inputs never
perturbs other results and parallel runs equal sequential ones bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from .assumptions import (
    AssumptionSet,
    Candidate,
    SlotSpec,
    lock_hash,
    parse_candidate,
    tiers_to_ratings,
    validate,
)
from .engine import Cluster, cluster_rr, lumped_statistic
from .errors import AssumptionError, SurpriseRRError
from .nulldist import (
    ClusterConfiguration,
    TailAreaEstimate,
    _compile,
    _draw_cells,
    _eval_row_lumped,
    _eval_row_rr,
    _simulate,
    estimate_tail_area,
    tomb_correction,
)
from .onomasticon import Onomasticon, bootstrap_resample, normalize_token

__all__ = [
    "ScenarioVariant",
    "SweepRow",
    "AlternativeSpec",
    "Plant",
    "BootstrapSummary",
    "LevelStudyResult",
    "apply_edits",
    "scenario_sweep",
    "bootstrap_variability",
    "level_study",
    "power_study",
    "read_variants_yaml",
    "read_alternative_yaml",
]

BASE_VARIANT_ID = "base"

QUANTILE_LEVELS = (0.025, 0.25, 0.5, 0.75, 0.975)


def substream(seed: int, key: str) -> np.random.SeedSequence:
    """A named, reproducible substream: entropy = seed, spawn_key = sha256(key)."""
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    words = tuple(int.from_bytes(digest[k : k + 4], "big") for k in range(0, 16, 4))
    return np.random.SeedSequence(entropy=int(seed), spawn_key=words)


@dataclass(frozen=True)
class ScenarioVariant:
    """A named list of assumption-set edits applied to the base set."""

    variant_id: str
    edits: tuple[Mapping, ...]

    def __post_init__(self) -> None:
        if not self.variant_id:
            raise AssumptionError("variant_id must be non-empty")
        if self.variant_id == BASE_VARIANT_ID:
            raise AssumptionError(f"variant_id {BASE_VARIANT_ID!r} is reserved")
        object.__setattr__(self, "edits", tuple(self.edits))


def _edit_candidate_slot(cand: Candidate, role: str, ratings: dict) -> Candidate:
    spec = getattr(cand, role, None)
    if spec is None:
        raise AssumptionError(f"candidate {cand.candidate_id} has no {role} slot")
    return replace(
        cand, **{role: SlotSpec(spec.generic_id, spec.gender, ratings)}
    )


def apply_edits(base: AssumptionSet, variant: ScenarioVariant) -> AssumptionSet:
    """Apply add/remove candidate, rating/tier, flag, and tombs edits."""
    out = base
    for k, edit in enumerate(variant.edits):
        where = f"variant {variant.variant_id} edit {k}"
        op = edit.get("op")
        if op == "remove_candidate":
            cid = str(edit.get("candidate_id", ""))
            kept = tuple(c for c in out.candidates if c.candidate_id != cid)
            if len(kept) == len(out.candidates):
                raise AssumptionError(f"{where}: no candidate {cid!r} to remove")
            out = replace(out, candidates=kept)
        elif op == "add_candidate":
            cand = parse_candidate(edit.get("candidate") or {}, where)
            out = replace(out, candidates=out.candidates + (cand,))
        elif op == "set_ratings":
            cid = str(edit.get("candidate_id", ""))
            role = str(edit.get("slot", "personal"))
            if role not in ("personal", "patronym", "grandpatronym"):
                raise AssumptionError(f"{where}: unknown slot role {role!r}")
            if "tiers" in edit:
                ratings = tiers_to_ratings(
                    [[str(r) for r in tier] for tier in edit["tiers"]]
                )
            else:
                ratings = {
                    normalize_token(str(r)): int(v)
                    for r, v in (edit.get("ratings") or {}).items()
                }
            cands = list(out.candidates)
            for idx, c in enumerate(cands):
                if c.candidate_id == cid:
                    cands[idx] = _edit_candidate_slot(c, role, ratings)
                    break
            else:
                raise AssumptionError(f"{where}: no candidate {cid!r}")
            out = replace(out, candidates=tuple(cands))
        elif op == "set_flag":
            flag = str(edit.get("flag", ""))
            if flag not in (
                "distinct_individuals",
                "condition_on_gender",
                "chain_youngest_neutral",
                "unknown_floor",
            ):
                raise AssumptionError(f"{where}: unknown flag {flag!r}")
            value = edit.get("value")
            if not isinstance(value, bool):
                raise AssumptionError(f"{where}: flag value must be boolean")
            out = replace(out, **{flag: value})
        elif op == "set_tombs":
            out = replace(out, tombs_count=int(edit.get("value", 0)))
        elif op == "set_mc_sims":
            out = replace(out, mc_sims=int(edit.get("value", 0)))
        else:
            raise AssumptionError(f"{where}: unknown op {op!r}")
    return out


@dataclass(frozen=True)
class SweepRow:
    variant_id: str
    lock_digest: str | None
    observed: float | None
    p_hat: float | None
    mc_se: float | None
    bonferroni: float | None
    exact_corrected: float | None
    error: str | None = None


def _sweep_one(
    variant_id: str,
    aset: AssumptionSet,
    cluster: Cluster,
    onom: Onomasticon,
    n_sims: int | None,
    seed: int,
) -> SweepRow:
    report = validate(aset, onom)
    if not report.ok:
        msgs = "; ".join(f.message for f in report.fatal)
        return SweepRow(variant_id, None, None, None, None, None, None, error=msgs)
    est = estimate_tail_area(
        cluster,
        aset,
        report.onomasticon,
        statistic="rr",
        n_sims=n_sims,
        seed=substream(seed, f"sweep/{variant_id}"),
    )
    bonf, exact = tomb_correction(est.p_hat, aset.tombs_count)
    return SweepRow(
        variant_id=variant_id,
        lock_digest=lock_hash(aset),
        observed=est.observed,
        p_hat=est.p_hat,
        mc_se=est.mc_se,
        bonferroni=bonf,
        exact_corrected=exact,
    )


def scenario_sweep(
    base: AssumptionSet,
    variants: Sequence[ScenarioVariant],
    cluster: Cluster,
    onom: Onomasticon,
    n_sims: int | None = None,
    seed: int = 0,
    threads: int = 1,
) -> tuple[SweepRow, ...]:
    """One row per variant plus the base row; invalid variants report errors
    per-row and the sweep continues."""
    ids = [BASE_VARIANT_ID] + [v.variant_id for v in variants]
    if len(set(ids)) != len(ids):
        raise AssumptionError(f"duplicate variant ids: {ids}")

    jobs: list[tuple[str, AssumptionSet | None, str | None]] = [
        (BASE_VARIANT_ID, base, None)
    ]
    for v in variants:
        try:
            jobs.append((v.variant_id, apply_edits(base, v), None))
        except SurpriseRRError as exc:
            jobs.append((v.variant_id, None, str(exc)))

    def run(job) -> SweepRow:
        vid, aset, err = job
        if err is not None:
            return SweepRow(vid, None, None, None, None, None, None, error=err)
        try:
            return _sweep_one(vid, aset, cluster, onom, n_sims, seed)
        except SurpriseRRError as exc:
            return SweepRow(vid, None, None, None, None, None, None, error=str(exc))

    if threads > 1 and len(jobs) > 1:
        from joblib import Parallel, delayed

        rows = Parallel(n_jobs=threads)(delayed(run)(job) for job in jobs)
    else:
        rows = [run(job) for job in jobs]
    return tuple(rows)


@dataclass(frozen=True)
class BootstrapSummary:
    """Quantile summary of p_hat over lexicon-bootstrap replicates."""

    quantiles: tuple[tuple[float, float], ...]
    p_hats: tuple[float, ...]
    n_replicates: int
    n_sims: int
    seed: int

    def quantile(self, level: float) -> float:
        for lv, value in self.quantiles:
            if lv == level:
                return value
        raise KeyError(level)


def _bootstrap_one(
    replicate: int,
    cluster: Cluster,
    assumptions: AssumptionSet,
    onom: Onomasticon,
    n_sims: int,
    seed: int,
) -> float:
    rng = np.random.default_rng(substream(seed, f"bootstrap/{replicate}/resample"))
    resampled = bootstrap_resample(onom, rng)
    report = validate(assumptions, resampled)
    if not report.ok:
        msgs = "; ".join(f.message for f in report.fatal)
        raise AssumptionError(f"bootstrap replicate {replicate}: {msgs}")
    est = estimate_tail_area(
        cluster,
        assumptions,
        report.onomasticon,
        statistic="rr",
        n_sims=n_sims,
        seed=substream(seed, f"bootstrap/{replicate}/tail"),
    )
    return est.p_hat


def bootstrap_variability(
    cluster: Cluster,
    assumptions: AssumptionSet,
    onom: Onomasticon,
    n_replicates: int,
    n_sims: int,
    seed: int = 0,
    threads: int = 1,
) -> BootstrapSummary:
    """Re-estimate the tail area on resampled lexicons; summarize p_hat spread.

    Each replicate resamples the lexicon (stratum totals preserved),
    revalidates the assumption set against it (rated renditions that
    resampled to zero are re-floored at count 1 when unknown_floor is set),
    and reruns the full estimate.
    """
    if n_replicates < 2:
        raise ValueError(f"n_replicates must be >= 2, got {n_replicates}")

    def run(b: int) -> float:
        return _bootstrap_one(b, cluster, assumptions, onom, n_sims, seed)

    if threads > 1:
        from joblib import Parallel, delayed

        p_hats = Parallel(n_jobs=threads)(delayed(run)(b) for b in range(n_replicates))
    else:
        p_hats = [run(b) for b in range(n_replicates)]
    values = np.quantile(np.asarray(p_hats), QUANTILE_LEVELS)
    return BootstrapSummary(
        quantiles=tuple(zip(QUANTILE_LEVELS, (float(v) for v in values))),
        p_hats=tuple(float(p) for p in p_hats),
        n_replicates=n_replicates,
        n_sims=n_sims,
        seed=seed,
    )


@dataclass(frozen=True)
class LevelStudyResult:
    rejection_rate: float
    alpha: float
    n_clusters: int
    n_sims: int
    p_hats: tuple[float, ...]


def _study_draw(
    tables,
    statistic: str,
    seed: int,
    key: str,
    n_sims: int,
    forced: Sequence[tuple[int, int]] = (),
) -> float:
    """One study iteration: draw a cluster, compute its p_hat under the null."""
    rng = np.random.default_rng(substream(seed, f"{key}/draw"))
    cells = _draw_cells(tables, rng, 1)
    for col, cell in forced:
        cells[0, col] = cell
    row = cells[0].tolist()
    if statistic == "rr":
        num, den, disq = _eval_row_rr(tables, row)
        if disq:
            return 1.0
        obs = (num, den, num / den)
    else:
        obs = (_eval_row_lumped(tables, row),)
    hits, _, _ = _simulate(
        tables, n_sims, substream(seed, f"{key}/tail"), statistic, obs
    )
    return (hits + 1) / (n_sims + 1)


def level_study(
    assumptions: AssumptionSet,
    config: ClusterConfiguration,
    onom: Onomasticon,
    n_clusters: int,
    n_sims: int,
    alpha: float,
    seed: int = 0,
    statistic: str = "rr",
    threads: int = 1,
) -> LevelStudyResult:
    """Empirical rejection rate at level alpha over null-generated clusters.

    With a valid estimator the rate stays at or below alpha (the add-one
    estimator plus discrete ties make it conservative).
    """
    if n_clusters < 100:
        raise ValueError(f"n_clusters must be >= 100, got {n_clusters}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha out of [0, 1]: {alpha}")
    tables = _compile(config, assumptions, onom)

    def run(d: int) -> float:
        return _study_draw(tables, statistic, seed, f"level/{d}", n_sims)

    if threads > 1:
        from joblib import Parallel, delayed

        p_hats = Parallel(n_jobs=threads)(delayed(run)(d) for d in range(n_clusters))
    else:
        p_hats = [run(d) for d in range(n_clusters)]
    rate = sum(1 for p in p_hats if p <= alpha) / n_clusters
    return LevelStudyResult(
        rejection_rate=rate,
        alpha=alpha,
        n_clusters=n_clusters,
        n_sims=n_sims,
        p_hats=tuple(p_hats),
    )


@dataclass(frozen=True)
class Plant:
    """Force one inscription's draw to a candidate's renditions (slot role -> rendition)."""

    inscription: int
    candidate_id: str
    renditions: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "renditions",
            {str(k): normalize_token(str(v)) for k, v in self.renditions.items()},
        )


@dataclass(frozen=True)
class AlternativeSpec:
    """Planted-rendition alternative: planted slots are forced, the rest draw
    from the null."""

    plants: tuple[Plant, ...]


_ROLE_POS = {"personal": 0, "patronym": 1, "grandpatronym": 2}


def _resolve_plants(
    alt: AlternativeSpec,
    assumptions: AssumptionSet,
    config: ClusterConfiguration,
    onom: Onomasticon,
    tables,
) -> list[tuple[int, int]]:
    by_id = {c.candidate_id: c for c in assumptions.candidates}
    cell_pos = {}
    for gidx in range(len(tables.cell_generic)):
        cell_pos[
            (tables.cell_generic[gidx], tables.cell_gender[gidx], tables.cell_rendition[gidx])
        ] = gidx
    forced: list[tuple[int, int]] = []
    seen: set[int] = set()
    for plant in alt.plants:
        if plant.inscription in seen:
            raise AssumptionError(f"duplicate plant for inscription {plant.inscription}")
        seen.add(plant.inscription)
        if not 0 <= plant.inscription < len(config.chains):
            raise AssumptionError(f"plant inscription {plant.inscription} out of range")
        cand = by_id.get(plant.candidate_id)
        if cand is None:
            raise AssumptionError(f"plant names unknown candidate {plant.candidate_id!r}")
        specs = dict(cand.slot_specs())
        chain = config.chains[plant.inscription]
        for role, rid in plant.renditions.items():
            spec = specs.get(role)
            if spec is None:
                raise AssumptionError(
                    f"candidate {plant.candidate_id} has no {role} slot to plant"
                )
            pos = _ROLE_POS[role]
            if pos >= len(chain):
                raise AssumptionError(
                    f"inscription {plant.inscription} chain too short for {role} plant"
                )
            if spec.gender != chain[pos]:
                raise AssumptionError(
                    f"plant {role} gender {spec.gender} mismatches configuration "
                    f"slot gender {chain[pos]}"
                )
            key = (spec.generic_id, spec.gender, rid)
            if key not in cell_pos:
                raise AssumptionError(
                    f"planted rendition {rid!r} not under ({spec.generic_id}, {spec.gender})"
                )
            forced.append((tables.insc_start[plant.inscription] + pos, cell_pos[key]))
    return forced


def power_study(
    assumptions: AssumptionSet,
    alt: AlternativeSpec,
    config: ClusterConfiguration,
    onom: Onomasticon,
    n_clusters: int,
    n_sims: int,
    alpha: float,
    seed: int = 0,
    statistic: str = "rr",
    threads: int = 1,
) -> LevelStudyResult:
    """Empirical rejection rate under the planted-rendition alternative.

    With nothing planted this reduces to the level study. Used to compare the
    RR statistic against the lumped comparison statistic.
    """
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be >= 1, got {n_clusters}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha out of [0, 1]: {alpha}")
    tables = _compile(config, assumptions, onom)
    forced = _resolve_plants(alt, assumptions, config, onom, tables)

    def run(d: int) -> float:
        return _study_draw(tables, statistic, seed, f"power/{d}", n_sims, forced=forced)

    if threads > 1:
        from joblib import Parallel, delayed

        p_hats = Parallel(n_jobs=threads)(delayed(run)(d) for d in range(n_clusters))
    else:
        p_hats = [run(d) for d in range(n_clusters)]
    rate = sum(1 for p in p_hats if p <= alpha) / n_clusters
    return LevelStudyResult(
        rejection_rate=rate,
        alpha=alpha,
        n_clusters=n_clusters,
        n_sims=n_sims,
        p_hats=tuple(p_hats),
    )


def read_variants_yaml(path: str | Path) -> tuple[ScenarioVariant, ...]:
    """Read a YAML list of {variant_id, edits: [...]} documents."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise AssumptionError(f"{path}: {exc}") from exc
    if doc is None:
        return ()
    if not isinstance(doc, list):
        raise AssumptionError(f"{path}: expected a list of variants")
    out = []
    for k, item in enumerate(doc):
        if not isinstance(item, Mapping) or "variant_id" not in item:
            raise AssumptionError(f"{path}: variants[{k}] needs a variant_id")
        edits = item.get("edits") or []
        if not isinstance(edits, list):
            raise AssumptionError(f"{path}: variants[{k}] edits must be a list")
        out.append(ScenarioVariant(str(item["variant_id"]), tuple(edits)))
    return tuple(out)


def read_alternative_yaml(path: str | Path) -> AlternativeSpec:
    """Read a YAML {planted: [{inscription, candidate_id, renditions}...]} document."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise AssumptionError(f"{path}: {exc}") from exc
    if not isinstance(doc, Mapping) or "planted" not in doc:
        raise AssumptionError(f"{path}: expected a mapping with a 'planted' list")
    plants = []
    for k, item in enumerate(doc["planted"] or []):
        if not isinstance(item, Mapping):
            raise AssumptionError(f"{path}: planted[{k}] must be a mapping")
        for key in ("inscription", "candidate_id", "renditions"):
            if key not in item:
                raise AssumptionError(f"{path}: planted[{k}] needs {key}")
        plants.append(
            Plant(
                inscription=int(item["inscription"]),
                candidate_id=str(item["candidate_id"]),
                renditions={str(r): str(v) for r, v in item["renditions"].items()},
            )
        )
    return AlternativeSpec(tuple(plants))
