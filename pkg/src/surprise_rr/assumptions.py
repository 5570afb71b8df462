"""The a priori provisos: candidates with rated renditions, disqualifier rules,
behavioral flags, and the tamper-evident lock digest.

Ratings are the internal representation; nested tiers are sugar converted on
load (tier ties share one rating, hence one tail value). Assumption sets are
immutable after validation and shareable across simulation workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .errors import AssumptionError
from .onomasticon import (
    GENDERS,
    Onomasticon,
    normalize_token,
    with_unknown_rendition,
)

__all__ = [
    "HARD",
    "SLOT_ROLES",
    "SlotSpec",
    "Candidate",
    "DisqualifierRule",
    "AssumptionSet",
    "Finding",
    "ValidationReport",
    "tiers_to_ratings",
    "validate",
    "lock_hash",
    "canonical_payload",
    "rating_tail_table",
    "read_assumptions_yaml",
    "parse_assumptions",
    "write_lockfile",
    "read_lockfile",
]

HARD = "HARD"

SLOT_ROLES = ("personal", "patronym", "grandpatronym")


@dataclass(frozen=True)
class SlotSpec:
    """What a candidate expects in one inscription slot.

    ratings maps rendition_id -> integer rating >= 0; higher means rarer and
    more relevant. Unlisted renditions have rating 0. An empty map is a pure
    generic match.
    """

    generic_id: str
    gender: str
    ratings: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.gender not in GENDERS:
            raise AssumptionError(f"unknown gender {self.gender!r} in slot spec")
        norm = {}
        for rid, rating in self.ratings.items():
            if not isinstance(rating, int) or isinstance(rating, bool) or rating < 0:
                raise AssumptionError(f"rating for {rid!r} must be an integer >= 0")
            norm[normalize_token(rid)] = rating
        if len(norm) != len(self.ratings):
            raise AssumptionError("duplicate rendition ids in ratings after normalization")
        object.__setattr__(self, "generic_id", normalize_token(self.generic_id))
        object.__setattr__(self, "ratings", norm)

    def rating(self, rendition_id: str) -> int:
        return self.ratings.get(rendition_id, 0)


@dataclass(frozen=True)
class Candidate:
    """A candidate individual, expressed as up to three slot specs (youngest first)."""

    candidate_id: str
    label: str
    personal: SlotSpec
    patronym: SlotSpec | None = None
    grandpatronym: SlotSpec | None = None

    def __post_init__(self) -> None:
        if not self.candidate_id:
            raise AssumptionError("candidate_id must be non-empty")
        if self.grandpatronym is not None and self.patronym is None:
            raise AssumptionError(
                f"candidate {self.candidate_id}: grandpatronym requires a patronym"
            )

    def slot_specs(self) -> tuple[tuple[str, SlotSpec], ...]:
        """(role, spec) pairs for the present slots, aligned youngest first."""
        out = [("personal", self.personal)]
        if self.patronym is not None:
            out.append(("patronym", self.patronym))
        if self.grandpatronym is not None:
            out.append(("grandpatronym", self.grandpatronym))
        return tuple(out)


@dataclass(frozen=True)
class DisqualifierRule:
    """A name pattern that weighs against the identification.

    penalty is either an exact rational factor > 1 (multiplies into the RR
    product) or HARD (the cluster is disqualified outright).
    """

    personal: tuple[str, str]
    patronym: tuple[str, str] | None = None
    penalty: Fraction | str = HARD

    def __post_init__(self) -> None:
        per = (normalize_token(self.personal[0]), str(self.personal[1]).strip().upper())
        object.__setattr__(self, "personal", per)
        if self.patronym is not None:
            pat = (normalize_token(self.patronym[0]), str(self.patronym[1]).strip().upper())
            object.__setattr__(self, "patronym", pat)
        for _, gender in (per,) + ((self.patronym,) if self.patronym else ()):
            if gender not in GENDERS:
                raise AssumptionError(f"unknown gender {gender!r} in disqualifier pattern")
        if self.penalty != HARD:
            pen = Fraction(self.penalty)
            if pen <= 1:
                raise AssumptionError(f"finite disqualifier penalty must be > 1, got {pen}")
            object.__setattr__(self, "penalty", pen)

    @property
    def hard(self) -> bool:
        return self.penalty == HARD


@dataclass(frozen=True)
class AssumptionSet:
    """The full prespecified proviso set driving observed and simulated statistics."""

    candidates: tuple[Candidate, ...]
    disqualifiers: tuple[DisqualifierRule, ...] = ()
    distinct_individuals: bool = True
    condition_on_gender: bool = True
    chain_youngest_neutral: bool = True
    unknown_floor: bool = True
    tombs_count: int = 1
    mc_sims: int = 100_000

    def __post_init__(self) -> None:
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise AssumptionError(f"duplicate candidate ids: {sorted(ids)}")
        if self.tombs_count < 1:
            raise AssumptionError(f"tombs_count must be >= 1, got {self.tombs_count}")
        if self.mc_sims < 1000:
            raise AssumptionError(f"mc_sims must be >= 1000, got {self.mc_sims}")
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "disqualifiers", tuple(self.disqualifiers))

    def sorted_candidates(self) -> tuple[Candidate, ...]:
        """Canonical candidate order used by every statistic (id-lexicographic)."""
        return tuple(sorted(self.candidates, key=lambda c: c.candidate_id))


def tiers_to_ratings(tiers: Sequence[Iterable[str]]) -> dict[str, int]:
    """Convert an ordered nested list of rendition sets (rarest first) to ratings.

    Tier k of n (1-indexed from rarest) maps to rating n - k + 1; renditions
    in no tier keep rating 0.
    """
    ratings: dict[str, int] = {}
    n = len(tiers)
    for k, tier in enumerate(tiers):
        for rid in tier:
            rid = normalize_token(rid)
            if rid in ratings:
                raise AssumptionError(f"rendition {rid!r} appears in more than one tier")
            ratings[rid] = n - k
    return ratings


@dataclass(frozen=True)
class Finding:
    severity: str  # "fatal" | "info"
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking an assumption set against a lexicon.

    onomasticon is the effective lexicon: with unknown_floor set, rated
    renditions missing from the input were injected at count 1.
    """

    findings: tuple[Finding, ...]
    onomasticon: Onomasticon

    @property
    def ok(self) -> bool:
        return not any(f.severity == "fatal" for f in self.findings)

    @property
    def fatal(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "fatal")


def validate(assumptions: AssumptionSet, onom: Onomasticon) -> ValidationReport:
    """Check every proviso reference against the lexicon; never raises.

    Reported: rated renditions missing from the lexicon (fatal unless
    unknown_floor is set, in which case they are injected at count 1), empty
    stratum references, unknown generics, and disqualifier patterns naming
    unknown generics.
    """
    findings: list[Finding] = []
    eff = onom

    def check_stratum(gender: str, where: str) -> None:
        if eff.stratum_total(gender) == 0:
            findings.append(
                Finding("fatal", "empty-stratum", f"{where}: {gender} stratum is empty")
            )

    for cand in assumptions.sorted_candidates():
        for role, spec in cand.slot_specs():
            where = f"candidate {cand.candidate_id} {role}"
            check_stratum(spec.gender, where)
            entry = eff.get_entry(spec.generic_id, spec.gender)
            if entry is None:
                findings.append(
                    Finding(
                        "fatal",
                        "unknown-generic",
                        f"{where}: generic ({spec.generic_id}, {spec.gender}) not in lexicon",
                    )
                )
                continue
            for rid in sorted(spec.ratings):
                cell = entry.rendition(rid)
                if cell is not None and cell.count >= 1:
                    continue
                if assumptions.unknown_floor:
                    eff = with_unknown_rendition(eff, spec.generic_id, spec.gender, rid)
                    entry = eff.entry(spec.generic_id, spec.gender)
                    findings.append(
                        Finding(
                            "info",
                            "injected-rendition",
                            f"{where}: rated rendition {rid!r} injected at count 1",
                        )
                    )
                else:
                    findings.append(
                        Finding(
                            "fatal",
                            "missing-rendition",
                            f"{where}: rated rendition {rid!r} not in lexicon "
                            "(unknown_floor disabled)",
                        )
                    )
    for idx, rule in enumerate(assumptions.disqualifiers):
        pats = [("personal", rule.personal)]
        if rule.patronym is not None:
            pats.append(("patronym", rule.patronym))
        for role, (generic_id, gender) in pats:
            if eff.get_entry(generic_id, gender) is None:
                findings.append(
                    Finding(
                        "fatal",
                        "disqualifier-unknown-generic",
                        f"disqualifier {idx} {role}: generic ({generic_id}, {gender}) "
                        "not in lexicon",
                    )
                )
    return ValidationReport(tuple(findings), eff)


def rating_tail_table(slot: SlotSpec, onom: Onomasticon) -> dict[str, Fraction]:
    """Conditional tail of each rendition within the slot's generic name.

    tail(r) = (persons of this generic/gender rated at least rating(r)) /
    entry total. Rating-0 renditions always have tail 1; only the comparative
    order of ratings matters.
    """
    entry = onom.entry(slot.generic_id, slot.gender)
    if entry.total == 0:
        raise AssumptionError(
            f"entry ({slot.generic_id}, {slot.gender}) has zero persons; no tails defined"
        )
    table: dict[str, Fraction] = {}
    for cell in entry.renditions:
        r = slot.rating(cell.rendition_id)
        qualifying = sum(
            c.count for c in entry.renditions if slot.rating(c.rendition_id) >= r
        )
        table[cell.rendition_id] = Fraction(qualifying, entry.total)
    return table


def _slot_payload(spec: SlotSpec | None) -> dict | None:
    if spec is None:
        return None
    return {
        "generic_id": spec.generic_id,
        "gender": spec.gender,
        "ratings": {rid: spec.ratings[rid] for rid in sorted(spec.ratings)},
    }


def canonical_payload(assumptions: AssumptionSet) -> dict:
    """Semantics-only dict: sorted keys/collections, rationals as 'num/den' strings."""
    cands = []
    for c in assumptions.sorted_candidates():
        cands.append(
            {
                "candidate_id": c.candidate_id,
                "label": c.label,
                "personal": _slot_payload(c.personal),
                "patronym": _slot_payload(c.patronym),
                "grandpatronym": _slot_payload(c.grandpatronym),
            }
        )
    disq = []
    for rule in assumptions.disqualifiers:
        disq.append(
            {
                "personal": list(rule.personal),
                "patronym": list(rule.patronym) if rule.patronym else None,
                "penalty": HARD
                if rule.hard
                else f"{rule.penalty.numerator}/{rule.penalty.denominator}",
            }
        )
    disq.sort(key=lambda d: json.dumps(d, sort_keys=True))
    return {
        "candidates": cands,
        "disqualifiers": disq,
        "flags": {
            "distinct_individuals": assumptions.distinct_individuals,
            "condition_on_gender": assumptions.condition_on_gender,
            "chain_youngest_neutral": assumptions.chain_youngest_neutral,
            "unknown_floor": assumptions.unknown_floor,
        },
        "tombs_count": assumptions.tombs_count,
        "mc_sims": assumptions.mc_sims,
    }


def lock_hash(assumptions: AssumptionSet) -> str:
    """SHA-256 digest of the canonical serialization; stable across field order."""
    blob = json.dumps(
        canonical_payload(assumptions), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_lockfile(path: str | Path, assumptions: AssumptionSet, source_name: str) -> str:
    digest = lock_hash(assumptions)
    Path(path).write_text(f"{digest}  {source_name}\n", encoding="utf-8")
    return digest


def read_lockfile(path: str | Path) -> tuple[str, str]:
    """Return (digest, filename) from a `<digest>  <filename>` lockfile line."""
    text = Path(path).read_text(encoding="utf-8").strip()
    parts = text.split(None, 1)
    if len(parts) != 2 or len(parts[0]) != 64:
        raise AssumptionError(f"{path}: not a lockfile (expected '<digest>  <filename>')")
    return parts[0], parts[1]


def _parse_slot(doc: Mapping, where: str) -> SlotSpec:
    if not isinstance(doc, Mapping):
        raise AssumptionError(f"{where}: slot spec must be a mapping")
    unknown = set(doc) - {"generic_id", "gender", "ratings", "tiers"}
    if unknown:
        raise AssumptionError(f"{where}: unknown slot keys {sorted(unknown)}")
    if "generic_id" not in doc or "gender" not in doc:
        raise AssumptionError(f"{where}: slot spec needs generic_id and gender")
    if "ratings" in doc and "tiers" in doc:
        raise AssumptionError(f"{where}: give ratings or tiers, not both")
    if "tiers" in doc:
        tiers = doc["tiers"]
        if not isinstance(tiers, Sequence) or isinstance(tiers, str):
            raise AssumptionError(f"{where}: tiers must be a list of rendition lists")
        ratings = tiers_to_ratings([[str(r) for r in tier] for tier in tiers])
    else:
        ratings = {str(k): v for k, v in (doc.get("ratings") or {}).items()}
    return SlotSpec(str(doc["generic_id"]), str(doc["gender"]).strip().upper(), ratings)


def parse_candidate(doc: Mapping, where: str = "candidate") -> Candidate:
    if not isinstance(doc, Mapping):
        raise AssumptionError(f"{where}: candidate must be a mapping")
    unknown = set(doc) - {"candidate_id", "label", "personal", "patronym", "grandpatronym"}
    if unknown:
        raise AssumptionError(f"{where}: unknown candidate keys {sorted(unknown)}")
    if "candidate_id" not in doc or "personal" not in doc:
        raise AssumptionError(f"{where}: candidate needs candidate_id and personal")
    cid = str(doc["candidate_id"])
    return Candidate(
        candidate_id=cid,
        label=str(doc.get("label", cid)),
        personal=_parse_slot(doc["personal"], f"{where} {cid} personal"),
        patronym=_parse_slot(doc["patronym"], f"{where} {cid} patronym")
        if doc.get("patronym") is not None
        else None,
        grandpatronym=_parse_slot(doc["grandpatronym"], f"{where} {cid} grandpatronym")
        if doc.get("grandpatronym") is not None
        else None,
    )


def _parse_penalty(value: object) -> Fraction | str:
    if isinstance(value, str) and value.strip().upper() == HARD:
        return HARD
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise AssumptionError(f"penalty must be a number > 1 or 'HARD', got {value!r}")
    try:
        return Fraction(str(value))
    except ValueError:
        raise AssumptionError(f"penalty {value!r} is not a number") from None


def _parse_pattern(doc: Mapping, where: str) -> tuple[str, str]:
    if not isinstance(doc, Mapping) or "generic_id" not in doc or "gender" not in doc:
        raise AssumptionError(f"{where}: pattern needs generic_id and gender")
    return (str(doc["generic_id"]), str(doc["gender"]).strip().upper())


def parse_assumptions(doc: Mapping) -> AssumptionSet:
    """Build an AssumptionSet from one parsed structured-text document."""
    if not isinstance(doc, Mapping):
        raise AssumptionError("assumption file must hold a single mapping document")
    unknown = set(doc) - {"candidates", "disqualifiers", "flags", "tombs_count", "mc_sims"}
    if unknown:
        raise AssumptionError(f"unknown top-level keys {sorted(unknown)}")
    cands = [
        parse_candidate(c, f"candidates[{i}]")
        for i, c in enumerate(doc.get("candidates") or [])
    ]
    disq = []
    for i, d in enumerate(doc.get("disqualifiers") or []):
        if not isinstance(d, Mapping) or "personal" not in d or "penalty" not in d:
            raise AssumptionError(f"disqualifiers[{i}]: needs personal pattern and penalty")
        disq.append(
            DisqualifierRule(
                personal=_parse_pattern(d["personal"], f"disqualifiers[{i}] personal"),
                patronym=_parse_pattern(d["patronym"], f"disqualifiers[{i}] patronym")
                if d.get("patronym") is not None
                else None,
                penalty=_parse_penalty(d["penalty"]),
            )
        )
    flags = doc.get("flags") or {}
    known_flags = {
        "distinct_individuals",
        "condition_on_gender",
        "chain_youngest_neutral",
        "unknown_floor",
    }
    unknown = set(flags) - known_flags
    if unknown:
        raise AssumptionError(f"unknown flags {sorted(unknown)}")
    for name, value in flags.items():
        if not isinstance(value, bool):
            raise AssumptionError(f"flag {name} must be a boolean, got {value!r}")
    kwargs = {name: flags[name] for name in known_flags if name in flags}
    if "tombs_count" in doc:
        kwargs["tombs_count"] = int(doc["tombs_count"])
    if "mc_sims" in doc:
        kwargs["mc_sims"] = int(doc["mc_sims"])
    return AssumptionSet(candidates=tuple(cands), disqualifiers=tuple(disq), **kwargs)


def read_assumptions_yaml(path: str | Path) -> AssumptionSet:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise AssumptionError(f"{path}: {exc}") from exc
    return parse_assumptions(doc)
