"""Cluster surprisingness: slot matching, optimal injective candidate
assignment, generational-chain neutralization, disqualifiers, and the lumped
comparison statistic.

All statistics here are exact rationals computed over immutable inputs; the
functions are pure and safe for unbounded parallel invocation. The Monte
Carlo engine in `nulldist` runs a vectorized equivalent of this module and is
property-tested against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import yaml

from .assumptions import AssumptionSet, Candidate, DisqualifierRule, SlotSpec
from .errors import AmbiguousRenditionError, ClusterError, UnknownRenditionError
from .onomasticon import (
    GENDERS,
    GenericNameEntry,
    Onomasticon,
    RenditionCell,
    normalize_token,
)

__all__ = [
    "Slot",
    "Inscription",
    "Cluster",
    "RRBreakdown",
    "slot_rr",
    "inscription_rr",
    "find_generational_chains",
    "cluster_rr",
    "lumped_statistic",
    "parse_cluster",
    "read_cluster_yaml",
]

# Exact DP is used for assignment components up to this size; beyond it the
# solver switches to log-domain min-cost matching (scipy).
_DP_MAX_CANDIDATES = 14
_DP_MAX_STATES = 300_000


@dataclass(frozen=True)
class Slot:
    """One name slot of an inscription chain.

    generic_id is optional: file-loaded slots carry only (rendition, gender)
    and resolve against the lexicon; simulated slots are born resolved.
    """

    rendition_id: str
    gender: str
    generic_id: str | None = None

    def __post_init__(self) -> None:
        if self.gender not in GENDERS:
            raise ClusterError(f"unknown gender {self.gender!r} in slot")


@dataclass(frozen=True)
class Inscription:
    """An ordered name chain, youngest first; metadata is inert to all statistics."""

    slots: tuple[Slot, ...]
    script: str = ""
    transcription: str = ""

    def __post_init__(self) -> None:
        if not 1 <= len(self.slots) <= 3:
            raise ClusterError(f"chain length must be 1..3, got {len(self.slots)}")
        for slot in self.slots[1:]:
            if slot.gender != "M":
                raise ClusterError("patronym and grandpatronym slots must be gender M")
        object.__setattr__(self, "slots", tuple(self.slots))


@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    inscriptions: tuple[Inscription, ...]

    def __post_init__(self) -> None:
        if not self.inscriptions:
            raise ClusterError("cluster must contain at least one inscription")
        object.__setattr__(self, "inscriptions", tuple(self.inscriptions))


@dataclass(frozen=True)
class RRBreakdown:
    """Per-inscription factors, chosen assignment, and the cluster product.

    factors are exact; neutralized inscriptions have factor exactly 1. When
    disqualified, `product` reports the +infinity sentinel while
    `product_exact` still holds the factor product.
    """

    factors: tuple[Fraction, ...]
    assignment: tuple[str | None, ...]
    neutralized: frozenset[int]
    disqualified: bool
    product_exact: Fraction

    @property
    def product(self) -> float:
        return math.inf if self.disqualified else float(self.product_exact)


def _resolve_slot(
    onom: Onomasticon, slot: Slot
) -> tuple[GenericNameEntry, RenditionCell]:
    """Locate the slot's (entry, cell) in the lexicon.

    File-loaded slots (generic_id=None) must resolve uniquely within their
    gender stratum. unknown_floor only injects candidate-rated renditions, so
    an unrated rendition absent from the lexicon is an error here.
    """
    if slot.generic_id is not None:
        entry = onom.entry(slot.generic_id, slot.gender)
        cell = entry.rendition(slot.rendition_id)
        if cell is None:
            raise UnknownRenditionError(
                f"rendition {slot.rendition_id!r} not under ({slot.generic_id}, {slot.gender})"
            )
        return entry, cell
    hits = onom.find_rendition(slot.rendition_id, slot.gender)
    if not hits:
        raise UnknownRenditionError(
            f"rendition {slot.rendition_id!r} not in the {slot.gender} stratum "
            "(unknown_floor covers only candidate-rated renditions)"
        )
    if len(hits) > 1:
        generics = sorted(e.generic_id for e, _ in hits)
        raise AmbiguousRenditionError(
            f"rendition {slot.rendition_id!r} is ambiguous in the {slot.gender} "
            f"stratum: generics {generics}"
        )
    return hits[0]


def _resolve_cluster(
    onom: Onomasticon, cluster: Cluster
) -> list[list[tuple[GenericNameEntry, RenditionCell]]]:
    return [
        [_resolve_slot(onom, slot) for slot in insc.slots]
        for insc in cluster.inscriptions
    ]


def _slot_factor(
    spec: SlotSpec, entry: GenericNameEntry, cell: RenditionCell, stratum_total: int
) -> Fraction | None:
    """generic-frequency x conditional-tail, or None on generic/gender mismatch."""
    if entry.generic_id != spec.generic_id or entry.gender != spec.gender:
        return None
    observed_rating = spec.rating(cell.rendition_id)
    qualifying = sum(
        c.count for c in entry.renditions if spec.rating(c.rendition_id) >= observed_rating
    )
    return Fraction(qualifying, stratum_total)


def slot_rr(
    spec: SlotSpec, slot: Slot | tuple[str, str], onom: Onomasticon
) -> Fraction | None:
    """RR factor of one slot under one slot spec.

    Returns (persons of this gender bearing this generic with rating >= the
    observed rendition's rating) / stratum_total, or None (no match) when the
    slot's generic or gender differs from the spec's.
    """
    if isinstance(slot, tuple):
        slot = Slot(slot[0], slot[1])
    entry, cell = _resolve_slot(onom, slot)
    return _slot_factor(spec, entry, cell, onom.stratum_total(spec.gender))


def inscription_rr(
    candidate: Candidate, inscription: Inscription, onom: Onomasticon
) -> Fraction | None:
    """Product of slot factors over the candidate's specified slots.

    Slots are aligned youngest-to-youngest; None when any specified slot
    mismatches or the inscription lacks one. Unspecified inscription slots
    contribute 1.
    """
    total = Fraction(1)
    for pos, (_, spec) in enumerate(candidate.slot_specs()):
        if pos >= len(inscription.slots):
            return None
        f = slot_rr(spec, inscription.slots[pos], onom)
        if f is None:
            return None
        total *= f
    return total


def find_generational_chains(
    cluster: Cluster, onom: Onomasticon, enabled: bool = True
) -> frozenset[int]:
    """Indices of inscriptions neutralized as the youngest of an A-son-of-B-son-of-C trio.

    An inscription [a|b] is neutralized when some other inscription [b'|c...]
    has a male personal slot of the same generic as b. All such inscriptions
    are neutralized.
    """
    if not enabled:
        return frozenset()
    resolved = _resolve_cluster(onom, cluster)
    neutral = set()
    for i, insc in enumerate(cluster.inscriptions):
        if len(insc.slots) != 2:
            continue
        pat_entry = resolved[i][1][0]
        for j, other in enumerate(cluster.inscriptions):
            if j == i or len(other.slots) < 2:
                continue
            per_entry = resolved[j][0][0]
            if per_entry.gender == "M" and per_entry.generic_id == pat_entry.generic_id:
                neutral.add(i)
                break
    return frozenset(neutral)


def _rule_matches(
    rule: DisqualifierRule,
    resolved: list[tuple[GenericNameEntry, RenditionCell]],
) -> bool:
    per_entry = resolved[0][0]
    if (per_entry.generic_id, per_entry.gender) != rule.personal:
        return False
    if rule.patronym is not None:
        if len(resolved) < 2:
            return False
        pat_entry = resolved[1][0]
        if (pat_entry.generic_id, pat_entry.gender) != rule.patronym:
            return False
    return True


def _choice_key(choice: tuple[str | None, ...]) -> tuple:
    # NONE sorts before any candidate id: ties break toward no assignment,
    # then lexicographic candidate id.
    return tuple((0, "") if c is None else (1, c) for c in choice)


def _solve_component_exact(
    inscriptions: list[int],
    candidates: list[str],
    edges: Mapping[tuple[int, str], Fraction],
) -> dict[int, str]:
    cand_index = {cid: k for k, cid in enumerate(candidates)}
    memo: dict[tuple[int, int], tuple[Fraction, int, tuple]] = {}

    def solve(k: int, mask: int) -> tuple[Fraction, int, tuple]:
        if k == len(inscriptions):
            return (Fraction(1), 0, ())
        state = (k, mask)
        hit = memo.get(state)
        if hit is not None:
            return hit
        skip = solve(k + 1, mask)
        best = (skip[0], skip[1], (None,) + skip[2])
        i = inscriptions[k]
        for cid in candidates:
            f = edges.get((i, cid))
            if f is None:
                continue
            bit = 1 << cand_index[cid]
            if mask & bit:
                continue
            sub = solve(k + 1, mask | bit)
            val = (f * sub[0], sub[1] + 1, (cid,) + sub[2])
            if val[0] < best[0] or (
                val[0] == best[0]
                and (val[1], _choice_key(val[2])) < (best[1], _choice_key(best[2]))
            ):
                best = val
        memo[state] = best
        return best

    _, _, choice = solve(0, 0)
    return {i: cid for i, cid in zip(inscriptions, choice) if cid is not None}


def _solve_component_lsa(
    inscriptions: list[int],
    candidates: list[str],
    edges: Mapping[tuple[int, str], Fraction],
) -> dict[int, str]:
    # Large components: exact min-cost matching in log domain (float costs).
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    n_i, n_c = len(inscriptions), len(candidates)
    cost = np.zeros((n_i, n_c + n_i))
    cost[:, :n_c] = np.inf
    for r, i in enumerate(inscriptions):
        for c, cid in enumerate(candidates):
            f = edges.get((i, cid))
            if f is None:
                continue
            ff = float(f)
            cost[r, c] = math.log(ff) if ff > 0.0 else -1e30
    rows, cols = linear_sum_assignment(cost)
    out = {}
    for r, c in zip(rows, cols):
        if c < n_c:
            out[inscriptions[r]] = candidates[c]
    return out


def _optimal_assignment(
    edges: Mapping[tuple[int, str], Fraction], injective: bool
) -> dict[int, str]:
    """Min-product choice of at most one candidate per inscription.

    Edges carry factors < 1 only. With injectivity each candidate serves at
    most one inscription; the search is exact per connected component.
    """
    if not edges:
        return {}
    if not injective:
        best: dict[int, str] = {}
        for (i, cid), f in edges.items():
            cur = best.get(i)
            if cur is None or f < edges[(i, cur)] or (f == edges[(i, cur)] and cid < cur):
                best[i] = cid
        return best

    insc_of: dict[int, set[str]] = {}
    cand_of: dict[str, set[int]] = {}
    for i, cid in edges:
        insc_of.setdefault(i, set()).add(cid)
        cand_of.setdefault(cid, set()).add(i)

    assignment: dict[int, str] = {}
    seen_i: set[int] = set()
    for start in sorted(insc_of):
        if start in seen_i:
            continue
        comp_i, comp_c = {start}, set()
        frontier = [("i", start)]
        while frontier:
            kind, node = frontier.pop()
            if kind == "i":
                for cid in insc_of[node]:
                    if cid not in comp_c:
                        comp_c.add(cid)
                        frontier.append(("c", cid))
            else:
                for i in cand_of[node]:
                    if i not in comp_i:
                        comp_i.add(i)
                        frontier.append(("i", i))
        seen_i |= comp_i
        ins = sorted(comp_i)
        cands = sorted(comp_c)
        if (
            len(cands) <= _DP_MAX_CANDIDATES
            and len(ins) * (1 << len(cands)) <= _DP_MAX_STATES
        ):
            assignment.update(_solve_component_exact(ins, cands, edges))
        else:
            assignment.update(_solve_component_lsa(ins, cands, edges))
    return assignment


def cluster_rr(
    cluster: Cluster, assumptions: AssumptionSet, onom: Onomasticon
) -> RRBreakdown:
    """The cluster's RR breakdown under a validated assumption set.

    Neutralized inscriptions get factor exactly 1 and are excluded from
    matching. Every other inscription takes the minimum of 1 and its candidate
    factors, injectively over candidates when distinct_individuals is set; the
    assignment minimizing the cluster product is found exactly. Finite
    disqualifier penalties multiply into the hit inscription's factor
    (neutralized inscriptions excepted); any HARD hit disqualifies outright.
    """
    resolved = _resolve_cluster(onom, cluster)
    n = len(cluster.inscriptions)
    neutral = find_generational_chains(
        cluster, onom, enabled=assumptions.chain_youngest_neutral
    )

    disqualified = False
    penalties = [Fraction(1)] * n
    for rule in assumptions.disqualifiers:
        for i in range(n):
            if not _rule_matches(rule, resolved[i]):
                continue
            if rule.hard:
                disqualified = True
            elif i not in neutral:
                penalties[i] *= rule.penalty

    edges: dict[tuple[int, str], Fraction] = {}
    for cand in assumptions.sorted_candidates():
        specs = cand.slot_specs()
        for i in range(n):
            if i in neutral or len(specs) > len(resolved[i]):
                continue
            f = Fraction(1)
            ok = True
            for pos, (_, spec) in enumerate(specs):
                entry, cell = resolved[i][pos]
                sf = _slot_factor(spec, entry, cell, onom.stratum_total(spec.gender))
                if sf is None:
                    ok = False
                    break
                f *= sf
            if ok and f < 1:
                edges[(i, cand.candidate_id)] = f

    chosen = _optimal_assignment(edges, assumptions.distinct_individuals)

    factors = []
    assignment: list[str | None] = []
    for i in range(n):
        if i in neutral:
            factors.append(Fraction(1))
            assignment.append(None)
            continue
        cid = chosen.get(i)
        base = edges[(i, cid)] if cid is not None else Fraction(1)
        factors.append(penalties[i] * base)
        assignment.append(cid)

    product = Fraction(1)
    for f in factors:
        product *= f
    return RRBreakdown(
        factors=tuple(factors),
        assignment=tuple(assignment),
        neutralized=neutral,
        disqualified=disqualified,
        product_exact=product,
    )


def _pattern_matches(
    candidate: Candidate,
    resolved: list[tuple[GenericNameEntry, RenditionCell]],
) -> bool:
    specs = candidate.slot_specs()
    if len(specs) > len(resolved):
        return False
    for pos, (_, spec) in enumerate(specs):
        entry = resolved[pos][0]
        if entry.generic_id != spec.generic_id or entry.gender != spec.gender:
            return False
    return True


def _max_matching(adjacency: Mapping[str, Iterable[int]]) -> int:
    """Maximum bipartite matching size (Kuhn's augmenting paths; tiny graphs)."""
    match_of: dict[int, str] = {}

    def try_assign(cid: str, seen: set[int]) -> bool:
        for i in sorted(adjacency[cid]):
            if i in seen:
                continue
            seen.add(i)
            if i not in match_of or try_assign(match_of[i], seen):
                match_of[i] = cid
                return True
        return False

    return sum(1 for cid in sorted(adjacency) if try_assign(cid, set()))


def lumped_statistic(
    cluster: Cluster, assumptions: AssumptionSet, onom: Onomasticon
) -> int:
    """Comparison statistic: candidates matched on generic/gender pattern alone.

    Renditions and ratings are ignored (the statistic is invariant under
    splitting renditions into subcategories); the injectivity rule matches
    cluster_rr's. Chain neutralization and disqualifiers do not apply.
    """
    resolved = _resolve_cluster(onom, cluster)
    adjacency: dict[str, set[int]] = {}
    for cand in assumptions.sorted_candidates():
        hits = {
            i for i in range(len(cluster.inscriptions))
            if _pattern_matches(cand, resolved[i])
        }
        if hits:
            adjacency[cand.candidate_id] = hits
    if not assumptions.distinct_individuals:
        return len(adjacency)
    return _max_matching(adjacency)


def parse_cluster(doc: Mapping) -> Cluster:
    """Build a Cluster from one parsed structured-text document."""
    if not isinstance(doc, Mapping) or "inscriptions" not in doc:
        raise ClusterError("cluster file must hold a mapping with an 'inscriptions' list")
    unknown = set(doc) - {"cluster_id", "inscriptions"}
    if unknown:
        raise ClusterError(f"unknown top-level keys {sorted(unknown)}")
    inscriptions = []
    for k, item in enumerate(doc["inscriptions"] or []):
        if not isinstance(item, Mapping) or "chain" not in item:
            raise ClusterError(f"inscriptions[{k}]: needs a 'chain' list")
        unknown = set(item) - {"chain", "script", "transcription"}
        if unknown:
            raise ClusterError(f"inscriptions[{k}]: unknown keys {sorted(unknown)}")
        slots = []
        for pos, s in enumerate(item["chain"] or []):
            if not isinstance(s, Mapping) or "rendition" not in s or "gender" not in s:
                raise ClusterError(
                    f"inscriptions[{k}] chain[{pos}]: needs rendition and gender"
                )
            slots.append(
                Slot(
                    normalize_token(str(s["rendition"])),
                    str(s["gender"]).strip().upper(),
                    generic_id=normalize_token(str(s["generic"])) if "generic" in s else None,
                )
            )
        inscriptions.append(
            Inscription(
                tuple(slots),
                script=str(item.get("script", "")),
                transcription=str(item.get("transcription", "")),
            )
        )
    return Cluster(str(doc.get("cluster_id", "cluster")), tuple(inscriptions))


def read_cluster_yaml(path: str | Path) -> Cluster:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ClusterError(f"{path}: {exc}") from exc
    return parse_cluster(doc)
