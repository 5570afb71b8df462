"""Monte Carlo null distribution of the cluster statistic, conditioned on the
observed cluster's configuration (chain lengths and slot genders).

Every rule of the observed pipeline (Other -> 1, chain neutralization,
disqualifiers, assignment optimization) applies identically to simulated
clusters. Hit counting compares exact integer cross-products, so ties in the
discrete null are counted exactly; a vectorized float path handles draws that
are unambiguously above or below the observed value.

RNG contract: numpy PCG64 seeded through SeedSequence. Simulation is split
into fixed-size chunks, one spawned substream per chunk, so sequential and
parallel runs aggregate to bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .assumptions import AssumptionSet
from .engine import (
    Cluster,
    Inscription,
    Slot,
    _max_matching,
    _optimal_assignment,
    cluster_rr,
    lumped_statistic,
)
from .errors import ClusterError, LexiconError
from .onomasticon import GENDERS, Onomasticon

__all__ = [
    "BIN_WIDTH",
    "CHUNK_SIZE",
    "ClusterConfiguration",
    "TailAreaEstimate",
    "extract_configuration",
    "sample_cluster",
    "estimate_tail_area",
    "tomb_correction",
]

BIN_WIDTH = 0.25
CHUNK_SIZE = 4096
_TIE_BAND = 1e-9  # relative width; float products are accurate to ~1e-15


@dataclass(frozen=True)
class ClusterConfiguration:
    """Structure-only projection of a cluster: per-inscription slot genders."""

    chains: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.chains:
            raise ClusterError("configuration must contain at least one inscription")
        for chain in self.chains:
            if not 1 <= len(chain) <= 3:
                raise ClusterError(f"chain length must be 1..3, got {len(chain)}")
            for g in chain:
                if g not in GENDERS:
                    raise ClusterError(f"unknown gender {g!r} in configuration")
            for g in chain[1:]:
                if g != "M":
                    raise ClusterError("patronym slots must be gender M")

    @property
    def n_slots(self) -> int:
        return sum(len(c) for c in self.chains)


def extract_configuration(cluster: Cluster) -> ClusterConfiguration:
    """Project a cluster to its configuration; renditions are discarded."""
    return ClusterConfiguration(
        tuple(tuple(slot.gender for slot in insc.slots) for insc in cluster.inscriptions)
    )


@dataclass(frozen=True)
class TailAreaEstimate:
    """Monte Carlo tail area with add-one estimator and histogram.

    p_hat = (k+1)/(N+1) where k counts simulated statistics <= observed (RR)
    or >= observed (lumped). The histogram bins log10 of the simulated RR
    (raw counts for the lumped statistic) at fixed width `bin_width`,
    excluding HARD-disqualified draws. An observed-disqualified cluster
    reports p_hat = 1 with n_sims = 0.
    """

    statistic: str
    n_sims: int
    n_hits: int
    p_hat: float
    mc_se: float
    histogram: tuple[tuple[int, int], ...]
    bin_width: float
    seed: int | None
    observed: float
    observed_exact: Fraction | int | None
    observed_disqualified: bool
    n_simulated_disqualified: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.p_hat <= 1.0:
            raise ValueError(f"p_hat out of (0, 1]: {self.p_hat}")
        if self.n_hits > self.n_sims:
            raise ValueError("n_hits exceeds n_sims")


# ---------------------------------------------------------------------------
# Compiled tables: a flat cell space (all F cells, then all M cells) plus
# per-candidate qualifying-count arrays, so a simulated cluster is just a row
# of cell indices.
# ---------------------------------------------------------------------------


@dataclass
class _CandTables:
    candidate_id: str
    n_slots: int
    qual: list  # per position: np.int64 per cell, -1 = no match
    qual_l: list
    pat: list  # per position: np.bool_ per cell (generic/gender pattern only)
    pat_l: list
    den_pos: list
    den: int
    den_f: float


@dataclass
class _RuleTables:
    per: np.ndarray
    per_l: list
    pat: np.ndarray | None
    pat_l: list | None
    hard: bool
    pen_num: int
    pen_den: int


@dataclass
class _Tables:
    chains: tuple
    totals: tuple  # (T_F, T_M)
    cum_f: np.ndarray
    cum_m: np.ndarray
    cum_all: np.ndarray
    n_f_cells: int
    entry_ord: np.ndarray
    entry_ord_l: list
    cell_gender: list
    cell_generic: list
    cell_rendition: list
    insc_start: list
    insc_len: list
    slot_cols: list  # (col, gender, conditioned)
    two_chain_pat_cols: list  # (insc index, patronym col)
    witness_personal_cols: list  # (insc index, personal col) for chains >= 2
    cands: list
    applicable: list
    rules: list
    distinct: bool
    chain_flag: bool
    n_insc: int


def _compile(
    config: ClusterConfiguration, assumptions: AssumptionSet, onom: Onomasticon
) -> _Tables:
    f_pairs = [(e, c) for e in onom.entries_for("F") for c in e.renditions]
    m_pairs = [(e, c) for e in onom.entries_for("M") for c in e.renditions]
    pairs = f_pairs + m_pairs
    n_f_cells = len(f_pairs)
    totals = (onom.stratum_total("F"), onom.stratum_total("M"))
    for chain in config.chains:
        for g in chain:
            if onom.stratum_total(g) == 0:
                raise LexiconError(f"empty {g} stratum: cannot sample configuration")

    counts = np.array([c.count for _, c in pairs], dtype=np.int64)
    cum_f = np.cumsum(counts[:n_f_cells])
    cum_m = np.cumsum(counts[n_f_cells:])
    cum_all = np.cumsum(counts)

    entry_index = {(e.generic_id, e.gender): k for k, e in enumerate(onom.entries)}
    entry_ord = np.array(
        [entry_index[(e.generic_id, e.gender)] for e, _ in pairs], dtype=np.int64
    )
    cell_pos = {}
    for gidx, (e, c) in enumerate(pairs):
        cell_pos[(e.generic_id, e.gender, c.rendition_id)] = gidx

    insc_start, insc_len, slot_cols = [], [], []
    col = 0
    for chain in config.chains:
        insc_start.append(col)
        insc_len.append(len(chain))
        for pos, g in enumerate(chain):
            conditioned = assumptions.condition_on_gender or pos > 0
            slot_cols.append((col, g, conditioned))
            col += 1

    two_chain_pat_cols = [
        (i, insc_start[i] + 1) for i in range(len(config.chains)) if insc_len[i] == 2
    ]
    witness_personal_cols = [
        (i, insc_start[i]) for i in range(len(config.chains)) if insc_len[i] >= 2
    ]

    cands = []
    for cand in assumptions.sorted_candidates():
        specs = cand.slot_specs()
        qual, pat, den_pos = [], [], []
        for _, spec in specs:
            q = np.full(len(pairs), -1, dtype=np.int64)
            p = np.zeros(len(pairs), dtype=bool)
            entry = onom.get_entry(spec.generic_id, spec.gender)
            if entry is not None:
                for c in entry.renditions:
                    gidx = cell_pos[(spec.generic_id, spec.gender, c.rendition_id)]
                    r = spec.rating(c.rendition_id)
                    q[gidx] = sum(
                        cc.count
                        for cc in entry.renditions
                        if spec.rating(cc.rendition_id) >= r
                    )
                    p[gidx] = True
            qual.append(q)
            pat.append(p)
            den_pos.append(onom.stratum_total(spec.gender))
        den = math.prod(den_pos)
        cands.append(
            _CandTables(
                candidate_id=cand.candidate_id,
                n_slots=len(specs),
                qual=qual,
                qual_l=[a.tolist() for a in qual],
                pat=pat,
                pat_l=[a.tolist() for a in pat],
                den_pos=den_pos,
                den=den,
                den_f=float(den),
            )
        )
    applicable = [
        [ci for ci, ct in enumerate(cands) if ct.n_slots <= insc_len[i]]
        for i in range(len(config.chains))
    ]

    rules = []
    for rule in assumptions.disqualifiers:
        per = np.zeros(len(pairs), dtype=bool)
        entry = onom.get_entry(*rule.personal)
        if entry is not None:
            for c in entry.renditions:
                per[cell_pos[(rule.personal[0], rule.personal[1], c.rendition_id)]] = True
        pat = None
        if rule.patronym is not None:
            pat = np.zeros(len(pairs), dtype=bool)
            entry = onom.get_entry(*rule.patronym)
            if entry is not None:
                for c in entry.renditions:
                    pat[cell_pos[(rule.patronym[0], rule.patronym[1], c.rendition_id)]] = True
        if rule.hard:
            pen_num = pen_den = 1
        else:
            pen_num, pen_den = rule.penalty.numerator, rule.penalty.denominator
        rules.append(
            _RuleTables(
                per=per,
                per_l=per.tolist(),
                pat=pat,
                pat_l=pat.tolist() if pat is not None else None,
                hard=rule.hard,
                pen_num=pen_num,
                pen_den=pen_den,
            )
        )

    return _Tables(
        chains=config.chains,
        totals=totals,
        cum_f=cum_f,
        cum_m=cum_m,
        cum_all=cum_all,
        n_f_cells=n_f_cells,
        entry_ord=entry_ord,
        entry_ord_l=entry_ord.tolist(),
        cell_gender=[e.gender for e, _ in pairs],
        cell_generic=[e.generic_id for e, _ in pairs],
        cell_rendition=[c.rendition_id for _, c in pairs],
        insc_start=insc_start,
        insc_len=insc_len,
        slot_cols=slot_cols,
        two_chain_pat_cols=two_chain_pat_cols,
        witness_personal_cols=witness_personal_cols,
        cands=cands,
        applicable=applicable,
        rules=rules,
        distinct=assumptions.distinct_individuals,
        chain_flag=assumptions.chain_youngest_neutral,
        n_insc=len(config.chains),
    )


def _draw_cells(tables: _Tables, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw n simulated clusters as rows of global cell indices.

    Each slot draws one person uniformly from its stratum (or from both
    strata by share, for unconditioned personal slots); columns are filled in
    fixed slot order so the stream is chunk-deterministic.
    """
    t_f, t_m = tables.totals
    out = np.empty((n, len(tables.slot_cols)), dtype=np.int64)
    for col, gender, conditioned in tables.slot_cols:
        if not conditioned:
            persons = rng.integers(0, t_f + t_m, size=n)
            out[:, col] = np.searchsorted(tables.cum_all, persons, side="right")
        elif gender == "F":
            persons = rng.integers(0, t_f, size=n)
            out[:, col] = np.searchsorted(tables.cum_f, persons, side="right")
        else:
            persons = rng.integers(0, t_m, size=n)
            out[:, col] = tables.n_f_cells + np.searchsorted(
                tables.cum_m, persons, side="right"
            )
    return out


def _neutral_flags(tables: _Tables, cells: np.ndarray) -> dict[int, np.ndarray]:
    n = cells.shape[0]
    neut: dict[int, np.ndarray] = {}
    if not tables.chain_flag:
        return neut
    for i, pat_col in tables.two_chain_pat_cols:
        acc = np.zeros(n, dtype=bool)
        pat_ord = tables.entry_ord[cells[:, pat_col]]
        for j, per_col in tables.witness_personal_cols:
            if j == i:
                continue
            acc |= tables.entry_ord[cells[:, per_col]] == pat_ord
        if acc.any():
            neut[i] = acc
    return neut


def _row_neutral(tables: _Tables, row: list) -> set[int]:
    neutral: set[int] = set()
    if not tables.chain_flag:
        return neutral
    ords = tables.entry_ord_l
    for i, pat_col in tables.two_chain_pat_cols:
        po = ords[row[pat_col]]
        for j, per_col in tables.witness_personal_cols:
            if j != i and ords[row[per_col]] == po:
                neutral.add(i)
                break
    return neutral


def _eval_row_rr(tables: _Tables, row: list) -> tuple[int, int, bool]:
    """Exact (numerator, denominator, disqualified) for one simulated cluster."""
    neutral = _row_neutral(tables, row)
    num = den = 1
    for rule in tables.rules:
        for i in range(tables.n_insc):
            if rule.pat_l is not None and tables.insc_len[i] < 2:
                continue
            start = tables.insc_start[i]
            if not rule.per_l[row[start]]:
                continue
            if rule.pat_l is not None and not rule.pat_l[row[start + 1]]:
                continue
            if rule.hard:
                return 0, 1, True
            if i not in neutral:
                num *= rule.pen_num
                den *= rule.pen_den

    edges: dict[tuple[int, str], Fraction] = {}
    parts: dict[tuple[int, str], tuple[int, int]] = {}
    for i in range(tables.n_insc):
        if i in neutral:
            continue
        start = tables.insc_start[i]
        for ci in tables.applicable[i]:
            ct = tables.cands[ci]
            nv = 1
            for pos in range(ct.n_slots):
                q = ct.qual_l[pos][row[start + pos]]
                if q < 0:
                    nv = -1
                    break
                nv *= q
            if 0 <= nv < ct.den:
                key = (i, ct.candidate_id)
                edges[key] = Fraction(nv, ct.den)
                parts[key] = (nv, ct.den)
    if edges:
        chosen = _optimal_assignment(edges, tables.distinct)
        for i, cid in chosen.items():
            nv, dv = parts[(i, cid)]
            num *= nv
            den *= dv
    return num, den, False


def _log10_bin(value: float) -> int:
    return math.floor(math.log10(value) / BIN_WIDTH)


def _rr_block(
    tables: _Tables,
    cells: np.ndarray,
    obs_num: int,
    obs_den: int,
    obs_f: float,
) -> tuple[int, dict[int, int], int]:
    n = cells.shape[0]
    neut = _neutral_flags(tables, cells)
    zeros = np.zeros(n, dtype=bool)

    hard_any = np.zeros(n, dtype=bool)
    pen_any = np.zeros(n, dtype=bool)
    for rule in tables.rules:
        for i in range(tables.n_insc):
            if rule.pat is not None and tables.insc_len[i] < 2:
                continue
            start = tables.insc_start[i]
            hit = rule.per[cells[:, start]]
            if rule.pat is not None:
                hit = hit & rule.pat[cells[:, start + 1]]
            if rule.hard:
                hard_any |= hit
            else:
                pen_any |= hit & ~neut.get(i, zeros)

    prod_f = np.ones(n)
    conflict = np.zeros(n, dtype=bool)
    act_count = (
        np.zeros((len(tables.cands), n), dtype=np.int8) if tables.distinct else None
    )
    for i in range(tables.n_insc):
        start = tables.insc_start[i]
        not_neut = ~neut[i] if i in neut else None
        fi = np.ones(n)
        for ci in tables.applicable[i]:
            ct = tables.cands[ci]
            nv = None
            for pos in range(ct.n_slots):
                q = ct.qual[pos][cells[:, start + pos]]
                nv = q if nv is None else np.where((nv < 0) | (q < 0), -1, nv * q)
            act = (nv >= 0) & (nv < ct.den)
            if not_neut is not None:
                act &= not_neut
            if act_count is not None:
                act_count[ci] += act
            fi = np.minimum(fi, np.where(act, nv / ct.den_f, 1.0))
        prod_f *= fi
    if act_count is not None:
        conflict = (act_count >= 2).any(axis=0)

    clean = ~conflict & ~hard_any & ~pen_any
    definite_hit = clean & (prod_f < obs_f * (1.0 - _TIE_BAND))
    definite_miss = clean & (prod_f > obs_f * (1.0 + _TIE_BAND))
    hits = int(definite_hit.sum())

    hist: dict[int, int] = {}
    vec_rows = definite_hit | definite_miss
    if vec_rows.any():
        bins = np.floor(np.log10(prod_f[vec_rows]) / BIN_WIDTH).astype(np.int64)
        uniq, cnt = np.unique(bins, return_counts=True)
        for b, c in zip(uniq.tolist(), cnt.tolist()):
            hist[b] = hist.get(b, 0) + c

    n_disq = 0
    rest = np.nonzero(~vec_rows)[0]
    if rest.size:
        for row in cells[rest].tolist():
            num, den, disq = _eval_row_rr(tables, row)
            if disq:
                n_disq += 1
                continue
            if num * obs_den <= obs_num * den:
                hits += 1
            b = _log10_bin(num / den)  # int true division is correctly rounded
            hist[b] = hist.get(b, 0) + 1
    return hits, hist, n_disq


def _eval_row_lumped(tables: _Tables, row: list) -> int:
    adjacency: dict[str, set[int]] = {}
    for i in range(tables.n_insc):
        start = tables.insc_start[i]
        for ci in tables.applicable[i]:
            ct = tables.cands[ci]
            if all(ct.pat_l[pos][row[start + pos]] for pos in range(ct.n_slots)):
                adjacency.setdefault(ct.candidate_id, set()).add(i)
    if not tables.distinct:
        return len(adjacency)
    return _max_matching(adjacency)


def _lumped_block(
    tables: _Tables, cells: np.ndarray, obs_count: int
) -> tuple[int, dict[int, int], int]:
    n = cells.shape[0]
    match_ic = {}
    cand_cnt = np.zeros((len(tables.cands), n), dtype=np.int8)
    insc_cnt = np.zeros((tables.n_insc, n), dtype=np.int8)
    for i in range(tables.n_insc):
        start = tables.insc_start[i]
        for ci in tables.applicable[i]:
            ct = tables.cands[ci]
            m = np.ones(n, dtype=bool)
            for pos in range(ct.n_slots):
                m &= ct.pat[pos][cells[:, start + pos]]
            match_ic[(i, ci)] = m
            cand_cnt[ci] += m
            insc_cnt[i] += m
    counts = (cand_cnt >= 1).sum(axis=0).astype(np.int64)
    if tables.distinct:
        tangled = (cand_cnt >= 2).any(axis=0) | (insc_cnt >= 2).any(axis=0)
        for idx, row in zip(
            np.nonzero(tangled)[0].tolist(), cells[tangled].tolist()
        ):
            counts[idx] = _eval_row_lumped(tables, row)
    hits = int((counts >= obs_count).sum())
    hist: dict[int, int] = {}
    uniq, cnt = np.unique(counts, return_counts=True)
    for v, c in zip(uniq.tolist(), cnt.tolist()):
        b = math.floor(v / BIN_WIDTH)
        hist[b] = hist.get(b, 0) + c
    return hits, hist, 0


def _chunk_worker(
    tables: _Tables,
    child: np.random.SeedSequence,
    size: int,
    statistic: str,
    obs: tuple,
) -> tuple[int, dict[int, int], int]:
    rng = np.random.default_rng(child)
    cells = _draw_cells(tables, rng, size)
    if statistic == "rr":
        return _rr_block(tables, cells, *obs)
    return _lumped_block(tables, cells, obs[0])


def _simulate(
    tables: _Tables,
    n_sims: int,
    root: np.random.SeedSequence,
    statistic: str,
    obs: tuple,
    threads: int = 1,
) -> tuple[int, dict[int, int], int]:
    sizes = [CHUNK_SIZE] * (n_sims // CHUNK_SIZE)
    if n_sims % CHUNK_SIZE:
        sizes.append(n_sims % CHUNK_SIZE)
    children = root.spawn(len(sizes))
    if threads > 1 and len(sizes) > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=threads)(
            delayed(_chunk_worker)(tables, child, size, statistic, obs)
            for child, size in zip(children, sizes)
        )
    else:
        results = [
            _chunk_worker(tables, child, size, statistic, obs)
            for child, size in zip(children, sizes)
        ]
    hits, n_disq = 0, 0
    hist: dict[int, int] = {}
    for h, hd, nd in results:
        hits += h
        n_disq += nd
        for b, c in hd.items():
            hist[b] = hist.get(b, 0) + c
    return hits, hist, n_disq


def sample_cluster(
    config: ClusterConfiguration,
    onom: Onomasticon,
    rng: np.random.Generator,
    condition_on_gender: bool = True,
) -> Cluster:
    """Draw one cluster from the null: each slot draws a person uniformly from
    its gender stratum (generic proportional to entry totals, rendition
    proportional within the generic); slots and inscriptions independent."""
    strata = {}
    for gender in GENDERS:
        pairs = [(e, c) for e in onom.entries_for(gender) for c in e.renditions]
        cum = np.cumsum([c.count for _, c in pairs]) if pairs else np.array([], dtype=np.int64)
        strata[gender] = (pairs, cum, onom.stratum_total(gender))

    def draw(gender: str, conditioned: bool) -> Slot:
        if not conditioned:
            t_f, t_m = strata["F"][2], strata["M"][2]
            if t_f + t_m == 0:
                raise LexiconError("empty lexicon: cannot sample")
            person = int(rng.integers(0, t_f + t_m))
            gender = "F" if person < t_f else "M"
            person = person if person < t_f else person - t_f
        else:
            pairs, cum, total = strata[gender]
            if total == 0:
                raise LexiconError(f"empty {gender} stratum: cannot sample")
            person = int(rng.integers(0, total))
        pairs, cum, _ = strata[gender]
        entry, cell = pairs[int(np.searchsorted(cum, person, side="right"))]
        return Slot(cell.rendition_id, gender, generic_id=entry.generic_id)

    inscriptions = []
    for chain in config.chains:
        slots = [
            draw(g, condition_on_gender or pos > 0) for pos, g in enumerate(chain)
        ]
        inscriptions.append(Inscription(tuple(slots)))
    return Cluster("simulated", tuple(inscriptions))


def _cluster_from_cells(tables: _Tables, row: Sequence[int], cluster_id: str) -> Cluster:
    inscriptions = []
    for i in range(tables.n_insc):
        start = tables.insc_start[i]
        slots = []
        for pos in range(tables.insc_len[i]):
            g = row[start + pos]
            slots.append(
                Slot(
                    tables.cell_rendition[g],
                    tables.cell_gender[g],
                    generic_id=tables.cell_generic[g],
                )
            )
        inscriptions.append(Inscription(tuple(slots)))
    return Cluster(cluster_id, tuple(inscriptions))


def _as_seedseq(seed) -> tuple[np.random.SeedSequence, int | None]:
    if isinstance(seed, np.random.SeedSequence):
        return seed, None
    return np.random.SeedSequence(int(seed)), int(seed)


def estimate_tail_area(
    cluster: Cluster,
    assumptions: AssumptionSet,
    onom: Onomasticon,
    statistic: str = "rr",
    n_sims: int | None = None,
    seed: int | np.random.SeedSequence = 0,
    threads: int = 1,
) -> TailAreaEstimate:
    """Tail-area p-value of the observed cluster statistic under the null.

    The assumption set must already be validated against `onom` (use the
    effective lexicon from the validation report). An observed-disqualified
    cluster returns p_hat = 1 without simulating.
    """
    statistic = statistic.lower()
    if statistic not in ("rr", "lumped"):
        raise ValueError(f"unknown statistic {statistic!r}; expected 'rr' or 'lumped'")
    root, seed_record = _as_seedseq(seed)

    breakdown = cluster_rr(cluster, assumptions, onom)
    if breakdown.disqualified:
        return TailAreaEstimate(
            statistic=statistic,
            n_sims=0,
            n_hits=0,
            p_hat=1.0,
            mc_se=0.0,
            histogram=(),
            bin_width=BIN_WIDTH,
            seed=seed_record,
            observed=math.inf,
            observed_exact=None,
            observed_disqualified=True,
        )

    n = int(n_sims) if n_sims is not None else assumptions.mc_sims
    if n < 1:
        raise ValueError(f"n_sims must be >= 1, got {n}")

    config = extract_configuration(cluster)
    tables = _compile(config, assumptions, onom)
    if statistic == "rr":
        rr = breakdown.product_exact
        obs = (rr.numerator, rr.denominator, float(rr))
        observed_exact: Fraction | int = rr
        observed = float(rr)
    else:
        k = lumped_statistic(cluster, assumptions, onom)
        obs = (k,)
        observed_exact = k
        observed = float(k)

    hits, hist, n_disq = _simulate(tables, n, root, statistic, obs, threads=threads)
    p_hat = (hits + 1) / (n + 1)
    return TailAreaEstimate(
        statistic=statistic,
        n_sims=n,
        n_hits=hits,
        p_hat=p_hat,
        mc_se=math.sqrt(p_hat * (1.0 - p_hat) / n),
        histogram=tuple(sorted(hist.items())),
        bin_width=BIN_WIDTH,
        seed=seed_record,
        observed=observed,
        observed_exact=observed_exact,
        observed_disqualified=False,
        n_simulated_disqualified=n_disq,
    )


def tomb_correction(p_hat: float, tombs: int) -> tuple[float, float]:
    """Family-wise corrections over comparable tombsites.

    Returns (Bonferroni min(1, T*p), exact 1-(1-p)^T).
    """
    if tombs < 1:
        raise ValueError(f"tombs must be >= 1, got {tombs}")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"p_hat out of [0, 1]: {p_hat}")
    return (min(1.0, tombs * p_hat), 1.0 - (1.0 - p_hat) ** tombs)
