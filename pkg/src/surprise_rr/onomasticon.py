"""Gender-stratified name lexicon: loading, queries, and bootstrap resampling.

Counts are integers of persons throughout. Frequencies and conditional tails
are exact rationals so that downstream tie comparisons stay reproducible.
Instances are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import LexiconError

__all__ = [
    "GENDERS",
    "RenditionCell",
    "GenericNameEntry",
    "Onomasticon",
    "normalize_token",
    "load_onomasticon",
    "read_onomasticon_csv",
    "generic_frequency",
    "with_unknown_rendition",
    "bootstrap_resample",
]

GENDERS = ("F", "M")

CSV_HEADER = ("generic_id", "gender", "rendition_id", "display", "count")

_WS_RUN = re.compile(r"\s+")


def normalize_token(token: str) -> str:
    """Lowercase and collapse whitespace; transliteration is the data producer's job."""
    return _WS_RUN.sub(" ", str(token).strip()).lower()


@dataclass(frozen=True)
class RenditionCell:
    """One attested form of a generic name, with its person count.

    Loaded lexicons require count >= 1; bootstrap resamples may carry
    zero-count cells (support shrinkage), which are never sampled and answer
    frequency queries with exact 0.
    """

    rendition_id: str
    display: str
    count: int


@dataclass(frozen=True)
class GenericNameEntry:
    """All renditions of one generic name within one gender stratum."""

    generic_id: str
    gender: str
    renditions: tuple[RenditionCell, ...]
    total: int

    def rendition(self, rendition_id: str) -> RenditionCell | None:
        for cell in self.renditions:
            if cell.rendition_id == rendition_id:
                return cell
        return None


@dataclass(frozen=True)
class Onomasticon:
    """Immutable lexicon keyed by (generic_id, gender), in canonical order."""

    entries: tuple[GenericNameEntry, ...]
    _by_key: dict = field(init=False, repr=False, compare=False)
    _totals: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_key: dict[tuple[str, str], GenericNameEntry] = {}
        totals: dict[str, int] = {g: 0 for g in GENDERS}
        for entry in self.entries:
            key = (entry.generic_id, entry.gender)
            if key in by_key:
                raise LexiconError(f"duplicate generic entry {key}")
            if entry.total != sum(c.count for c in entry.renditions):
                raise LexiconError(f"entry total mismatch for {key}")
            by_key[key] = entry
            totals[entry.gender] += entry.total
        object.__setattr__(self, "_by_key", by_key)
        object.__setattr__(self, "_totals", totals)

    def stratum_total(self, gender: str) -> int:
        _check_gender(gender)
        return self._totals[gender]

    def entry(self, generic_id: str, gender: str) -> GenericNameEntry:
        try:
            return self._by_key[(generic_id, gender)]
        except KeyError:
            raise LexiconError(f"no entry for ({generic_id}, {gender})") from None

    def get_entry(self, generic_id: str, gender: str) -> GenericNameEntry | None:
        return self._by_key.get((generic_id, gender))

    def entries_for(self, gender: str) -> tuple[GenericNameEntry, ...]:
        _check_gender(gender)
        return tuple(e for e in self.entries if e.gender == gender)

    def find_rendition(
        self, rendition_id: str, gender: str
    ) -> tuple[tuple[GenericNameEntry, RenditionCell], ...]:
        """All (entry, cell) pairs carrying this rendition within a stratum."""
        _check_gender(gender)
        hits = []
        for entry in self.entries:
            if entry.gender != gender:
                continue
            cell = entry.rendition(rendition_id)
            if cell is not None:
                hits.append((entry, cell))
        return tuple(hits)


def _check_gender(gender: str) -> None:
    if gender not in GENDERS:
        raise LexiconError(f"unknown gender token {gender!r}; expected one of {GENDERS}")


def _build(cells: Mapping[tuple[str, str], list[RenditionCell]]) -> Onomasticon:
    entries = []
    for (generic_id, gender) in sorted(cells):
        rends = tuple(sorted(cells[(generic_id, gender)], key=lambda c: c.rendition_id))
        entries.append(
            GenericNameEntry(generic_id, gender, rends, sum(c.count for c in rends))
        )
    return Onomasticon(tuple(entries))


def load_onomasticon(rows: Iterable[Mapping[str, object] | Sequence[object]]) -> Onomasticon:
    """Build a validated lexicon from tabular records.

    Each row carries generic_id, gender, rendition_id, display, count (as a
    mapping or a 5-item sequence). Row order never affects query results:
    entries and renditions are stored in canonical sorted order.
    """
    cells: dict[tuple[str, str], list[RenditionCell]] = {}
    seen: set[tuple[str, str, str]] = set()
    n_rows = 0
    for row in rows:
        n_rows += 1
        if isinstance(row, Mapping):
            try:
                raw = [row[k] for k in CSV_HEADER]
            except KeyError as exc:
                raise LexiconError(f"row {n_rows} missing column {exc}") from None
        else:
            raw = list(row)
            if len(raw) != len(CSV_HEADER):
                raise LexiconError(f"row {n_rows} has {len(raw)} fields, expected 5")
        generic_id = normalize_token(str(raw[0]))
        gender = str(raw[1]).strip().upper()
        rendition_id = normalize_token(str(raw[2]))
        display = str(raw[3])
        _check_gender(gender)
        if not generic_id or not rendition_id:
            raise LexiconError(f"row {n_rows}: empty generic_id or rendition_id")
        try:
            count = int(str(raw[4]).strip())
        except ValueError:
            raise LexiconError(f"row {n_rows}: count {raw[4]!r} is not an integer") from None
        if count < 1:
            raise LexiconError(f"row {n_rows}: count must be >= 1, got {count}")
        key = (generic_id, gender, rendition_id)
        if key in seen:
            raise LexiconError(f"duplicate rendition {key}")
        seen.add(key)
        cells.setdefault((generic_id, gender), []).append(
            RenditionCell(rendition_id, display, count)
        )
    if n_rows == 0:
        raise LexiconError("empty input: no lexicon rows")
    return _build(cells)


def read_onomasticon_csv(path: str | Path) -> Onomasticon:
    """Read the UTF-8 CSV lexicon format (header: generic_id,gender,rendition_id,display,count)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(CSV_HEADER):
            raise LexiconError(
                f"{path}: bad header {reader.fieldnames}, expected {','.join(CSV_HEADER)}"
            )
        return load_onomasticon(list(reader))


def generic_frequency(onom: Onomasticon, generic_id: str, gender: str) -> Fraction:
    """Population share of a generic name within its gender stratum, exact."""
    entry = onom.entry(generic_id, gender)
    total = onom.stratum_total(gender)
    if total == 0:
        raise LexiconError(f"empty {gender} stratum")
    return Fraction(entry.total, total)


def with_unknown_rendition(
    onom: Onomasticon, generic_id: str, gender: str, rendition_id: str, display: str | None = None
) -> Onomasticon:
    """Return a new lexicon with `rendition_id` added at count 1 under an existing generic.

    A cell present with count 0 (bootstrap support shrinkage) is floored back
    to 1; a cell present with count >= 1 is an error.
    """
    entry = onom.entry(generic_id, gender)
    rendition_id = normalize_token(rendition_id)
    existing = entry.rendition(rendition_id)
    if existing is not None and existing.count >= 1:
        raise LexiconError(
            f"rendition {rendition_id!r} already present under ({generic_id}, {gender})"
        )
    cells: dict[tuple[str, str], list[RenditionCell]] = {}
    for e in onom.entries:
        cells[(e.generic_id, e.gender)] = [
            c for c in e.renditions if not (e is entry and c.rendition_id == rendition_id)
        ]
    cells[(generic_id, gender)].append(
        RenditionCell(rendition_id, display if display is not None else rendition_id, 1)
    )
    return _build(cells)


def bootstrap_resample(onom: Onomasticon, rng: np.random.Generator) -> Onomasticon:
    """Redraw each gender stratum's persons with replacement, totals preserved.

    Equivalent to one multinomial over the stratum's rendition cells. Cells
    may come back with count 0 (they stay queryable but leave the sampling
    support); no unseen renditions are ever introduced.
    """
    cells: dict[tuple[str, str], list[RenditionCell]] = {
        (e.generic_id, e.gender): [] for e in onom.entries
    }
    for gender in GENDERS:
        entries = onom.entries_for(gender)
        flat = [(e, c) for e in entries for c in e.renditions]
        total = onom.stratum_total(gender)
        if not flat or total == 0:
            continue
        counts = np.array([c.count for _, c in flat], dtype=np.int64)
        cum = np.cumsum(counts)
        persons = rng.integers(0, total, size=total)
        drawn = np.bincount(
            np.searchsorted(cum, persons, side="right"), minlength=len(flat)
        )
        for (entry, cell), n in zip(flat, drawn):
            cells[(entry.generic_id, entry.gender)].append(
                RenditionCell(cell.rendition_id, cell.display, int(n))
            )
    return _build(cells)
