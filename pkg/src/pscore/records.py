"""Ingestion of publication records.

Parses JSONL/CSV publication lists, normalizes names, and assembles the
deduplicated dataset that all downstream counting operates on. Parsing is
eager and line-addressed: every error names the offending line. The whole
dataset is held in memory; inputs are desk-scale publication lists, not
full bibliographic dumps.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import DatasetError, ParseError, ValidationError

log = logging.getLogger(__name__)

CSV_COLUMNS = ("id", "title", "group", "authors", "venue", "year")
AUTHOR_SEP = ";"


def normalize_name(name: str) -> str:
    """Trim and collapse internal whitespace runs to a single space."""
    return " ".join(name.split())


def fold(name: str) -> str:
    """Case-insensitive comparison key for a normalized name.

    Names are compared case-folded but displayed with their first-seen
    casing, so "SIGIR" and "sigir" are the same venue and reports show
    whichever spelling appeared first.
    """
    return name.casefold()


@dataclass(frozen=True)
class PublicationRecord:
    """One paper occurrence: a group published something at a venue."""

    group: str
    authors: tuple[str, ...]
    venue: str
    paper_id: str | None = None
    title: str | None = None
    year: int | None = None

    def dedup_key(self) -> str | None:
        """Identity used for distinct-paper counting.

        The opaque paper id wins; otherwise the case-folded normalized
        title. Records with neither are never merged (key ``None``).
        """
        if self.paper_id is not None:
            return "id:" + self.paper_id
        if self.title is not None:
            return "title:" + fold(normalize_name(self.title))
        return None


@dataclass(frozen=True)
class Dataset:
    """Deduplicated records over fixed group and venue index spaces.

    ``groups`` preserves caller order; ``venues`` is the sorted list of
    venues that actually received publications from the reference groups,
    so every venue is guaranteed a positive publication count downstream.
    ``dropped_foreign`` and ``dedup_merged`` are ingestion diagnostics and
    do not take part in equality.
    """

    groups: tuple[str, ...]
    venues: tuple[str, ...]
    records: tuple[PublicationRecord, ...]
    corpus_author_counts: Mapping[str, int] | None = None
    dropped_foreign: int = field(default=0, compare=False)
    dedup_merged: int = field(default=0, compare=False)

    def venues_of(self, group: str) -> tuple[str, ...]:
        """Venues where one group publishes, in dataset venue order."""
        key = fold(normalize_name(group))
        hit = {fold(r.venue) for r in self.records if fold(r.group) == key}
        return tuple(v for v in self.venues if fold(v) in hit)


def _ensure_text(stream: IO[bytes] | IO[str]) -> IO[str]:
    if isinstance(stream.read(0), bytes):
        return io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")
    return stream


def _required_name(value: object, name: str, line: int) -> str:
    if value is None:
        raise ValidationError(f"missing required field '{name}'", line=line, field=name)
    if not isinstance(value, str):
        raise ValidationError(f"field '{name}' must be a string", line=line, field=name)
    normalized = normalize_name(value)
    if not normalized:
        raise ValidationError(f"field '{name}' is empty", line=line, field=name)
    return normalized


def _optional_text(value: object, name: str, line: int) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValidationError(f"field '{name}' must be a string", line=line, field=name)
    normalized = normalize_name(value)
    return normalized or None


def _parse_year(value: object, line: int) -> int | None:
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise ValidationError("field 'year' must be an integer", line=line, field="year")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            pass
    raise ValidationError(f"field 'year' must be an integer, got {value!r}", line=line, field="year")


def _record_from_jsonl(obj: dict, line: int) -> PublicationRecord:
    raw_id = obj.get("id")
    if raw_id is not None and isinstance(raw_id, int) and not isinstance(raw_id, bool):
        raw_id = str(raw_id)
    if raw_id is not None and not isinstance(raw_id, str):
        raise ValidationError("field 'id' must be a string", line=line, field="id")
    paper_id = raw_id.strip() or None if isinstance(raw_id, str) else None

    raw_authors = obj.get("authors")
    if raw_authors is None:
        raise ValidationError("missing required field 'authors'", line=line, field="authors")
    if not isinstance(raw_authors, list):
        raise ValidationError("field 'authors' must be an array of strings", line=line, field="authors")
    authors = []
    for a in raw_authors:
        if not isinstance(a, str):
            raise ValidationError("field 'authors' must be an array of strings", line=line, field="authors")
        name = normalize_name(a)
        if name:
            authors.append(name)
    if not authors:
        raise ValidationError("field 'authors' is empty", line=line, field="authors")

    return PublicationRecord(
        group=_required_name(obj.get("group"), "group", line),
        authors=tuple(authors),
        venue=_required_name(obj.get("venue"), "venue", line),
        paper_id=paper_id,
        title=_optional_text(obj.get("title"), "title", line),
        year=_parse_year(obj.get("year"), line),
    )


def _parse_jsonl(text: IO[str]) -> Iterator[PublicationRecord]:
    for lineno, line in enumerate(text, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", line=lineno)
        yield _record_from_jsonl(obj, lineno)


def _parse_csv(text: IO[str]) -> Iterator[PublicationRecord]:
    reader = csv.DictReader(text, restkey="_extra", restval=None)
    header = reader.fieldnames
    if header is None:
        return  # zero-byte input: no rows at all
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"header is missing column(s): {', '.join(missing)}", line=1)
    for row in reader:
        lineno = reader.line_num
        if row.get("_extra"):
            raise ParseError("row has more fields than the header", line=lineno)
        authors_cell = row.get("authors")
        if authors_cell is None or not authors_cell.strip():
            raise ValidationError("missing required field 'authors'", line=lineno, field="authors")
        authors = tuple(
            name for part in authors_cell.split(AUTHOR_SEP) if (name := normalize_name(part))
        )
        if not authors:
            raise ValidationError("field 'authors' is empty", line=lineno, field="authors")
        raw_id = (row.get("id") or "").strip()
        yield PublicationRecord(
            group=_required_name(row.get("group") or None, "group", lineno),
            authors=authors,
            venue=_required_name(row.get("venue") or None, "venue", lineno),
            paper_id=raw_id or None,
            title=_optional_text(row.get("title") or None, "title", lineno),
            year=_parse_year(row.get("year"), lineno),
        )


def parse_records(stream: IO[bytes] | IO[str], format: str) -> list[PublicationRecord]:
    """Parse publication records from ``stream`` in input order.

    ``format`` is ``"jsonl"`` (one object per line, keys id/title/group/
    authors/venue/year) or ``"csv"`` (header row required, authors column
    semicolon-separated, RFC-4180 quoting, UTF-8). All names come out
    whitespace-normalized. Raises :class:`ParseError` for structural
    damage and :class:`ValidationError` for missing or ill-typed fields,
    both carrying the line number.
    """
    text = _ensure_text(stream)
    if format == "jsonl":
        return list(_parse_jsonl(text))
    if format == "csv":
        return list(_parse_csv(text))
    raise ValidationError(f"unknown record format {format!r}; expected 'jsonl' or 'csv'")


def serialize_records(records: Iterable[PublicationRecord], format: str) -> str:
    """Serialize records so that re-parsing yields an identical list."""
    records = list(records)
    if format == "jsonl":
        lines = []
        for rec in records:
            obj: dict[str, object] = {}
            if rec.paper_id is not None:
                obj["id"] = rec.paper_id
            if rec.title is not None:
                obj["title"] = rec.title
            obj["group"] = rec.group
            obj["authors"] = list(rec.authors)
            obj["venue"] = rec.venue
            if rec.year is not None:
                obj["year"] = rec.year
            lines.append(json.dumps(obj, ensure_ascii=False))
        return "".join(line + "\n" for line in lines)
    if format != "csv":
        raise ValidationError(f"unknown record format {format!r}; expected 'jsonl' or 'csv'")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        for a in rec.authors:
            if AUTHOR_SEP in a:
                raise ValidationError(
                    f"author name {a!r} contains {AUTHOR_SEP!r}, which CSV cannot represent; use JSONL"
                )
        writer.writerow([
            rec.paper_id or "",
            rec.title or "",
            rec.group,
            AUTHOR_SEP.join(rec.authors),
            rec.venue,
            rec.year if rec.year is not None else "",
        ])
    return buf.getvalue()


def filter_by_year(
    records: Iterable[PublicationRecord],
    start: int | None = None,
    end: int | None = None,
) -> list[PublicationRecord]:
    """Keep records whose year lies in the inclusive range [start, end].

    Records without a year are excluded whenever a bound is given, since
    their membership in the window cannot be established; the exclusion
    count is reported on the diagnostic stream.
    """
    records = list(records)
    if start is None and end is None:
        return records
    kept, undated = [], 0
    for rec in records:
        if rec.year is None:
            undated += 1
            continue
        if start is not None and rec.year < start:
            continue
        if end is not None and rec.year > end:
            continue
        kept.append(rec)
    if undated:
        log.warning("year filter excluded %d record(s) without a year", undated)
    return kept


def build_dataset(
    records: Iterable[PublicationRecord],
    reference_groups: Sequence[str],
    *,
    corpus_author_counts: Mapping[str, int] | None = None,
) -> Dataset:
    """Filter to the reference groups, deduplicate, and fix index spaces.

    Records from groups outside ``reference_groups`` are dropped (count
    reported). Records are deduplicated per (paper identity, group), so a
    paper coauthored across two reference groups still counts once for
    each. Venues are the sorted distinct venues of the surviving records.

    Raises :class:`DatasetError` if nothing survives or if any reference
    group ends up with zero publications, since a silent group has no
    publication fractions to propagate.
    """
    groups: list[str] = []
    group_index: dict[str, int] = {}
    for raw in reference_groups:
        name = normalize_name(raw)
        if not name:
            raise DatasetError("reference group list contains an empty name")
        key = fold(name)
        if key in group_index:
            raise DatasetError(f"duplicate reference group {name!r}")
        group_index[key] = len(groups)
        groups.append(name)
    if not groups:
        raise DatasetError("reference group list is empty")

    survivors: list[PublicationRecord] = []
    seen: set[tuple[str, str]] = set()
    venue_display: dict[str, str] = {}
    dropped = merged = 0
    for rec in records:
        gkey = fold(normalize_name(rec.group))
        if gkey not in group_index:
            dropped += 1
            continue
        key = rec.dedup_key()
        if key is not None:
            pair = (key, gkey)
            if pair in seen:
                merged += 1
                continue
            seen.add(pair)
        vkey = fold(normalize_name(rec.venue))
        venue = venue_display.setdefault(vkey, normalize_name(rec.venue))
        survivors.append(
            rec if rec.group == groups[group_index[gkey]] and rec.venue == venue
            else PublicationRecord(
                group=groups[group_index[gkey]],
                authors=rec.authors,
                venue=venue,
                paper_id=rec.paper_id,
                title=rec.title,
                year=rec.year,
            )
        )

    if dropped:
        log.info("dropped %d record(s) from groups outside the reference set", dropped)
    if not survivors:
        raise DatasetError("empty dataset: no records remain for the reference groups")

    counts_per_group = [0] * len(groups)
    for rec in survivors:
        counts_per_group[group_index[fold(rec.group)]] += 1
    for name, count in zip(groups, counts_per_group):
        if count == 0:
            raise DatasetError(f"reference group {name!r} has no publications in the dataset")

    venues = tuple(sorted(venue_display.values(), key=lambda v: (fold(v), v)))

    overrides: dict[str, int] | None = None
    if corpus_author_counts is not None:
        overrides = {}
        for raw, count in corpus_author_counts.items():
            name = normalize_name(raw)
            if not name:
                raise ValidationError("author-count override has an empty venue name", field="venue")
            overrides[name] = count

    return Dataset(
        groups=tuple(groups),
        venues=venues,
        records=tuple(survivors),
        corpus_author_counts=overrides,
        dropped_foreign=dropped,
        dedup_merged=merged,
    )
