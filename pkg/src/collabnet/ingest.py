"""Publication parsing, full counting, thresholds, and the on-disk corpus.

Full counting means each unordered country pair on a publication adds
exactly one unit to that pair's edge weight, regardless of author counts.
The corpus store is a directory of per-(year, field) CSV edge lists plus
country-year statistics and a JSON manifest.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .errors import DataError
from .timeseries import MetricSeries

log = logging.getLogger(__name__)

ALL_FIELDS = "all"


@dataclass(frozen=True)
class PublicationRecord:
    """One document: its year, field label, and the set of contributing countries."""

    id: str
    year: int
    field: str
    countries: frozenset[str]

    @property
    def international(self) -> bool:
        return len(self.countries) >= 2


@dataclass
class EdgeList:
    """Weighted country-pair counts for one (year, field) slice."""

    year: int
    field: str
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def add(self, a: str, b: str, w: float = 1.0) -> None:
        if a == b:
            raise DataError(f"self-pair {a!r} in edge list {self.year}/{self.field}")
        key = (a, b) if a < b else (b, a)
        self.edges[key] = self.edges.get(key, 0.0) + w

    def countries(self) -> set[str]:
        out: set[str] = set()
        for a, b in self.edges:
            out.add(a)
            out.add(b)
        return out

    def total_weight(self) -> float:
        return sum(self.edges.values())


@dataclass(frozen=True)
class CountryYearStats:
    """Publication counts for one country in one (year, field) slice."""

    country: str
    year: int
    field: str
    intl_pubs: int
    total_pubs: int

    def __post_init__(self):
        if self.intl_pubs > self.total_pubs or self.intl_pubs < 0:
            raise DataError(
                f"{self.country} {self.year}/{self.field}: "
                f"intl_pubs={self.intl_pubs} inconsistent with total_pubs={self.total_pubs}"
            )


@dataclass
class ParseResult:
    records: list[PublicationRecord]
    skipped: int


def _clean_countries(raw) -> frozenset[str]:
    if not isinstance(raw, (list, tuple)):
        raise ValueError("countries must be a list")
    cleaned = set()
    for c in raw:
        code = str(c).strip().upper()
        if code:
            cleaned.add(code)
    return frozenset(cleaned)


def parse_publications(lines, default_field: str = ALL_FIELDS) -> ParseResult:
    """Parse JSON-lines publication records; malformed lines are counted and skipped.

    Country codes are uppercased and deduplicated; records with no usable
    country are dropped (they also count as skipped).
    """
    records: list[PublicationRecord] = []
    skipped = 0
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
            year = int(obj["year"])
            countries = _clean_countries(obj["countries"])
            fld = str(obj.get("field", default_field)).strip() or default_field
            rid = str(obj.get("id", f"line{lineno}"))
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("skipping malformed line %d: %s", lineno, exc)
            skipped += 1
            continue
        if not countries:
            skipped += 1
            continue
        records.append(PublicationRecord(rid, year, fld, countries))
    return ParseResult(records, skipped)


def parse_publications_file(path: str | Path) -> ParseResult:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            return parse_publications(fh)
    except OSError as exc:
        raise DataError(f"cannot read publication file {path}: {exc}") from exc


def _matches(record: PublicationRecord, year: int, fld: str) -> bool:
    return record.year == year and (fld == ALL_FIELDS or record.field == fld)


def build_annual_edges(records, year: int, fld: str = ALL_FIELDS) -> EdgeList:
    """Full counting: every unordered country pair on a record adds weight 1."""
    out = EdgeList(year, fld)
    for rec in records:
        if not _matches(rec, year, fld):
            continue
        for a, b in combinations(sorted(rec.countries), 2):
            out.add(a, b)
    return out


def country_year_stats(records, year: int, fld: str = ALL_FIELDS) -> dict[str, CountryYearStats]:
    """Per-country publication counts in one (year, field) slice."""
    total: Counter[str] = Counter()
    intl: Counter[str] = Counter()
    for rec in records:
        if not _matches(rec, year, fld):
            continue
        for c in rec.countries:
            total[c] += 1
            if rec.international:
                intl[c] += 1
    return {
        c: CountryYearStats(c, year, fld, intl.get(c, 0), total[c])
        for c in sorted(total)
    }


def filter_countries(edge_list: EdgeList, stats: dict[str, CountryYearStats], threshold: int = 10) -> EdgeList:
    """Drop every edge touching a country below the international-output threshold."""
    if threshold < 0:
        raise DataError(f"threshold must be non-negative, got {threshold}")
    for c in sorted(edge_list.countries()):
        if c not in stats:
            raise DataError(f"country {c} appears in edges but is missing from stats {edge_list.year}/{edge_list.field}")
    keep = {c for c in edge_list.countries() if stats[c].intl_pubs >= threshold}
    out = EdgeList(edge_list.year, edge_list.field)
    for (a, b), w in edge_list.edges.items():
        if a in keep and b in keep:
            out.edges[(a, b)] = w
    return out


def participation_series(records, country: str, denominator: str = "all") -> MetricSeries:
    """Share of a year's publications that are international and involve the country.

    The denominator is all global publications by default; pass
    denominator="international" for the international-only variant. Years
    with an empty denominator are omitted.
    """
    if denominator not in ("all", "international"):
        raise DataError(f"unknown denominator {denominator!r}")
    country = country.upper()
    num: Counter[int] = Counter()
    den: Counter[int] = Counter()
    for rec in records:
        if denominator == "all" or rec.international:
            den[rec.year] += 1
        if rec.international and country in rec.countries:
            num[rec.year] += 1
    pairs = [(yr, num.get(yr, 0) / den[yr]) for yr in sorted(den) if den[yr] > 0]
    if not pairs:
        raise DataError("no publications with a non-empty denominator year")
    return MetricSeries.from_pairs(f"participation:{country}", pairs, unit="share")


# ---------------------------------------------------------------------------
# Corpus store: edges_<year>_<field>.csv, stats_<year>_<field>.csv, manifest.json

EDGE_HEADER = ["year", "field", "country_a", "country_b", "weight"]
STATS_HEADER = ["year", "field", "country", "intl_pubs", "total_pubs"]


def field_slug(fld: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9]+", "_", fld).strip("_").lower()
    return slug or "field"


class CorpusStore:
    """Read/write access to an ingested corpus directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def manifest(self) -> dict:
        path = self._manifest_path()
        if not path.exists():
            raise DataError(f"no manifest.json under {self.root}")
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)

    def edge_path(self, year: int, fld: str) -> Path:
        return self.root / f"edges_{year}_{field_slug(fld)}.csv"

    def stats_path(self, year: int, fld: str) -> Path:
        return self.root / f"stats_{year}_{field_slug(fld)}.csv"

    def write_edges(self, edge_list: EdgeList) -> Path:
        path = self.edge_path(edge_list.year, edge_list.field)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EDGE_HEADER)
            for (a, b), w in sorted(edge_list.edges.items()):
                writer.writerow([edge_list.year, edge_list.field, a, b, repr(float(w))])
        return path

    def write_stats(self, year: int, fld: str, stats: dict[str, CountryYearStats]) -> Path:
        path = self.stats_path(year, fld)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(STATS_HEADER)
            for c in sorted(stats):
                s = stats[c]
                writer.writerow([year, fld, c, s.intl_pubs, s.total_pubs])
        return path

    def read_edges(self, year: int, fld: str) -> EdgeList:
        path = self.edge_path(year, fld)
        if not path.exists():
            raise DataError(f"no edge list for {year}/{fld} under {self.root}")
        out = EdgeList(year, fld)
        with path.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    out.add(row["country_a"], row["country_b"], float(row["weight"]))
                except (KeyError, ValueError) as exc:
                    raise DataError(f"bad edge row in {path}: {row}") from exc
        return out

    def read_stats(self, year: int, fld: str) -> dict[str, CountryYearStats]:
        path = self.stats_path(year, fld)
        if not path.exists():
            raise DataError(f"no stats for {year}/{fld} under {self.root}")
        out: dict[str, CountryYearStats] = {}
        with path.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    out[row["country"]] = CountryYearStats(
                        row["country"], int(row["year"]), row["field"],
                        int(row["intl_pubs"]), int(row["total_pubs"]),
                    )
                except (KeyError, ValueError) as exc:
                    raise DataError(f"bad stats row in {path}: {row}") from exc
        return out


def ingest_publications(pubs_path: str | Path, out_dir: str | Path, threshold: int = 10) -> dict:
    """Parse a JSONL publication file and persist the full corpus store.

    Edge lists are written with the threshold applied; the unfiltered
    country-year statistics are kept alongside so later stages can
    re-derive participation series and normalization productivities.
    """
    pubs_path = Path(pubs_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = CorpusStore(out)

    if pubs_path.suffix.lower() == ".csv":
        return _ingest_edge_csv(pubs_path, store, threshold)

    parsed = parse_publications_file(pubs_path)
    records = parsed.records
    if not records:
        raise DataError(f"no usable records in {pubs_path} ({parsed.skipped} skipped)")

    years = sorted({r.year for r in records})
    fields = sorted({r.field for r in records})
    slices = [(y, f) for y in years for f in [ALL_FIELDS] + [f for f in fields if f != ALL_FIELDS]]

    edge_counts = {}
    slice_counts = {}
    for year, fld in slices:
        stats = country_year_stats(records, year, fld)
        edges = build_annual_edges(records, year, fld)
        filtered = filter_countries(edges, stats, threshold)
        store.write_edges(filtered)
        store.write_stats(year, fld, stats)
        edge_counts[f"{year}/{fld}"] = len(filtered.edges)
        n_pubs = sum(1 for r in records if _matches(r, year, fld))
        n_intl = sum(1 for r in records if _matches(r, year, fld) and r.international)
        slice_counts[f"{year}/{fld}"] = {"pubs": n_pubs, "intl": n_intl}

    manifest = {
        "years": years,
        "fields": [ALL_FIELDS] + [f for f in fields if f != ALL_FIELDS],
        "field_slugs": {f: field_slug(f) for f in fields + [ALL_FIELDS]},
        "threshold": threshold,
        "records": len(records),
        "skipped": parsed.skipped,
        "edge_counts": edge_counts,
        "slice_counts": slice_counts,
    }
    with store._manifest_path().open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _ingest_edge_csv(path: Path, store: CorpusStore, threshold: int) -> dict:
    """Ingest a pre-aggregated edge CSV (year,field,country_a,country_b,weight).

    No publication-level statistics exist in this form, so intl_pubs and
    total_pubs are both approximated by the country's total edge weight in
    the slice; the manifest records that approximation.
    """
    by_slice: dict[tuple[int, str], EdgeList] = {}
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                year = int(row["year"])
                fld = row.get("field") or ALL_FIELDS
                key = (year, fld)
                by_slice.setdefault(key, EdgeList(year, fld)).add(
                    row["country_a"].strip().upper(), row["country_b"].strip().upper(), float(row["weight"])
                )
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"cannot ingest edge CSV {path}: {exc}") from exc
    if not by_slice:
        raise DataError(f"no edges in {path}")

    edge_counts = {}
    for (year, fld), edges in sorted(by_slice.items()):
        strength: defaultdict[str, float] = defaultdict(float)
        for (a, b), w in edges.edges.items():
            strength[a] += w
            strength[b] += w
        stats = {
            c: CountryYearStats(c, year, fld, int(strength[c]), int(strength[c]))
            for c in sorted(strength)
        }
        filtered = filter_countries(edges, stats, threshold)
        store.write_edges(filtered)
        store.write_stats(year, fld, stats)
        edge_counts[f"{year}/{fld}"] = len(filtered.edges)

    years = sorted({y for y, _ in by_slice})
    fields = sorted({f for _, f in by_slice})
    manifest = {
        "years": years,
        "fields": fields,
        "field_slugs": {f: field_slug(f) for f in fields},
        "threshold": threshold,
        "records": None,
        "skipped": 0,
        "stats_source": "edge-weight approximation (pre-aggregated input)",
        "edge_counts": edge_counts,
    }
    with store._manifest_path().open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
