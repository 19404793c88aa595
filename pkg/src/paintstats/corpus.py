"""Painting metadata ingestion and the NDJSON corpus store.

Rows arrive from CSV (header: name,artist,url,date,country) or NDJSON with
the same keys. Accepted rows become records; rows missing a name, artist,
or usable URL are rejected with a counted reason. Records deduplicate on a
normalized (name, artist) key, deliberately ignoring the URL because the
same work appears under different URLs across sources.

The store persists as UTF-8 NDJSON with a schema-version header line and
one record per line, keys in fixed order so reruns diff cleanly.
"""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping
from urllib.parse import urlparse

from .color import ColorProfile
from .emotion import FaceAnnotation
from .geo import CONTINENTS, UNKNOWN_CONTINENT, CountryTable
from .temporal import parse_date

SCHEMA_VERSION = 1

METADATA_FIELDS = ("name", "artist", "url", "date", "country")

_PUNCTUATION_TABLE = str.maketrans("", "", string.punctuation)
_WHITESPACE_RE = re.compile(r"\s+")


class IngestError(RuntimeError):
    """The input stream itself is unusable (not a per-row problem)."""


@dataclass
class PaintingRecord:
    painting_name: str
    artist: str
    painting_url: str
    raw_date: str | None = None
    painting_country: str | None = None
    painting_continent: str | None = None
    source: str = ""
    annotated: bool = False  # distinguishes "no faces found" from "never ran"
    faces: list[FaceAnnotation] = field(default_factory=list)
    color_profile: ColorProfile | None = None

    def to_json_dict(self) -> dict:
        return {
            "painting_name": self.painting_name,
            "artist": self.artist,
            "painting_url": self.painting_url,
            "raw_date": self.raw_date,
            "painting_country": self.painting_country,
            "painting_continent": self.painting_continent,
            "source": self.source,
            "annotated": self.annotated,
            "faces": [face.to_dict() for face in self.faces],
            "color_profile": (
                self.color_profile.to_dict() if self.color_profile else None
            ),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "PaintingRecord":
        profile = data.get("color_profile")
        return cls(
            painting_name=data["painting_name"],
            artist=data["artist"],
            painting_url=data["painting_url"],
            raw_date=data.get("raw_date"),
            painting_country=data.get("painting_country"),
            painting_continent=data.get("painting_continent"),
            source=data.get("source", ""),
            annotated=data.get("annotated", False),
            faces=[FaceAnnotation.from_dict(f) for f in data.get("faces", [])],
            color_profile=ColorProfile.from_dict(profile) if profile else None,
        )

    def mean_happiness(self) -> float | None:
        if not self.faces:
            return None
        return sum(face.happiness for face in self.faces) / len(self.faces)


@dataclass
class CorpusStore:
    records: list[PaintingRecord] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    reasons: Counter = field(default_factory=Counter)

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reasons[reason] += 1


def _normalize_field(text: str) -> str:
    collapsed = _WHITESPACE_RE.sub(" ", text.translate(_PUNCTUATION_TABLE).lower())
    return collapsed.strip()


def dedup_key(record: PaintingRecord) -> str:
    """Lowercased, punctuation-stripped "name|artist" identity.

    Two records that differ only in URL (or date/country) collide on
    purpose; distinct same-titled works by one artist collide too, which is
    the accepted cost of having no stronger identity in the sources.
    """
    return f"{_normalize_field(record.painting_name)}|{_normalize_field(record.artist)}"


def _is_absolute_url(url: str) -> bool:
    parsed = urlparse(url)
    return bool(parsed.scheme and parsed.netloc)


def ingest_metadata(
    rows: Iterable,
    source: str,
    store: CorpusStore,
    countries: CountryTable,
) -> IngestReport:
    """Append valid rows to the store; count rejects by reason.

    Each row is a mapping with the metadata keys, or a string describing a
    malformed row (as produced by the NDJSON reader). The country field is
    resolved to an ISO code when possible; the continent comes from the
    country, defaulting to Unknown.
    """
    report = IngestReport()
    for row in rows:
        if not isinstance(row, Mapping):
            report.reject("malformed_row")
            continue
        name = (row.get("name") or "").strip()
        artist = (row.get("artist") or "").strip()
        url = (row.get("url") or "").strip()
        if not name:
            report.reject("missing_name")
            continue
        if not artist:
            report.reject("missing_artist")
            continue
        if not url:
            report.reject("missing_url")
            continue
        if not _is_absolute_url(url):
            report.reject("invalid_url")
            continue
        date = (row.get("date") or "").strip() or None
        country_code = countries.resolve(row.get("country"))
        continent = countries.continent_of(country_code)
        store.records.append(
            PaintingRecord(
                painting_name=name,
                artist=artist,
                painting_url=url,
                raw_date=date,
                painting_country=country_code,
                painting_continent=continent,
                source=source,
            )
        )
        report.accepted += 1
    return report


def read_metadata_csv(path: str | Path) -> Iterator[Mapping]:
    """Rows from a CSV file with the metadata header."""
    import csv

    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [f for f in METADATA_FIELDS if f not in header]
        if missing:
            raise IngestError(f"{path}: header lacks fields {missing}")
        yield from reader


def read_metadata_ndjson(path: str | Path) -> Iterator:
    """Rows from an NDJSON file; malformed lines yield an error string."""
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError:
                yield f"line {line_number}: invalid JSON"
                continue
            if isinstance(row, dict):
                yield row
            else:
                yield f"line {line_number}: not an object"


def deduplicate(store: CorpusStore) -> CorpusStore:
    """Drop later records sharing a key with an earlier one. Idempotent."""
    seen = set()
    kept = []
    for record in store.records:
        key = dedup_key(record)
        if key in seen:
            continue
        seen.add(key)
        kept.append(record)
    return CorpusStore(records=kept, schema_version=store.schema_version)


def split_databases(
    store: CorpusStore,
) -> tuple[list[PaintingRecord], list[PaintingRecord]]:
    """(temporal, spatial) views: parseable-date records and known-country
    records. A record with both lands in both lists."""
    temporal_db = [
        r
        for r in store.records
        if r.raw_date is not None and parse_date(r.raw_date).accepted
    ]
    spatial_db = [r for r in store.records if r.painting_country is not None]
    return temporal_db, spatial_db


@dataclass(frozen=True)
class ContinentRow:
    continent: str
    count: int
    percentage: float
    paintings_with_emotions: int


def summarize_by_continent(db: list[PaintingRecord]) -> list[ContinentRow]:
    """Counts and shares per continent, plus how many records have faces."""
    if not db:
        raise ValueError("empty database")
    counts: Counter = Counter()
    with_faces: Counter = Counter()
    for record in db:
        continent = record.painting_continent or UNKNOWN_CONTINENT
        counts[continent] += 1
        if record.faces:
            with_faces[continent] += 1
    total = len(db)
    order = {name: i for i, name in enumerate(CONTINENTS)}
    rows = [
        ContinentRow(
            continent=continent,
            count=count,
            percentage=count / total,
            paintings_with_emotions=with_faces[continent],
        )
        for continent, count in counts.items()
    ]
    rows.sort(key=lambda row: order.get(row.continent, len(order)))
    return rows


def save_store(store: CorpusStore, path: str | Path) -> Path:
    """Write the store as NDJSON: a version header line, then records."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(
            json.dumps({"schema_version": store.schema_version}, ensure_ascii=False)
        )
        handle.write("\n")
        for record in store.records:
            handle.write(
                json.dumps(
                    record.to_json_dict(), ensure_ascii=False, separators=(",", ":")
                )
            )
            handle.write("\n")
    return path


def load_store(path: str | Path) -> CorpusStore:
    path = Path(path)
    records = []
    schema_version = SCHEMA_VERSION
    with path.open("r", encoding="utf-8") as handle:
        first = True
        for line in handle:
            if not line.strip():
                continue
            data = json.loads(line)
            if first:
                first = False
                if "schema_version" in data and "painting_name" not in data:
                    schema_version = int(data["schema_version"])
                    continue
            records.append(PaintingRecord.from_json_dict(data))
    return CorpusStore(records=records, schema_version=schema_version)
