"""Command-line pipeline over a painting corpus.

Stages run in order: ingest builds the NDJSON store from metadata files,
annotate fills in per-face gender/emotion data, colors fills in per-image
color profiles, analyze writes the report tables, plot renders SVG charts
from those tables. Given a fixed store, config, and the stub backend, every
stage is byte-deterministic.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from urllib.parse import urlparse

from . import plots
from .color import COLOR_ORDER, color_profile, load_image, save_mask_png
from .colorstats import PaintingSample, correlation_table, cv_table
from .config import (
    ConfigError,
    PipelineConfig,
    apply_overrides,
    load_config,
)
from .corpus import (
    CorpusStore,
    IngestError,
    PaintingRecord,
    deduplicate,
    ingest_metadata,
    load_store,
    read_metadata_csv,
    read_metadata_ndjson,
    save_store,
    split_databases,
    summarize_by_continent,
)
from .emotion import (
    EmotionBackendError,
    RemoteBackend,
    StubBackend,
    annotate_painting,
)
from .gender import gender_series
from .geo import load_adjacency, load_centroids, load_country_table
from .spatial import build_weights, choropleth_export, morans_i
from .temporal import (
    BIN_WIDTH,
    SERIES_START,
    bin_decades,
    decade_index,
    era_series,
    intensity_band,
    parse_date,
    rapid_change_window,
)

ANALYSES = ("temporal", "gender", "colorstats", "spatial", "all")

REPORTS = {
    "decade_series": "decade_series.csv",
    "era_series": "era_series.csv",
    "rapid_change": "rapid_change.json",
    "gender_series": "gender_series.csv",
    "correlations": "correlations.csv",
    "cv_table": "cv_table.csv",
    "moran": "moran.json",
    "moran_scatter": "moran_scatter.csv",
    "choropleth": "choropleth.csv",
    "continent_summary": "continent_summary.csv",
    "summary": "analysis_summary.json",
}


class PipelineError(RuntimeError):
    """A stage cannot run; carries the missing prerequisite when relevant."""

    def __init__(self, message: str, missing: str | None = None):
        super().__init__(message)
        self.missing = missing

    def to_dict(self) -> dict:
        payload = {"error": str(self)}
        if self.missing:
            payload["missing_prerequisite"] = self.missing
        return payload


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def _backend(config: PipelineConfig):
    if config.backend.kind == "stub":
        return StubBackend(seed=config.backend.seed)
    return RemoteBackend(
        endpoint=config.backend.endpoint,
        api_key=os.environ.get(config.backend.api_key_env),
        api_key_header=config.backend.api_key_header,
        retry_budget=config.backend.retry_budget,
        backoff_base=config.backend.backoff_base,
    )


def _require_store(config: PipelineConfig) -> CorpusStore:
    if not config.store_path.exists():
        raise PipelineError(
            f"no corpus store at {config.store_path}; run ingest first",
            missing="ingest",
        )
    return load_store(config.store_path)


def _image_candidates(record: PaintingRecord, image_dir: Path) -> list[Path]:
    names = []
    basename = Path(urlparse(record.painting_url).path).name
    if basename:
        names.append(basename)
    digest = hashlib.sha256(record.painting_url.encode("utf-8")).hexdigest()[:16]
    names.extend(f"{digest}{ext}" for ext in (".png", ".jpg", ".jpeg"))
    return [image_dir / name for name in names]


def cmd_ingest(config: PipelineConfig, inputs: list[Path]) -> dict:
    """Read metadata files into the store, deduplicate, rewrite."""
    if not inputs:
        raise PipelineError("no input metadata files given")
    countries = load_country_table(config.countries_table)
    store = load_store(config.store_path) if config.store_path.exists() else CorpusStore()
    before = len(store.records)
    totals = Counter()
    accepted = 0
    rejected = 0
    for input_path in inputs:
        if not input_path.exists():
            raise PipelineError(f"input file not found: {input_path}")
        if input_path.suffix == ".csv":
            rows = read_metadata_csv(input_path)
        elif input_path.suffix in (".ndjson", ".jsonl", ".json"):
            rows = read_metadata_ndjson(input_path)
        else:
            raise PipelineError(f"unsupported input format: {input_path.suffix!r}")
        report = ingest_metadata(rows, source=input_path.stem, store=store, countries=countries)
        accepted += report.accepted
        rejected += report.rejected
        totals.update(report.reasons)
    deduped = deduplicate(store)
    removed = len(store.records) - len(deduped.records)
    config.store_path.parent.mkdir(parents=True, exist_ok=True)
    save_store(deduped, config.store_path)
    return {
        "command": "ingest",
        "accepted": accepted,
        "rejected": rejected,
        "reasons": dict(sorted(totals.items())),
        "duplicates_removed": removed,
        "store_size": len(deduped.records),
        "previously_stored": before,
    }


def cmd_annotate(config: PipelineConfig) -> dict:
    """Fill in face annotations for records that don't have them yet."""
    store = _require_store(config)
    backend = _backend(config)
    pending = [r for r in store.records if not r.annotated]
    failures = 0
    statuses: Counter = Counter()

    def annotate(record: PaintingRecord):
        try:
            return annotate_painting(backend, record)
        except EmotionBackendError as exc:
            statuses[exc.status or 0] += 1
            return None

    with ThreadPoolExecutor(max_workers=config.backend.fanout) as executor:
        results = list(executor.map(annotate, pending))
    faces_found = 0
    for record, faces in zip(pending, results):
        if faces is None:
            failures += 1
            continue
        record.faces = faces
        record.annotated = True
        faces_found += len(faces)
    save_store(store, config.store_path)
    return {
        "command": "annotate",
        "backend": backend.kind,
        "annotated": len(pending) - failures,
        "already_annotated": len(store.records) - len(pending),
        "faces_found": faces_found,
        "failures": failures,
        "failure_statuses": {str(k): v for k, v in sorted(statuses.items())},
    }


def cmd_colors(config: PipelineConfig) -> dict:
    """Fill in color profiles for records whose image file is present."""
    store = _require_store(config)
    if not config.image_dir.exists():
        raise PipelineError(f"image directory not found: {config.image_dir}")
    profiled = 0
    missing_image = 0
    skipped = 0
    mask_dir = config.output_dir / "masks"
    if config.dump_masks:
        mask_dir.mkdir(parents=True, exist_ok=True)
    for record in store.records:
        if record.color_profile is not None:
            skipped += 1
            continue
        image_path = next(
            (p for p in _image_candidates(record, config.image_dir) if p.exists()),
            None,
        )
        if image_path is None:
            missing_image += 1
            continue
        rgb = load_image(image_path, max_side=config.max_image_side)
        record.color_profile = color_profile(
            rgb, dilation_iterations=config.dilation_iterations
        )
        profiled += 1
        if config.dump_masks:
            from .color import classify_image, image_to_hsv

            labels = classify_image(image_to_hsv(rgb))
            for index, color in enumerate(COLOR_ORDER):
                save_mask_png(
                    labels == index, mask_dir / f"{image_path.stem}_{color}.png"
                )
    save_store(store, config.store_path)
    return {
        "command": "colors",
        "profiled": profiled,
        "already_profiled": skipped,
        "missing_image": missing_image,
        "dilation_iterations": config.dilation_iterations,
    }


def _annotated_faces(records: list[PaintingRecord]) -> int:
    return sum(len(r.faces) for r in records)


def _temporal_reports(config, temporal_db, out_dir, summary) -> list[str]:
    entries = [
        (parse_date(r.raw_date).year, [f.happiness for f in r.faces])
        for r in temporal_db
    ]
    series = bin_decades(entries)
    summary["dropped_outside_span"] = series.dropped
    rows = []
    for decade in series.bins:
        proportions = (
            tuple(
                decade.band_counts[band] / decade.face_count
                for band in ("low", "medium", "high")
            )
            if decade.face_count
            else (None, None, None)
        )
        rows.append(
            [
                decade.start_year,
                decade.face_count,
                decade.mean_happiness,
                proportions[0],
                proportions[1],
                proportions[2],
            ]
        )
    files = []
    files.append(
        _write_csv(
            out_dir / REPORTS["decade_series"],
            ["start_year", "face_count", "mean_happiness", "p_low", "p_medium", "p_high"],
            rows,
        )
    )
    try:
        eras = era_series(series, config.era_bounds)
    except ValueError as exc:
        raise PipelineError(f"era aggregation failed: {exc}") from exc
    files.append(
        _write_csv(
            out_dir / REPORTS["era_series"],
            ["label", "start_year", "end_year", "mean_happiness"],
            [[e.label, e.start_year, e.end_year, e.mean_happiness] for e in eras.eras],
        )
    )
    try:
        window = rapid_change_window(series, config.rapid_window_decades)
    except ValueError as exc:
        raise PipelineError(f"rapid-change extraction failed: {exc}") from exc
    files.append(
        _write_json(
            out_dir / REPORTS["rapid_change"],
            {
                "start_year": window.start_year,
                "end_year": window.end_year,
                "delta": window.delta,
                "window_decades": config.rapid_window_decades,
            },
        )
    )
    return [f.name for f in files]


def _gender_reports(config, temporal_db, out_dir, summary) -> list[str]:
    entries = [
        (parse_date(r.raw_date).year, r.faces) for r in temporal_db if r.faces
    ]
    try:
        series = gender_series(entries, min_faces=config.min_faces)
    except ValueError as exc:
        raise PipelineError(f"gender series failed: {exc}") from exc
    summary["gender_decades"] = len(series)
    path = _write_csv(
        out_dir / REPORTS["gender_series"],
        ["start_year", "n_female", "n_male", "gpt", "hdg"],
        [[s.start_year, s.n_female, s.n_male, s.gpt, s.hdg] for s in series],
    )
    return [path.name]


def _samples(spatial_db) -> list[PaintingSample]:
    samples = []
    for record in spatial_db:
        if not record.faces or record.color_profile is None:
            continue
        samples.append(
            PaintingSample(
                happiness=record.mean_happiness(),
                proportions=record.color_profile.to_dict(),
                country=record.painting_country,
                continent=record.painting_continent,
            )
        )
    return samples


def _colorstats_reports(config, spatial_db, out_dir, summary) -> list[str]:
    samples = _samples(spatial_db)
    if not samples:
        raise PipelineError(
            "no paintings with both faces and color profiles; run colors first",
            missing="colors",
        )
    summary["colorstats_samples"] = len(samples)
    cells = []
    for scale in ("world", "continent", "country"):
        cells.extend(correlation_table(samples, scale))
    files = [
        _write_csv(
            out_dir / REPORTS["correlations"],
            ["scale", "unit", "color", "n", "r", "p", "band"],
            [[c.scale, c.unit, c.color, c.n, c.r, c.p, c.band] for c in cells],
        )
    ]
    countries = load_country_table(config.countries_table)
    codes = []
    for name in config.cv_countries:
        code = countries.resolve(name)
        if code is None:
            raise PipelineError(f"unknown country in cv set: {name!r}")
        codes.append(code)
    try:
        cv_cells, excluded = cv_table(samples, codes)
    except ValueError as exc:
        raise PipelineError(f"cv table failed: {exc}") from exc
    summary["cv_excluded"] = [f"{country}:{band}" for country, band in excluded]
    files.append(
        _write_csv(
            out_dir / REPORTS["cv_table"],
            ["band", "color", "std", "ave", "cv"],
            [[c.band, c.color, c.std, c.ave, c.cv] for c in cv_cells],
        )
    )
    return [f.name for f in files]


def _spatial_reports(config, spatial_db, out_dir, summary) -> list[str]:
    countries = load_country_table(config.countries_table)
    per_country_faces: dict[str, list[float]] = {}
    per_country_paintings: Counter = Counter()
    for record in spatial_db:
        if not record.faces:
            continue
        happiness = [f.happiness for f in record.faces]
        per_country_faces.setdefault(record.painting_country, []).extend(happiness)
        per_country_paintings[record.painting_country] += 1
    if not per_country_faces:
        raise PipelineError("no annotated faces", missing="annotate")

    units = sorted(per_country_faces)
    means = {
        code: sum(values) / len(values) for code, values in per_country_faces.items()
    }
    files = [
        choropleth_export(
            {code: (means[code], per_country_paintings[code]) for code in units},
            out_dir / REPORTS["choropleth"],
            names={code: countries.name_of(code) for code in units},
        )
    ]
    adjacency = [
        (a, b)
        for a, b in load_adjacency(config.adjacency_table)
        if a in means and b in means
    ]
    centroids = load_centroids(config.centroids_table)
    try:
        weights = build_weights(
            adjacency, units, scheme="row_standardized", centroids=centroids
        )
        result = morans_i([means[code] for code in units], weights)
    except ValueError as exc:
        raise PipelineError(f"spatial autocorrelation failed: {exc}") from exc
    quadrants = Counter(point.quadrant for point in result.scatter)
    files.append(
        _write_json(
            out_dir / REPORTS["moran"],
            {
                "statistic": result.statistic,
                "n": result.n,
                "excluded": list(result.excluded),
                "quadrant_counts": dict(sorted(quadrants.items())),
                "scheme": weights.scheme,
            },
        )
    )
    files.append(
        _write_csv(
            out_dir / REPORTS["moran_scatter"],
            ["country", "z", "lag", "quadrant"],
            [[p.unit, p.z, p.lag, p.quadrant] for p in result.scatter],
        )
    )
    summary["moran_excluded"] = list(result.excluded)
    return [f.name for f in files]


def cmd_analyze(config: PipelineConfig, which: str = "all") -> dict:
    """Write the report tables for the requested analyses."""
    if which not in ANALYSES:
        raise PipelineError(f"unknown analysis: {which!r}")
    store = _require_store(config)
    if not store.records:
        raise PipelineError("corpus store is empty; run ingest first", missing="ingest")
    if _annotated_faces(store.records) == 0:
        raise PipelineError("no annotated faces", missing="annotate")
    temporal_db, spatial_db = split_databases(store)
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    summary: dict = {
        "command": "analyze",
        "which": which,
        "records": len(store.records),
        "temporal_records": len(temporal_db),
        "spatial_records": len(spatial_db),
        "records_without_faces": sum(1 for r in store.records if not r.faces),
        "records_without_profiles": sum(
            1 for r in store.records if r.color_profile is None
        ),
    }
    written = []

    continent_rows = []
    for db_name, db in (("temporal", temporal_db), ("spatial", spatial_db)):
        if not db:
            continue
        for row in summarize_by_continent(db):
            continent_rows.append(
                [db_name, row.continent, row.count, row.percentage, row.paintings_with_emotions]
            )
    written.append(
        _write_csv(
            out_dir / REPORTS["continent_summary"],
            ["database", "continent", "count", "percentage", "paintings_with_emotions"],
            continent_rows,
        ).name
    )

    if which in ("temporal", "all"):
        written.extend(_temporal_reports(config, temporal_db, out_dir, summary))
    if which in ("gender", "all"):
        written.extend(_gender_reports(config, temporal_db, out_dir, summary))
    if which in ("colorstats", "all"):
        written.extend(_colorstats_reports(config, spatial_db, out_dir, summary))
    if which in ("spatial", "all"):
        written.extend(_spatial_reports(config, spatial_db, out_dir, summary))

    summary["reports"] = sorted(written)
    _write_json(out_dir / REPORTS["summary"], summary)
    return summary


def _read_report_csv(path: Path) -> list[dict]:
    with path.open("r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def _require_report(out_dir: Path, key: str) -> Path:
    path = out_dir / REPORTS[key]
    if not path.exists():
        raise PipelineError(
            f"report {path.name} not found in {out_dir}; run analyze first",
            missing="analyze",
        )
    return path


def cmd_plot(config: PipelineConfig) -> dict:
    """Render SVG charts from the analyze reports."""
    store = _require_store(config)
    out_dir = config.output_dir
    # Resolve every report before rendering anything.
    decade_rows = _read_report_csv(_require_report(out_dir, "decade_series"))
    era_rows = _read_report_csv(_require_report(out_dir, "era_series"))
    gender_rows = _read_report_csv(_require_report(out_dir, "gender_series"))
    scatter_rows = _read_report_csv(_require_report(out_dir, "moran_scatter"))
    moran_payload = json.loads(_require_report(out_dir, "moran").read_text())

    temporal_db, spatial_db = split_databases(store)
    decade_counts: Counter = Counter()
    for record in temporal_db:
        index = decade_index(parse_date(record.raw_date).year)
        if index is not None:
            decade_counts[SERIES_START + index * BIN_WIDTH] += 1
    counts = sorted(decade_counts.items())

    trend = [
        (int(row["start_year"]), float(row["mean_happiness"]))
        for row in decade_rows
        if row["mean_happiness"]
    ]
    segments = [
        (
            row["label"],
            int(row["start_year"]),
            int(row["end_year"]),
            float(row["mean_happiness"]),
        )
        for row in era_rows
    ]
    bands = [
        (
            int(row["start_year"]),
            float(row["p_low"]),
            float(row["p_medium"]),
            float(row["p_high"]),
        )
        for row in decade_rows
        if row["p_low"]
    ]
    gender_points = [
        (
            int(row["start_year"]),
            float(row["gpt"]),
            float(row["hdg"]) if row["hdg"] else None,
        )
        for row in gender_rows
    ]
    samples = _samples(spatial_db)
    band_means: dict[str, dict[str, float]] = {}
    for band in ("low", "medium", "high"):
        members = [s for s in samples if intensity_band(s.happiness) == band]
        if members:
            band_means[band] = {
                color: sum(s.proportions[color] for s in members) / len(members)
                for color in COLOR_ORDER
            }
    points = [
        (row["country"], float(row["z"]), float(row["lag"])) for row in scatter_rows
    ]

    written = []
    try:
        written.append(plots.plot_decade_counts(counts, out_dir / "decade_counts.svg"))
        written.append(
            plots.plot_emotion_trend(trend, segments, out_dir / "emotion_trend.svg")
        )
        written.append(
            plots.plot_band_proportions(bands, out_dir / "band_proportions.svg")
        )
        written.append(
            plots.plot_gender_series(gender_points, out_dir / "gender_series.svg")
        )
        written.append(
            plots.plot_color_by_band(band_means, out_dir / "color_by_band.svg")
        )
        written.append(
            plots.plot_moran_scatter(
                points, moran_payload["statistic"], out_dir / "moran_scatter.svg"
            )
        )
    except ValueError as exc:
        raise PipelineError(f"plotting failed: {exc}") from exc
    return {"command": "plot", "plots": sorted(p.name for p in written)}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="paintstats",
        description="Painting corpus emotion/color statistics pipeline.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub):
        sub.add_argument("--config", required=True, help="TOML or JSON config file")
        sub.add_argument("--out", help="override the output directory")
        sub.add_argument("--backend", choices=("stub", "remote"))
        sub.add_argument("--seed", type=int, help="stub backend seed")
        sub.add_argument("--dilation", type=int, help="dilation iterations")

    ingest = subparsers.add_parser("ingest", help="read metadata files into the store")
    add_common(ingest)
    ingest.add_argument("inputs", nargs="+", type=Path, help="CSV or NDJSON metadata")

    add_common(subparsers.add_parser("annotate", help="annotate faces via the backend"))
    add_common(subparsers.add_parser("colors", help="profile painting images"))

    analyze = subparsers.add_parser("analyze", help="write report tables")
    add_common(analyze)
    analyze.add_argument("--which", choices=ANALYSES, default="all")

    add_common(subparsers.add_parser("plot", help="render SVG charts from reports"))

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = apply_overrides(
            config,
            out=args.out,
            backend=args.backend,
            seed=args.seed,
            dilation=args.dilation,
        )
        if args.command == "ingest":
            summary = cmd_ingest(config, args.inputs)
        elif args.command == "annotate":
            summary = cmd_annotate(config)
        elif args.command == "colors":
            summary = cmd_colors(config)
        elif args.command == "analyze":
            summary = cmd_analyze(config, args.which)
        else:
            summary = cmd_plot(config)
    except (PipelineError, ConfigError, IngestError) as exc:
        payload = exc.to_dict() if isinstance(exc, PipelineError) else {"error": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
