"""Creation-date normalization and the 10-year happiness series.

Raw dates become years in two accepted shapes: a single 3-4 digit year
(tolerating "c.", "ca." and "A.D." markers) or a range no wider than ten
years, which collapses to the floor of its midpoint. Parsed years land in
half-open 10-year bins spanning 1225-2015; happiness statistics are
face-weighted throughout. A natural cubic spline through populated decade
midpoints backs the coarser era aggregation.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

SERIES_START = 1225
SERIES_END = 2015  # exclusive
BIN_WIDTH = 10
BIN_COUNT = (SERIES_END - SERIES_START) // BIN_WIDTH

BANDS = ("low", "medium", "high")

# Tokens that may decorate an otherwise plain year or range.
_PREFIX_RE = re.compile(r"^(?:c\.|ca\.|a\.d\.)\s*", re.IGNORECASE)
_SUFFIX_RE = re.compile(r"\s*(?:a\.d\.|\.)$", re.IGNORECASE)
_YEAR_RE = re.compile(r"^\d{3,4}$")
_RANGE_RE = re.compile(r"^(\d{3,4})\s*[-–]\s*(\d{3,4})$")


@dataclass(frozen=True)
class ParsedDate:
    year: int | None
    reason: str | None = None

    @property
    def accepted(self) -> bool:
        return self.year is not None


def parse_date(raw: str) -> ParsedDate:
    """Normalize a raw date string; rejection is a value, never an error.

    Rejection reasons: "range_too_wide" for ranges spanning more than ten
    years, "unparseable" for everything else.
    """
    text = raw.strip()
    for pattern in (_PREFIX_RE, _SUFFIX_RE):
        text = pattern.sub("", text).strip()
    if _YEAR_RE.match(text):
        return ParsedDate(year=int(text))
    match = _RANGE_RE.match(text)
    if match:
        first, last = int(match.group(1)), int(match.group(2))
        if last < first:
            return ParsedDate(year=None, reason="unparseable")
        if last - first > 10:
            return ParsedDate(year=None, reason="range_too_wide")
        return ParsedDate(year=(first + last) // 2)
    return ParsedDate(year=None, reason="unparseable")


def intensity_band(happiness: float) -> str:
    """Band label: low [0, 0.25), medium [0.25, 0.75), high [0.75, 1]."""
    if not 0.0 <= happiness <= 1.0:
        raise ValueError(f"happiness out of range: {happiness}")
    if happiness < 0.25:
        return "low"
    if happiness < 0.75:
        return "medium"
    return "high"


def band_proportions(happiness_values: Sequence[float]) -> tuple[float, float, float]:
    """Normalized (low, medium, high) shares; they sum to 1."""
    if not happiness_values:
        raise ValueError("empty bin has no band proportions")
    counts = {band: 0 for band in BANDS}
    for value in happiness_values:
        counts[intensity_band(value)] += 1
    total = len(happiness_values)
    return tuple(counts[band] / total for band in BANDS)


@dataclass(frozen=True)
class DecadeBin:
    start_year: int
    face_count: int
    mean_happiness: float | None
    band_counts: dict[str, int]


@dataclass(frozen=True)
class DecadeSeries:
    """All bins over the full span, ascending; empty decades stay in place."""

    bins: tuple[DecadeBin, ...]
    dropped: int = 0

    def populated(self) -> list[DecadeBin]:
        return [b for b in self.bins if b.face_count > 0]


def decade_index(year: int) -> int | None:
    """Bin index for a year, None outside the half-open series span."""
    if not SERIES_START <= year < SERIES_END:
        return None
    return (year - SERIES_START) // BIN_WIDTH


def bin_decades(entries: Iterable[tuple[int, Sequence[float]]]) -> DecadeSeries:
    """Group (year, face happiness values) pairs into the decade series.

    Entries outside the span are dropped and counted on the series.
    """
    per_bin: list[list[float]] = [[] for _ in range(BIN_COUNT)]
    dropped = 0
    for year, happiness_values in entries:
        index = decade_index(year)
        if index is None:
            dropped += 1
            continue
        per_bin[index].extend(happiness_values)
    bins = []
    for index, values in enumerate(per_bin):
        counts = {band: 0 for band in BANDS}
        for value in values:
            counts[intensity_band(value)] += 1
        bins.append(
            DecadeBin(
                start_year=SERIES_START + index * BIN_WIDTH,
                face_count=len(values),
                mean_happiness=(sum(values) / len(values)) if values else None,
                band_counts=counts,
            )
        )
    return DecadeSeries(bins=tuple(bins), dropped=dropped)


@dataclass(frozen=True)
class NaturalCubicSpline:
    """Interpolating cubic with zero second derivative at both ends."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    second_derivatives: tuple[float, ...]

    def __call__(self, x: float) -> float:
        return evaluate_spline(self, x)


def fit_natural_cubic_spline(
    knots: Sequence[tuple[float, float]]
) -> NaturalCubicSpline:
    """Fit through the knots via the tridiagonal system for the second
    derivatives (Thomas algorithm)."""
    if len(knots) < 3:
        raise ValueError("need at least 3 knots")
    xs = [float(x) for x, _ in knots]
    ys = [float(y) for _, y in knots]
    for left, right in zip(xs, xs[1:]):
        if right == left:
            raise ValueError(f"duplicate knot x: {left}")
        if right < left:
            raise ValueError("knot x values must be strictly increasing")
    n = len(xs)
    h = [xs[i + 1] - xs[i] for i in range(n - 1)]

    # Interior equations: h[i-1]*m[i-1] + 2(h[i-1]+h[i])*m[i] + h[i]*m[i+1] = rhs[i]
    diag = [2.0 * (h[i - 1] + h[i]) for i in range(1, n - 1)]
    lower = [h[i] for i in range(1, n - 2)]
    upper = [h[i] for i in range(1, n - 2)]
    rhs = [
        6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1])
        for i in range(1, n - 1)
    ]
    size = n - 2
    for i in range(1, size):
        factor = lower[i - 1] / diag[i - 1]
        diag[i] -= factor * upper[i - 1]
        rhs[i] -= factor * rhs[i - 1]
    interior = [0.0] * size
    interior[-1] = rhs[-1] / diag[-1]
    for i in range(size - 2, -1, -1):
        interior[i] = (rhs[i] - upper[i] * interior[i + 1]) / diag[i]

    m = [0.0] + interior + [0.0]
    return NaturalCubicSpline(
        xs=tuple(xs), ys=tuple(ys), second_derivatives=tuple(m)
    )


def evaluate_spline(spline: NaturalCubicSpline, x: float) -> float:
    """Evaluate anywhere; outside the knot range the end cubics extend."""
    xs, ys, m = spline.xs, spline.ys, spline.second_derivatives
    index = bisect.bisect_right(xs, x) - 1
    index = min(max(index, 0), len(xs) - 2)
    h = xs[index + 1] - xs[index]
    a = (xs[index + 1] - x) / h
    b = (x - xs[index]) / h
    return (
        a * ys[index]
        + b * ys[index + 1]
        + ((a**3 - a) * m[index] + (b**3 - b) * m[index + 1]) * h * h / 6.0
    )


@dataclass(frozen=True)
class Era:
    label: str
    start_year: int
    end_year: int
    mean_happiness: float


@dataclass(frozen=True)
class EraSeries:
    eras: tuple[Era, ...]


DEFAULT_ERA_BOUNDS = (
    {"label": "Gothic", "start_year": 1225, "end_year": 1399},
    {"label": "Renaissance", "start_year": 1400, "end_year": 1599},
    {"label": "Baroque", "start_year": 1600, "end_year": 1699},
    {"label": "Rococo/Neoclassic", "start_year": 1700, "end_year": 1789},
    {"label": "19th century", "start_year": 1790, "end_year": 1899},
    {"label": "Modern", "start_year": 1900, "end_year": 2015},
)


def _validate_era_bounds(era_bounds) -> list[dict]:
    bounds = sorted(era_bounds, key=lambda e: e["start_year"])
    if not bounds:
        raise ValueError("era bounds are empty")
    for era in bounds:
        if era["end_year"] < era["start_year"]:
            raise ValueError(f"era {era['label']!r} ends before it starts")
    for current, following in zip(bounds, bounds[1:]):
        if following["start_year"] != current["end_year"] + 1:
            raise ValueError(
                "era bounds must be contiguous and non-overlapping: "
                f"{current['label']!r} -> {following['label']!r}"
            )
    return bounds


def era_series(decades: DecadeSeries, era_bounds=DEFAULT_ERA_BOUNDS) -> EraSeries:
    """Average the decade-knot spline over each era at 1-year steps.

    Knots sit at populated decade midpoints (start + 5); empty decades are
    skipped rather than treated as zero happiness.
    """
    bounds = _validate_era_bounds(era_bounds)
    knots = [
        (b.start_year + BIN_WIDTH / 2, b.mean_happiness)
        for b in decades.populated()
    ]
    spline = fit_natural_cubic_spline(knots)
    eras = []
    for era in bounds:
        years = range(era["start_year"], era["end_year"] + 1)
        mean = sum(spline(year) for year in years) / len(years)
        eras.append(
            Era(
                label=era["label"],
                start_year=era["start_year"],
                end_year=era["end_year"],
                mean_happiness=mean,
            )
        )
    return EraSeries(eras=tuple(eras))


@dataclass(frozen=True)
class RapidChangeWindow:
    start_year: int
    end_year: int
    delta: float  # signed end-minus-start change; selection maximizes |delta|


def rapid_change_window(
    decades: DecadeSeries, window_decades: int = 10
) -> RapidChangeWindow:
    """Find the window of the given width with the largest endpoint change.

    Both endpoint bins must be populated; ties go to the earliest start.
    """
    if window_decades < 2:
        raise ValueError("window must span at least 2 decades")
    if len(decades.populated()) < window_decades:
        raise ValueError(
            f"insufficient populated bins: need {window_decades}, "
            f"have {len(decades.populated())}"
        )
    bins = decades.bins
    best: RapidChangeWindow | None = None
    for start in range(len(bins) - window_decades + 1):
        first = bins[start]
        last = bins[start + window_decades - 1]
        if first.face_count == 0 or last.face_count == 0:
            continue
        delta = last.mean_happiness - first.mean_happiness
        if best is None or abs(delta) > abs(best.delta):
            best = RapidChangeWindow(
                start_year=first.start_year,
                end_year=last.start_year + BIN_WIDTH,
                delta=delta,
            )
    if best is None:
        raise ValueError("no window has populated endpoint bins")
    return best
