"""Color-usage statistics: correlation with happiness and cross-country
dispersion.

Correlation cells pair a painting's per-color area ratio with its mean face
happiness, at world, continent, or country scale. Significance comes from
the two-tailed Student-t test on the Pearson coefficient, evaluated through
the regularized incomplete beta function. Cross-country stability uses the
coefficient of variation of per-country mean proportions within each
happiness band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from scipy import special

from .color import COLOR_ORDER
from .temporal import BANDS, intensity_band

SCALES = ("world", "continent", "country")

WORLD_UNIT = "World"

INSUFFICIENT_DATA = "insufficient data"

# Countries with enough paintings for the dispersion table, by display name.
DEFAULT_CV_COUNTRIES = ("America", "China", "Germany", "France", "Italy", "Spain")


@dataclass(frozen=True)
class PaintingSample:
    """One painting's contribution to the color statistics."""

    happiness: float
    proportions: Mapping[str, float]
    country: str | None = None
    continent: str | None = None


@dataclass(frozen=True)
class CorrelationCell:
    scale: str
    unit: str
    color: str
    n: int
    r: float | None
    p: float | None
    band: str


@dataclass(frozen=True)
class CvCell:
    color: str
    band: str
    std: float
    ave: float
    cv: float


@dataclass(frozen=True)
class CvStats:
    std: float
    ave: float
    cv: float


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 observations")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    var_x = sum((a - mean_x) ** 2 for a in x)
    var_y = sum((b - mean_y) ** 2 for b in y)
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("degenerate series")
    r = cov / math.sqrt(var_x * var_y)
    return min(max(r, -1.0), 1.0)


def p_value(r: float, n: int) -> float:
    """Two-tailed p-value of r under the Student-t null with n-2 dof.

    t = r * sqrt((n-2) / (1-r^2)); the tail mass is the regularized
    incomplete beta I_{df/(df+t^2)}(df/2, 1/2).
    """
    if abs(r) > 1.0:
        raise ValueError(f"correlation out of range: {r}")
    if n < 3:
        raise ValueError("need at least 3 observations for a p-value")
    df = n - 2
    if abs(r) == 1.0:
        return 0.0
    t_squared = r * r * df / (1.0 - r * r)
    return float(special.betainc(df / 2.0, 0.5, df / (df + t_squared)))


def significance_band(p: float) -> str:
    """Evidence label for a p-value; boundaries fall into the weaker band."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value out of range: {p}")
    if p < 0.01:
        return "strong"
    if p < 0.05:
        return "evidence"
    if p < 0.1:
        return "weak"
    return "none"


def _units(samples: Sequence[PaintingSample], scale: str):
    if scale == "world":
        return {WORLD_UNIT: list(samples)}
    if scale == "continent":
        key = lambda s: s.continent
    elif scale == "country":
        key = lambda s: s.country
    else:
        raise ValueError(f"unknown scale: {scale}")
    grouped: dict[str, list[PaintingSample]] = {}
    for sample in samples:
        unit = key(sample)
        if unit is None:
            continue
        grouped.setdefault(unit, []).append(sample)
    return dict(sorted(grouped.items()))


def correlation_table(
    samples: Iterable[PaintingSample], scale: str
) -> list[CorrelationCell]:
    """One cell per (unit, color): r, p, and the evidence band.

    Units with fewer than 3 paintings, or with a constant series on either
    side, get undefined r/p and the "insufficient data" band.
    """
    samples = list(samples)
    cells = []
    for unit, members in _units(samples, scale).items():
        happiness = [m.happiness for m in members]
        n = len(members)
        for color in COLOR_ORDER:
            proportions = [m.proportions[color] for m in members]
            if n < 3:
                cells.append(
                    CorrelationCell(scale, unit, color, n, None, None, INSUFFICIENT_DATA)
                )
                continue
            try:
                r = pearson_r(proportions, happiness)
            except ValueError:
                cells.append(
                    CorrelationCell(scale, unit, color, n, None, None, INSUFFICIENT_DATA)
                )
                continue
            p = p_value(r, n)
            cells.append(
                CorrelationCell(scale, unit, color, n, r, p, significance_band(p))
            )
    return cells


def coefficient_of_variation(values: Sequence[float]) -> CvStats:
    """Population standard deviation over mean of the values."""
    if len(values) < 2:
        raise ValueError("need at least 2 values")
    ave = sum(values) / len(values)
    if ave == 0.0:
        raise ValueError("undefined CV")
    std = math.sqrt(sum((v - ave) ** 2 for v in values) / len(values))
    return CvStats(std=std, ave=ave, cv=std / ave)


def cv_table(
    samples: Iterable[PaintingSample],
    countries: Sequence[str],
    bands: Sequence[str] = BANDS,
) -> tuple[list[CvCell], list[tuple[str, str]]]:
    """Cross-country dispersion of color usage per happiness band.

    For each (band, color): take each listed country's mean proportion over
    its paintings whose happiness falls in the band, then the CV across
    those country means. Countries with no paintings in a band are excluded
    from that band and reported in the second return value.
    """
    samples = list(samples)
    present = {s.country for s in samples if s.country is not None}
    missing = [c for c in countries if c not in present]
    if missing:
        raise ValueError(f"countries absent from the data: {missing}")

    by_country: dict[str, list[PaintingSample]] = {c: [] for c in countries}
    for sample in samples:
        if sample.country in by_country:
            by_country[sample.country].append(sample)

    cells = []
    excluded = []
    for band in bands:
        in_band = {
            country: [s for s in members if intensity_band(s.happiness) == band]
            for country, members in by_country.items()
        }
        active = [c for c in countries if in_band[c]]
        excluded.extend((c, band) for c in countries if not in_band[c])
        if len(active) < 2:
            continue
        for color in COLOR_ORDER:
            country_means = [
                sum(s.proportions[color] for s in in_band[c]) / len(in_band[c])
                for c in active
            ]
            try:
                stats = coefficient_of_variation(country_means)
            except ValueError:
                continue  # all-zero usage of this color in the band
            cells.append(
                CvCell(color=color, band=band, std=stats.std, ave=stats.ave, cv=stats.cv)
            )
    return cells, excluded
