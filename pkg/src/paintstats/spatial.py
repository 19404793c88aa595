"""Spatial autocorrelation of country-level happiness.

Weights come from shared-border contiguity (optionally row-standardized),
with a k-nearest-centroid fallback for islands, or from pure k-nearest
neighbours. The global autocorrelation statistic over centered values z is

    I = (n / S0) * sum_ij w_ij z_i z_j / sum_i z_i^2,   S0 = sum_ij w_ij

and each unit's scatter point pairs its centered value with the weighted
mean of its neighbours' centered values (the spatial lag).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SCHEMES = ("binary_contiguity", "row_standardized", "knn_centroid")


@dataclass(frozen=True)
class WeightMatrix:
    units: tuple[str, ...]
    w: np.ndarray  # n x n, non-negative, zero diagonal
    scheme: str

    def row_sums(self) -> np.ndarray:
        return self.w.sum(axis=1)


@dataclass(frozen=True)
class ScatterPoint:
    unit: str
    z: float
    lag: float
    quadrant: str


@dataclass(frozen=True)
class MoranResult:
    statistic: float
    n: int
    scatter: tuple[ScatterPoint, ...]
    excluded: tuple[str, ...] = ()


def _haversine(a: tuple[float, float], b: tuple[float, float]) -> float:
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    d_lat = lat2 - lat1
    d_lon = lon2 - lon1
    h = math.sin(d_lat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(d_lon / 2) ** 2
    return 2 * math.asin(min(1.0, math.sqrt(h)))


def _knn_rows(
    units: Sequence[str],
    targets: Sequence[int],
    centroids: Mapping[str, tuple[float, float]],
    k: int,
) -> dict[int, list[int]]:
    missing = [units[i] for i in targets if units[i] not in centroids]
    if missing:
        raise ValueError(f"no centroid data for: {missing}")
    candidates = [j for j in range(len(units)) if units[j] in centroids]
    neighbours = {}
    for i in targets:
        distances = sorted(
            (_haversine(centroids[units[i]], centroids[units[j]]), j)
            for j in candidates
            if j != i
        )
        neighbours[i] = [j for _, j in distances[: min(k, len(distances))]]
    return neighbours


def build_weights(
    adjacency: Iterable[tuple[str, str]],
    units: Sequence[str],
    scheme: str = "row_standardized",
    centroids: Mapping[str, tuple[float, float]] | None = None,
    k: int = 4,
) -> WeightMatrix:
    """Spatial weights over the given units.

    Contiguity schemes take shared-border pairs; units with no listed
    border fall back to their k nearest centroids when centroid data is
    supplied, and are an error otherwise. "knn_centroid" ignores adjacency
    entirely and links every unit to its k nearest centroids.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme: {scheme}")
    units = tuple(units)
    index = {unit: i for i, unit in enumerate(units)}
    n = len(units)
    w = np.zeros((n, n), dtype=float)

    if scheme == "knn_centroid":
        if centroids is None:
            raise ValueError("knn_centroid scheme needs centroid data")
        for i, neighbours in _knn_rows(units, range(n), centroids, k).items():
            for j in neighbours:
                w[i, j] = 1.0
    else:
        for a, b in adjacency:
            if a not in index or b not in index:
                unknown = a if a not in index else b
                raise ValueError(f"unknown country in adjacency: {unknown}")
            if a == b:
                raise ValueError(f"self adjacency for {a}")
            w[index[a], index[b]] = 1.0
            w[index[b], index[a]] = 1.0
        islands = [i for i in range(n) if w[i].sum() == 0]
        if islands and centroids is not None:
            for i, neighbours in _knn_rows(units, islands, centroids, k).items():
                for j in neighbours:
                    w[i, j] = 1.0

    if scheme == "row_standardized":
        sums = w.sum(axis=1, keepdims=True)
        np.divide(w, sums, out=w, where=sums > 0)
    return WeightMatrix(units=units, w=w, scheme=scheme)


def scatter_quadrant(z: float, lag: float) -> str:
    """Quadrant of a (centered value, lag) point; zeros count as high."""
    high_z = z >= 0
    high_lag = lag >= 0
    if high_z and high_lag:
        return "high_high"
    if not high_z and not high_lag:
        return "low_low"
    if high_z:
        return "high_low"
    return "low_high"


def morans_i(values: Sequence[float], weights: WeightMatrix) -> MoranResult:
    """Global autocorrelation of per-unit values under the given weights.

    Units whose weight row sums to zero cannot contribute a lag; they are
    dropped (repeatedly, since dropping can orphan others) and reported in
    the result rather than silently ignored.
    """
    if len(values) != len(weights.units):
        raise ValueError(
            f"{len(values)} values for {len(weights.units)} units"
        )
    x = np.asarray(values, dtype=float)
    w = weights.w.copy()
    units = list(weights.units)
    excluded: list[str] = []
    while True:
        row_sums = w.sum(axis=1)
        orphans = np.nonzero(row_sums == 0)[0]
        if orphans.size == 0:
            break
        for i in sorted(orphans, reverse=True):
            excluded.append(units[i])
        keep = row_sums > 0
        w = w[np.ix_(keep, keep)]
        x = x[keep]
        units = [u for u, flag in zip(units, keep) if flag]

    n = len(units)
    if n < 3:
        raise ValueError(f"need at least 3 connected units, have {n}")
    z = x - x.mean()
    z_squared = float(z @ z)
    if z_squared == 0.0:
        raise ValueError("zero variance, Moran's I undefined")
    s0 = float(w.sum())
    if s0 <= 0.0:
        raise ValueError("weights sum to zero")

    statistic = (n / s0) * float(z @ w @ z) / z_squared
    lags = (w @ z) / w.sum(axis=1)
    scatter = tuple(
        ScatterPoint(
            unit=unit,
            z=float(zi),
            lag=float(lag),
            quadrant=scatter_quadrant(float(zi), float(lag)),
        )
        for unit, zi, lag in zip(units, z, lags)
    )
    return MoranResult(
        statistic=statistic,
        n=n,
        scatter=scatter,
        excluded=tuple(sorted(excluded)),
    )


def choropleth_export(
    country_stats: Mapping[str, tuple[float, int]],
    path: str | Path,
    names: Mapping[str, str] | None = None,
) -> Path:
    """Write per-country mean happiness as CSV, sorted by country code.

    country_stats maps an ISO code to (mean happiness, painting count).
    """
    if not country_stats:
        raise ValueError("no country data to export")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["country", "iso_code", "mean_happiness", "n_paintings"])
        for code in sorted(country_stats):
            mean, count = country_stats[code]
            name = names.get(code, code) if names else code
            writer.writerow([name, code, repr(float(mean)), count])
    return path
